use charflow::catalog;
use charflow::picard::picard_characteristic;
use charflow::tracer::{polyline_distance, trace, Curve, CurveKind, ExitEvent};
use charflow::{Error, FrameField, Point, Rect};
use charflow_expr::parse;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

fn interior_max<F: Fn(&charflow::tracer::Sample) -> f64>(c: &Curve, f: F) -> f64 {
    let n = c.samples.len();
    c.samples[1..n - 1].iter().map(f).fold(0.0, f64::max)
}

#[test]
fn bilinear_characteristic_is_a_horizontal_segment() {
    let e = catalog::get("bilinear").unwrap();
    let c = trace(&e.frame, Point::new(1.0, 0.5), CurveKind::Characteristic, 1.0, 1e-3, &e.trace_box).unwrap();
    assert_eq!(c.exit, ExitEvent::Completed);
    assert!(c.end().dist(Point::new(2.0, 0.5)) < 1e-12);
    assert!(c.samples.iter().all(|s| (s.p.y - 0.5).abs() < 1e-15));
    assert!(c.samples.iter().all(|s| s.kappa.unwrap().abs() < 1e-8));
}

#[test]
fn radial_characteristic_is_a_clockwise_quarter_circle() {
    let e = catalog::get("radial").unwrap();
    let c = trace(&e.frame, Point::new(1.0, 0.0), CurveKind::Characteristic, FRAC_PI_2, 1e-3, &e.trace_box).unwrap();
    assert!(c.end().dist(Point::new(0.0, -1.0)) < 1e-8);
    assert!(c.samples.iter().all(|s| (s.kappa.unwrap() + 1.0).abs() < 1e-6));
    // unwrapped angle runs continuously from 0 down to -pi/2
    assert!((c.samples.last().unwrap().theta + FRAC_PI_2).abs() < 1e-8);
}

#[test]
fn radial_angle_unwraps_across_the_branch_cut() {
    let e = catalog::get("radial").unwrap();
    let c = trace(&e.frame, Point::new(-1.0, 0.5), CurveKind::Characteristic, 2.0, 1e-3, &e.trace_box).unwrap();
    for w in c.samples.windows(2) {
        assert!((w[1].theta - w[0].theta).abs() < 0.01);
    }
}

#[test]
fn lipschitz_seed_climbs_the_vertical_line() {
    let e = catalog::get("lipschitz_xy").unwrap();
    let c = trace(&e.frame, Point::new(1.0, 0.5), CurveKind::Seed, 0.5, 1e-3, &e.trace_box).unwrap();
    assert!(c.samples.iter().all(|s| (s.p.x - 1.0).abs() < 1e-15));
    assert!(c.end().dist(Point::new(1.0, 1.0)) < 1e-12);
}

#[test]
fn example32_curvature_on_the_quartic() {
    let e = catalog::get("example32").unwrap();
    let c = trace(&e.frame, Point::new(1.0, 1.0), CurveKind::Characteristic, 0.5, 1e-3, &e.trace_box).unwrap();
    let expected = 12.0 * 17f64.powf(-1.5);
    assert!((c.samples[0].kappa.unwrap() - expected).abs() < 1e-3);
    let flat = trace(&e.frame, Point::new(1.0, -1.0), CurveKind::Characteristic, 0.5, 1e-3, &e.trace_box).unwrap();
    assert!(flat.samples.iter().all(|s| s.kappa.unwrap().abs() < 1e-6));
}

#[test]
fn starting_on_the_singular_set_fails() {
    let e = catalog::get("bilinear").unwrap();
    let r = trace(&e.frame, Point::new(0.0, 0.5), CurveKind::Characteristic, 1.0, 1e-3, &Rect::new(-1.0, 3.0, -2.0, 2.0));
    assert!(matches!(r, Err(Error::SingularPoint { .. })));
}

#[test]
fn stage_outside_the_domain_is_step_too_large() {
    let f = FrameField::direct(parse("0.3 * sqrt(x)").unwrap(), None);
    let r = trace(&f, Point::new(0.01, 0.0), CurveKind::Seed, -0.5, 0.1, &Rect::new(-1.0, 1.0, -1.0, 1.0));
    assert!(matches!(r, Err(Error::StepTooLarge { .. })), "{r:?}");
}

#[test]
fn singular_point_ahead_stops_the_trace() {
    let e = catalog::get("bilinear").unwrap();
    let c = trace(&e.frame, Point::new(0.5, 0.5), CurveKind::Characteristic, -1.0, 1e-3, &Rect::new(-1.0, 3.0, -2.0, 2.0)).unwrap();
    assert_eq!(c.exit, ExitEvent::Singular);
    assert!(c.end().x > 0.0 && c.end().x < 2e-3);
}

#[test]
fn rk4_richardson_order() {
    let e = catalog::get("radial").unwrap();
    let ends: Vec<Point> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&h| trace(&e.frame, Point::new(1.2, 0.3), CurveKind::Characteristic, 2.0, h, &e.trace_box).unwrap().end())
        .collect();
    let order = (ends[0].dist(ends[1]) / ends[1].dist(ends[2])).log2();
    assert!(order >= 3.9, "order {order}");
}

#[test]
fn traces_stay_tangent_to_the_closed_form_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for e in catalog::list() {
        for _ in 0..100 {
            let p = e.sample_region.sample(&mut rng);
            let n = e.frame.normal(p).unwrap();
            assert!(n.rot_cw().dist((e.truth.characteristic_tangent)(p)) <= 1e-10, "{} at {p}", e.name);
            assert!(n.dist((e.truth.seed_tangent)(p)) <= 1e-10, "{} at {p}", e.name);
        }
    }
}

#[test]
fn curve_csv_round_trip() {
    let e = catalog::get("radial").unwrap();
    let c = trace(&e.frame, Point::new(1.0, 0.0), CurveKind::Characteristic, 0.3, 1e-2, &e.trace_box).unwrap();
    let mut buf = Vec::new();
    c.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("sigma,x,y,theta,H,kappa\n"));
    let back = Curve::read_csv(&buf[..], CurveKind::Characteristic).unwrap();
    assert_eq!(back.samples, c.samples);
}

#[test]
fn picard_agrees_with_rk() {
    let e = catalog::get("radial").unwrap();
    let p = picard_characteristic(&e.frame, Point::new(1.0, 0.0), (1.0, 1.2), 2001, 100).unwrap();
    assert!(p.last_change < 1e-10);
    let len = p.curve.samples.last().unwrap().sigma;
    let rk = trace(&e.frame, Point::new(1.0, 0.0), CurveKind::Characteristic, len + 1e-3, 1e-4, &e.trace_box).unwrap();
    let pts = rk.points();
    let gap = p.curve.points().iter().map(|&q| polyline_distance(&pts, q)).fold(0.0, f64::max);
    assert!(gap <= 1e-6, "gap {gap}");
}

#[test]
fn picard_stops_when_out_of_iterations() {
    let e = catalog::get("radial").unwrap();
    let r = picard_characteristic(&e.frame, Point::new(1.0, 0.0), (1.0, 1.4), 401, 2);
    assert!(matches!(r, Err(Error::NoConvergence { .. })));
}

fn profiles() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("y * abs(y)"), Just("y * y * y"), Just("0.2 * sin(3 * y)"), Just("exp(y)")]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unit_speed_and_reversibility(r in 0.6f64..1.8, a in -3.0f64..3.0, len in 0.2f64..1.5) {
        let e = catalog::get("radial").unwrap();
        let p = Point::polar(a) * r;
        let c = trace(&e.frame, p, CurveKind::Characteristic, len, 1e-3, &e.trace_box).unwrap();
        for w in c.samples.windows(2) {
            prop_assert!((w[1].p.dist(w[0].p) / (w[1].sigma - w[0].sigma) - 1.0).abs() <= 1e-6);
        }
        let back = trace(&e.frame, c.end(), CurveKind::Characteristic, -len, 1e-3, &e.trace_box).unwrap();
        prop_assert!(back.end().dist(p) <= 1e-8);
    }

    #[test]
    fn curvature_is_minus_h(r in 0.5f64..2.0, a in -3.0f64..3.0) {
        let e = catalog::get("radial").unwrap();
        let c = trace(&e.frame, Point::polar(a) * r, CurveKind::Characteristic, 1.0, 1e-3, &e.trace_box).unwrap();
        prop_assert!(interior_max(&c, |s| (s.kappa.unwrap() + s.h).abs()) <= 1e-4);
    }

    #[test]
    fn profile_does_not_move_the_curves(g in profiles(), x in 0.6f64..1.4, y in 0.0f64..1.0, seed in any::<bool>()) {
        let plain = catalog::get("bilinear").unwrap();
        let bent = catalog::get(&format!("bilinear({g})")).unwrap();
        let kind = if seed { CurveKind::Seed } else { CurveKind::Characteristic };
        let p = Point::new(x, y);
        let a = trace(&plain.frame, p, kind, 0.5, 1e-3, &plain.trace_box).unwrap();
        let b = trace(&bent.frame, p, kind, 0.5, 1e-3, &bent.trace_box).unwrap();
        prop_assert_eq!(a.samples.len(), b.samples.len());
        for (s, t) in a.samples.iter().zip(&b.samples) {
            prop_assert!(s.p.dist(t.p) <= 1e-8);
        }
    }
}

#[test]
fn radial_seeds_are_rays() {
    let e = catalog::get("radial").unwrap();
    let c = trace(&e.frame, Point::polar(0.7), CurveKind::Seed, 1.0, 1e-2, &e.trace_box).unwrap();
    assert!(c.end().dist(Point::polar(0.7) * 2.0) < 1e-12);
    assert!((c.samples[3].theta - 0.7).abs() < 1e-12);
}
