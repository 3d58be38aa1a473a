use charflow::catalog;
use charflow::charts::{build_chart, chart_residuals, theta_derivative_checks, Chart, ChartOptions};
use charflow::{FrameField, Point, Tolerances};
use charflow_expr::parse;

fn bilinear_chart() -> (catalog::CatalogEntry, Chart) {
    let e = catalog::get("bilinear").unwrap();
    let c = build_chart(&e.frame, e.center, 0.5, 21, &ChartOptions::default()).unwrap();
    (e, c)
}

#[test]
fn bilinear_chart_matches_closed_forms() {
    let (e, c) = bilinear_chart();
    let truth = e.truth.chart.as_ref().unwrap();
    let (t, g) = (c.t.as_ref().unwrap(), c.g.as_ref().unwrap());
    for (k, &q) in c.points.iter().enumerate() {
        assert!((c.s[k] - (truth.s)(q)).abs() <= 1e-8);
        assert!((c.f[k] - 1.0).abs() <= 1e-8);
        assert!((t[k] - q.y).abs() <= 1e-8);
        assert!((g[k] - 1.0 / (2.0 * q.x)).abs() <= 1e-6);
    }
    let rep = chart_residuals(&c, &e.frame, &Tolerances::default());
    for check in ["chart.grad_s", "chart.transport_f", "chart.transport_g", "chart.grad_t"] {
        assert!(rep.entry(check).unwrap().max_residual <= 1e-6, "{check}");
    }
}

#[test]
fn chart_axes_follow_the_frame() {
    let (_, c) = bilinear_chart();
    assert_eq!(c.e2, Point::new(0.0, 1.0));
    assert_eq!(c.e1, Point::new(1.0, 0.0));
    assert!(c.rotation.abs() < 1e-15);
    assert_eq!(c.radius, 0.5);
}

#[test]
fn s_does_not_depend_on_the_step() {
    let e = catalog::get("radial").unwrap();
    let a = build_chart(&e.frame, e.center, 0.3, 11, &ChartOptions::default()).unwrap();
    let opts = ChartOptions { step: 5e-4, ..ChartOptions::default() };
    let b = build_chart(&e.frame, e.center, 0.3, 11, &opts).unwrap();
    for k in 0..a.s.len() {
        assert!((a.s[k] - b.s[k]).abs() <= 1e-8);
        assert!((a.f[k] - b.f[k]).abs() <= 1e-8);
    }
}

#[test]
fn densities_are_positive_and_coordinates_monotone() {
    let smooth = FrameField::graph(
        parse("0.5 * (x^2 + y^2)").unwrap(),
        parse("-y").unwrap(),
        parse("x").unwrap(),
    );
    let c = build_chart(&smooth, Point::new(1.0, 0.0), 0.2, 15, &ChartOptions::default()).unwrap();
    let (t, g) = (c.t.as_ref().unwrap(), c.g.as_ref().unwrap());
    assert!(c.f.iter().chain(g).all(|v| *v > 0.0));
    let n = c.grid_n;
    for j in 0..n {
        for i in 0..n - 1 {
            assert!(c.s[c.index(i + 1, j)] > c.s[c.index(i, j)]);
            assert!(t[c.index(j, i + 1)] > t[c.index(j, i)]);
        }
    }
}

#[test]
fn radial_chart_residuals_shrink_with_refinement() {
    let e = catalog::get("radial").unwrap();
    let tol = Tolerances::default();
    let errs: Vec<f64> = [21, 41]
        .iter()
        .map(|&n| {
            let c = build_chart(&e.frame, e.center, e.chart_radius, n, &ChartOptions::default()).unwrap();
            let rep = chart_residuals(&c, &e.frame, &tol);
            assert!(rep.passed());
            rep.entry("chart.grad_s").unwrap().max_residual
        })
        .collect();
    assert!(errs[1] < errs[0] / 3.5, "{errs:?}");
}

#[test]
fn theta_derivatives_vanish_on_bilinear() {
    let (e, c) = bilinear_chart();
    let rep = theta_derivative_checks(&c, &e.frame, &Tolerances::default()).unwrap();
    assert!(rep.entry("theta.s").unwrap().max_residual <= 1e-8);
    assert!(rep.entry("theta.t").unwrap().max_residual <= 1e-8);
    assert!(rep.passed());
}

#[test]
fn theta_checks_need_graph_mode() {
    let e = catalog::get("radial").unwrap();
    let c = build_chart(&e.frame, e.center, 0.2, 9, &ChartOptions::default()).unwrap();
    assert!(c.t.is_none());
    assert!(theta_derivative_checks(&c, &e.frame, &Tolerances::default()).is_err());
}

#[test]
fn chart_evaluates_off_grid_and_serializes() {
    let (e, c) = bilinear_chart();
    let v = c.evaluate(&e.frame, Point::new(1.2, 0.7)).unwrap();
    assert!((v.s - 1.2).abs() < 1e-10);
    assert!((v.g.unwrap() - 1.0 / 2.4).abs() < 1e-8);
    let back: Chart = serde_json::from_str(&c.to_json()).unwrap();
    assert_eq!(back, c);
}
