use charflow::catalog;
use charflow::flux::{flux_dnperp, flux_n, PolygonDomain};
use charflow::{Error, Point};
use charflow_expr::parse;
use proptest::prelude::*;
use std::f64::consts::FRAC_PI_4;

#[test]
fn bilinear_square() {
    let e = catalog::get("bilinear").unwrap();
    let sq = PolygonDomain::rectangle(1.0, 2.0, 0.0, 1.0).unwrap();
    let n = flux_n(&e.frame, &sq, None, 64).unwrap();
    assert!(n.lhs.abs() <= 1e-10 && n.rhs.abs() <= 1e-10);
    let d = flux_dnperp(&e.frame, &sq, None, 64).unwrap();
    assert!((d.rhs - 2.0).abs() <= 1e-9);
    assert!(d.residual <= 1e-9);
    let x = parse("x").unwrap();
    assert!(flux_dnperp(&e.frame, &sq, Some(&x), 64).unwrap().residual <= 1e-8);
}

#[test]
fn radial_sector() {
    let e = catalog::get("radial").unwrap();
    let sector = PolygonDomain::annular_sector(1.0, 2.0, 0.0, FRAC_PI_4, 64).unwrap();
    let mut last = f64::INFINITY;
    for k in [32, 64, 128, 256] {
        let r = flux_n(&e.frame, &sector, None, k).unwrap();
        assert!(r.residual <= 1e-6);
        assert!(r.residual <= last / 3.0 || r.residual <= 1e-10);
        last = r.residual;
    }
}

#[test]
fn lipschitz_square_across_the_interface() {
    let e = catalog::get("lipschitz_xy").unwrap();
    let sq = PolygonDomain::rectangle(0.5, 1.5, -0.5, 0.5).unwrap();
    assert!(flux_dnperp(&e.frame, &sq, None, 128).unwrap().residual <= 1e-4);
}

#[test]
fn direct_mode_has_no_dnperp_flux() {
    let e = catalog::get("radial").unwrap();
    let sq = PolygonDomain::rectangle(1.0, 2.0, 0.0, 1.0).unwrap();
    assert!(matches!(flux_dnperp(&e.frame, &sq, None, 16), Err(Error::Mode(_))));
}

#[test]
fn singular_domain_is_reported() {
    let e = catalog::get("bilinear").unwrap();
    let sq = PolygonDomain::rectangle(-0.5, 0.5, 0.0, 1.0).unwrap();
    assert!(matches!(flux_n(&e.frame, &sq, None, 16), Err(Error::SingularPoint { .. })));
}

#[test]
fn reversed_orientation_is_rejected() {
    let sq = PolygonDomain::rectangle(1.0, 2.0, 0.0, 1.0).unwrap();
    let mut v = sq.vertices().to_vec();
    v.reverse();
    assert!(matches!(PolygonDomain::new(v), Err(Error::InvalidPolygon(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn shared_edges_cancel(x0 in 0.6f64..1.0, w in 0.2f64..1.0, y0 in -1.0f64..0.5, h in 0.2f64..1.0, cut in 0.1f64..0.9) {
        let e = catalog::get("radial").unwrap();
        let xc = x0 + cut * w;
        let whole = PolygonDomain::rectangle(x0, x0 + w, y0, y0 + h).unwrap();
        let left = PolygonDomain::rectangle(x0, xc, y0, y0 + h).unwrap();
        let right = PolygonDomain::rectangle(xc, x0 + w, y0, y0 + h).unwrap();
        let f = |d: &PolygonDomain| flux_n(&e.frame, d, None, 32).unwrap();
        let (a, b, c) = (f(&whole), f(&left), f(&right));
        prop_assert!((b.lhs + c.lhs - a.lhs).abs() <= 1e-10);
        prop_assert!(a.residual <= 1e-6);
    }

    #[test]
    fn identity_holds_with_weights(x0 in 0.6f64..1.2, y0 in -0.8f64..0.8) {
        let e = catalog::get("bilinear").unwrap();
        let sq = PolygonDomain::new(vec![
            Point::new(x0, y0),
            Point::new(x0 + 0.4, y0 + 0.1),
            Point::new(x0 + 0.3, y0 + 0.5),
            Point::new(x0 + 0.1, y0 + 0.2),
        ]).unwrap();
        let phi = parse("x^2 - y * sin(x)").unwrap();
        prop_assert!(flux_n(&e.frame, &sq, Some(&phi), 32).unwrap().residual <= 1e-10);
        prop_assert!(flux_dnperp(&e.frame, &sq, Some(&phi), 32).unwrap().residual <= 1e-10);
    }
}
