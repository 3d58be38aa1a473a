//! Fixed-point (Picard) form of the characteristic as a graph over its own
//! tangent line: `w(X) = -int_0^X H`, `Y' = w / sqrt(1 - w^2)`.

use crate::error::{Error, Result};
use crate::fields::FrameField;
use crate::geometry::Point;
use crate::tracer::{Curve, CurveKind, ExitEvent, Sample};

#[derive(Clone, Debug, PartialEq)]
pub struct PicardResult {
    pub curve: Curve,
    pub iterations: usize,
    pub last_change: f64,
}

pub const PICARD_TOLERANCE: f64 = 1e-10;

fn cumulative_trapezoid(f: &[f64], dx: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in f.windows(2) {
        acc += 0.5 * dx * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Iterates the integral equation on `n` abscissae. The local frame has
/// `e1 = N_perp(p0)` and `e2 = N(p0)`; a point with local coordinates
/// `(X, Y)` is `p0 + X e1 + Y e2`, and `xspan` is `[a, b]` with the
/// abscissa `a + X` running over it, so only its length `b - a` matters.
pub fn picard_characteristic(
    field: &FrameField,
    p0: Point,
    xspan: (f64, f64),
    n: usize,
    iters: usize,
) -> Result<PicardResult> {
    let (a, b) = xspan;
    if !(b > a) || n < 2 || iters == 0 {
        return Err(Error::InvalidArgument(format!(
            "picard needs b > a, n >= 2 and iters >= 1 (got [{a}, {b}], n {n}, iters {iters})"
        )));
    }
    let e2 = field.normal(p0)?;
    let e1 = e2.rot_cw();
    let dx = (b - a) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|k| k as f64 * dx).collect();
    let at = |x: f64, y: f64| p0 + e1 * x + e2 * y;

    let mut ys = vec![0.0; n];
    let mut last_change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < iters {
        iterations += 1;
        let hs = xs
            .iter()
            .zip(&ys)
            .map(|(&x, &y)| field.h(at(x, y)))
            .collect::<Result<Vec<f64>>>()?;
        let w: Vec<f64> = cumulative_trapezoid(&hs, dx).into_iter().map(|v| -v).collect();
        let wmax = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if wmax >= 1.0 {
            return Err(Error::SlopeBlowup { value: wmax });
        }
        let slope: Vec<f64> = w.iter().map(|w| w / (1.0 - w * w).sqrt()).collect();
        let next = cumulative_trapezoid(&slope, dx);
        last_change = next
            .iter()
            .zip(&ys)
            .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        ys = next;
        if last_change < PICARD_TOLERANCE {
            break;
        }
    }
    if !(last_change < PICARD_TOLERANCE) {
        return Err(Error::NoConvergence { last_change });
    }

    let mut samples = Vec::with_capacity(n);
    let mut sigma = 0.0;
    let mut prev: Option<(Point, f64)> = None;
    for (&x, &y) in xs.iter().zip(&ys) {
        let p = at(x, y);
        let f = field.frame_at(p)?;
        let theta = match prev {
            Some((q, t)) => {
                sigma += p.dist(q);
                f.theta + 2.0 * std::f64::consts::PI * ((t - f.theta) / (2.0 * std::f64::consts::PI)).round()
            }
            None => f.theta,
        };
        samples.push(Sample {
            sigma,
            p,
            theta,
            h: f.h,
            kappa: None,
        });
        prev = Some((p, theta));
    }
    let mut curve = Curve {
        kind: CurveKind::Characteristic,
        start: p0,
        samples,
        exit: ExitEvent::Completed,
    };
    curve.fill_curvature();
    Ok(PicardResult {
        curve,
        iterations,
        last_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn flat_field_converges_at_once() {
        let e = catalog::get("bilinear").unwrap();
        let r = picard_characteristic(&e.frame, Point::new(1.0, 0.5), (1.0, 1.5), 101, 10).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.curve.samples.iter().all(|s| s.p.y == 0.5));
    }

    #[test]
    fn long_span_blows_up() {
        let e = catalog::get("radial").unwrap();
        let r = picard_characteristic(&e.frame, Point::new(1.0, 0.0), (1.0, 2.5), 401, 50);
        assert!(matches!(r, Err(Error::SlopeBlowup { .. })));
    }
}
