//! Discrete minimization of `L_H(G) = |G| - int_{Omega_G} H` over graph
//! curves with pinned endpoints, where `Omega_G` is the region between the
//! curve and a horizontal baseline.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::quadrature::gauss_legendre_8_on;
use crate::tracer::{Curve, CurveKind, ExitEvent, Sample};
use serde::{Deserialize, Serialize};

/// Heights over a uniform grid `x_i = x0 + i dx`. Endpoints stay fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphCurve {
    pub x0: f64,
    pub dx: f64,
    pub ys: Vec<f64>,
    /// Lower edge of the enclosed region. Moving it changes `L_H` by a
    /// constant only.
    pub baseline: f64,
}

impl GraphCurve {
    pub fn new(x0: f64, x1: f64, ys: Vec<f64>) -> Self {
        let dx = (x1 - x0) / (ys.len().max(2) - 1) as f64;
        Self {
            x0,
            dx,
            ys,
            baseline: 0.0,
        }
    }

    /// Samples `f` at `nodes` equally spaced abscissae on `[x0, x1]`.
    pub fn from_fn(x0: f64, x1: f64, nodes: usize, f: impl Fn(f64) -> f64) -> Self {
        let dx = (x1 - x0) / (nodes - 1) as f64;
        Self::new(x0, x1, (0..nodes).map(|i| f(x0 + i as f64 * dx)).collect())
    }

    pub fn with_baseline(mut self, b: f64) -> Self {
        self.baseline = b;
        self
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.ys.len()).map(|i| Point::new(self.x(i), self.ys[i])).collect()
    }

    pub fn length(&self) -> f64 {
        self.ys.windows(2).map(|w| self.dx.hypot(w[1] - w[0])).sum()
    }

    fn check_heights(&self) -> Result<()> {
        let n = self.ys.len();
        for (i, &y) in self.ys.iter().enumerate() {
            let interior = i > 0 && i + 1 < n;
            let ok = if interior { y > self.baseline } else { y >= self.baseline };
            if !ok || !y.is_finite() {
                return Err(Error::NegativeHeight { index: i, y });
            }
        }
        Ok(())
    }

    /// `(w_k, ell_k)` per segment with `w = dy / ell = y' / sqrt(1 + y'^2)`.
    fn segments(&self) -> Vec<(f64, f64)> {
        self.ys
            .windows(2)
            .map(|w| {
                let dy = w[1] - w[0];
                let ell = self.dx.hypot(dy);
                (dy / ell, ell)
            })
            .collect()
    }

    fn midpoint(&self, k: usize) -> Point {
        Point::new(self.x(k) + 0.5 * self.dx, 0.5 * (self.ys[k] + self.ys[k + 1]))
    }

    /// Per-node curvature `y'' / (1 + y'^2)^(3/2)` from second differences;
    /// `None` at the endpoints.
    pub fn node_curvatures(&self) -> Vec<Option<f64>> {
        let n = self.ys.len();
        (0..n)
            .map(|i| {
                if i == 0 || i + 1 == n {
                    return None;
                }
                let (a, b, c) = (self.ys[i - 1], self.ys[i], self.ys[i + 1]);
                let yp = (c - a) / (2.0 * self.dx);
                let ypp = (c - 2.0 * b + a) / (self.dx * self.dx);
                Some(ypp / (1.0 + yp * yp).powf(1.5))
            })
            .collect()
    }

    /// Polyline with `kappa` from [`GraphCurve::node_curvatures`], `theta`
    /// the angle of the upward graph normal and `H` from `h`.
    pub fn to_curve<H: Fn(Point) -> Result<f64>>(&self, h: H) -> Result<Curve> {
        let n = self.ys.len();
        let kappas = self.node_curvatures();
        let mut samples = Vec::with_capacity(n);
        let mut sigma = 0.0;
        for i in 0..n {
            let p = Point::new(self.x(i), self.ys[i]);
            if i > 0 {
                sigma += p.dist(Point::new(self.x(i - 1), self.ys[i - 1]));
            }
            let (l, r) = (i.saturating_sub(1), (i + 1).min(n - 1));
            let slope = (self.ys[r] - self.ys[l]) / (self.x(r) - self.x(l));
            samples.push(Sample {
                sigma,
                p,
                theta: 1f64.atan2(-slope),
                h: h(p)?,
                kappa: kappas[i],
            });
        }
        Ok(Curve {
            kind: CurveKind::Characteristic,
            start: samples[0].p,
            samples,
            exit: ExitEvent::Completed,
        })
    }
}

fn strip_integral<H: Fn(Point) -> Result<f64>>(h: &H, x: f64, y0: f64, y1: f64) -> Result<f64> {
    let mut s = 0.0;
    for (y, w) in gauss_legendre_8_on(y0, y1) {
        s += w * h(Point::new(x, y))?;
    }
    Ok(s)
}

/// `|G| - int H` with midpoint strips in `x` and eight-point Gauss-Legendre
/// in `y`.
pub fn eval_lh<H: Fn(Point) -> Result<f64>>(c: &GraphCurve, h: H) -> Result<f64> {
    c.check_heights()?;
    let mut area = 0.0;
    for k in 0..c.ys.len() - 1 {
        let m = c.midpoint(k);
        area += c.dx * strip_integral(&h, m.x, c.baseline, m.y)?;
    }
    Ok(c.length() - area)
}

/// Exact gradient of the discrete functional with respect to the interior
/// heights.
pub fn gradient<H: Fn(Point) -> Result<f64>>(c: &GraphCurve, h: H) -> Result<Vec<f64>> {
    let seg = c.segments();
    let hm = (0..seg.len())
        .map(|k| h(c.midpoint(k)))
        .collect::<Result<Vec<f64>>>()?;
    Ok((1..c.ys.len() - 1)
        .map(|i| seg[i - 1].0 - seg[i].0 - c.dx * 0.5 * (hm[i - 1] + hm[i]))
        .collect())
}

/// Tridiagonal Hessian `(sub, diag, sup)` of the interior heights; the
/// area part uses differenced `dH/dy`.
fn hessian<H: Fn(Point) -> Result<f64>>(c: &GraphCurve, h: &H) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let seg = c.segments();
    let curv: Vec<f64> = seg.iter().map(|(_, ell)| c.dx * c.dx / ell.powi(3)).collect();
    let hy = (0..seg.len())
        .map(|k| {
            let m = c.midpoint(k);
            let e = 1e-5 * m.norm().max(1.0);
            Ok((h(Point::new(m.x, m.y + e))? - h(Point::new(m.x, m.y - e))?) / (2.0 * e))
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = c.ys.len() - 2;
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m.saturating_sub(1)];
    for r in 0..m {
        let i = r + 1;
        diag[r] = curv[i - 1] + curv[i] - 0.25 * c.dx * (hy[i - 1] + hy[i]);
        if r + 1 < m {
            off[r] = -curv[i] - 0.25 * c.dx * hy[i];
        }
    }
    Ok((off.clone(), diag, off))
}

/// Thomas algorithm; `None` on a vanishing pivot.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    if beta.abs() < 1e-300 {
        return None;
    }
    d[0] = rhs[0] / beta;
    for i in 1..n {
        c[i - 1] = sup[i - 1] / beta;
        beta = diag[i] - sub[i - 1] * c[i - 1];
        if beta.abs() < 1e-300 {
            return None;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimized {
    pub curve: GraphCurve,
    pub value: f64,
    pub initial_value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
}

pub const ARMIJO: f64 = 1e-4;

/// Damped Newton on the interior heights with Armijo backtracking from a
/// unit step; steps that would push the curve onto the baseline are
/// backtracked too. Stops when the gradient's max-norm drops below `tol`.
pub fn minimize_lh<H: Fn(Point) -> Result<f64>>(
    c0: &GraphCurve,
    h: H,
    tol: f64,
    max_iters: usize,
) -> Result<Minimized> {
    if c0.ys.len() < 3 {
        return Err(Error::TooShort {
            needed: 3,
            got: c0.ys.len(),
        });
    }
    let mut c = c0.clone();
    let initial_value = eval_lh(&c, &h)?;
    let mut value = initial_value;
    let mut g = gradient(&c, &h)?;
    let mut gnorm = inf_norm(&g);
    let mut iterations = 0;
    while gnorm >= tol {
        if iterations == max_iters {
            return Err(Error::NoConvergence { last_change: gnorm });
        }
        iterations += 1;
        let (sub, diag, sup) = hessian(&c, &h)?;
        let neg: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut dir = solve_tridiagonal(&sub, &diag, &sup, &neg).unwrap_or_else(|| neg.clone());
        let mut slope: f64 = dir.iter().zip(&g).map(|(d, g)| d * g).sum();
        if !(slope < 0.0) {
            dir = neg;
            slope = dir.iter().zip(&g).map(|(d, g)| d * g).sum();
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        let mut infeasible = false;
        for _ in 0..60 {
            let mut trial = c.clone();
            for (k, d) in dir.iter().enumerate() {
                trial.ys[k + 1] += alpha * d;
            }
            match eval_lh(&trial, &h) {
                Ok(v) => {
                    if v <= value + ARMIJO * alpha * slope {
                        accepted = Some((trial, v));
                        break;
                    }
                    // near the optimum the decrease is below rounding; a
                    // step that still shrinks the gradient is kept
                    let tg = gradient(&trial, &h)?;
                    if v <= value + 1e-14 * value.abs().max(1.0) && inf_norm(&tg) < 0.5 * gnorm {
                        accepted = Some((trial, v));
                        break;
                    }
                }
                Err(Error::NegativeHeight { .. }) => infeasible = true,
                Err(e) => return Err(e),
            }
            alpha *= 0.5;
        }
        let Some((next, v)) = accepted else {
            return Err(if infeasible {
                Error::LeftFeasibleSet
            } else {
                Error::NoConvergence { last_change: gnorm }
            });
        };
        c = next;
        value = v;
        g = gradient(&c, &h)?;
        gnorm = inf_norm(&g);
    }
    Ok(Minimized {
        curve: c,
        value,
        initial_value,
        gradient_norm: gnorm,
        iterations,
    })
}

/// Per interior node: `(w_{i+1/2} - w_{i-1/2}) / dx + H(x_i, y_i)`.
pub fn euler_lagrange_residual<H: Fn(Point) -> Result<f64>>(c: &GraphCurve, h: H) -> Result<Vec<f64>> {
    let n = c.ys.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    let seg = c.segments();
    (1..n - 1)
        .map(|i| Ok((seg[i].0 - seg[i - 1].0) / c.dx + h(Point::new(c.x(i), c.ys[i]))?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn functional_values() {
        let flat = GraphCurve::new(0.0, 1.0, vec![1.0, 1.0]);
        assert!((eval_lh(&flat, |_| Ok(0.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(eval_lh(&flat, |_| Ok(1.0)).unwrap().abs() < 1e-15);
        let tent = GraphCurve::new(0.0, 1.0, vec![1.0, 1.5, 1.0]);
        assert!((eval_lh(&tent, |_| Ok(0.0)).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_differences() {
        let c = GraphCurve::from_fn(0.0, 1.0, 9, |x| 1.0 + 0.2 * (3.0 * x).sin());
        let h = |p: Point| Ok(1.0 + 0.3 * p.x + 0.1 * p.y * p.y);
        let g = gradient(&c, h).unwrap();
        for i in 1..8 {
            let e = 1e-6;
            let mut a = c.clone();
            let mut b = c.clone();
            a.ys[i] += e;
            b.ys[i] -= e;
            let fd = (eval_lh(&a, h).unwrap() - eval_lh(&b, h).unwrap()) / (2.0 * e);
            assert!((fd - g[i - 1]).abs() < 1e-8, "node {i}: {fd} vs {}", g[i - 1]);
        }
    }

    #[test]
    fn kink_residual() {
        let tent = GraphCurve::new(0.0, 1.0, vec![1.0, 1.5, 1.0]);
        let r = euler_lagrange_residual(&tent, |_| Ok(0.0)).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].abs() >= 0.1);
    }

    #[test]
    fn negative_height() {
        let c = GraphCurve::new(0.0, 1.0, vec![1.0, -0.5, 1.0]);
        assert!(matches!(eval_lh(&c, |_| Ok(0.0)), Err(Error::NegativeHeight { index: 1, .. })));
    }
}
