//! Characteristic coordinates `(s, t)` around a point, with densities
//! `f = |grad s|` and `g = |grad t| / D`.
//!
//! The chart frame is `e1 = N_perp(p0)`, `e2 = N(p0)`, which is the frame
//! in which the normal at the center points straight up. `s` is read off
//! where the seed curve through a point meets the line through `p0` along
//! `e1`; `t` where the characteristic meets the line along `e2`. The
//! densities are carried along the same curves by `N f + f H = 0` and
//! `N_perp g + g rot F / D = 0`.

use crate::error::{Error, Result};
use crate::fields::{angle_of, FrameField};
use crate::geometry::Point;
use crate::report::{Entry, Tolerances, VerificationReport};
use crate::tracer::{rk4_step, CurveKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartOptions {
    /// Integration step of the transversal traces.
    pub step: f64,
    /// Largest allowed angle between `N` and `N(p0)` over the chart square.
    pub guard_angle: f64,
    /// Shrink factor applied to the radius while the guard fails.
    pub shrink: f64,
    /// Arclength offset for the directional derivatives of `f` and `g`.
    pub transport_offset: f64,
}

impl Default for ChartOptions {
    fn default() -> Self {
        Self {
            step: 1e-3,
            guard_angle: PI / 6.0,
            shrink: 0.8,
            transport_offset: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub center: Point,
    /// Rotation that makes the normal at the center point straight up.
    pub rotation: f64,
    pub radius: f64,
    pub grid_n: usize,
    pub step: f64,
    pub e1: Point,
    pub e2: Point,
    /// Grid points, `n * n`, row `j` along `e2`, column `i` along `e1`.
    pub points: Vec<Point>,
    pub s: Vec<f64>,
    pub f: Vec<f64>,
    pub t: Option<Vec<f64>>,
    pub g: Option<Vec<f64>>,
    pub residuals: Option<VerificationReport>,
}

/// Chart coordinates and densities at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartValue {
    pub s: f64,
    pub f: f64,
    pub t: Option<f64>,
    pub g: Option<f64>,
}

/// Just enough of a chart to evaluate coordinates at arbitrary points.
#[derive(Clone, Copy, Debug)]
struct Frame {
    center: Point,
    e1: Point,
    e2: Point,
    radius: f64,
    step: f64,
}

impl Frame {
    /// Follows the curve of `kind` from `q` to its transversal and returns
    /// the foot and the signed integral of the density rate on the way.
    fn to_transversal(&self, field: &FrameField, q: Point, kind: CurveKind) -> Result<(Point, f64)> {
        let axis = match kind {
            CurveKind::Seed => self.e2,
            CurveKind::Characteristic => self.e1,
        };
        let level = |p: Point| (p - self.center).dot(axis);
        let l0 = level(q);
        if l0 == 0.0 {
            return Ok((q, 0.0));
        }
        let h = -l0.signum() * self.step;
        let graph = field.is_graph();
        let rhs = |p: Point| -> Result<(Point, f64)> {
            match kind {
                CurveKind::Seed => Ok((field.normal(p)?, field.h(p)?)),
                CurveKind::Characteristic => {
                    let (n, d) = field.normal_and_d(p)?;
                    let rate = if graph {
                        field.rot_f(p)? / d.expect("graph mode")
                    } else {
                        0.0
                    };
                    Ok((n.rot_cw(), rate))
                }
            }
        };
        let max_steps = (8.0 * self.radius / self.step).ceil() as usize + 8;
        let (mut p, mut acc) = (q, 0.0);
        for _ in 0..max_steps {
            let (next, da) = rk4_step(&rhs, p, h)?;
            if level(next) * l0 <= 0.0 {
                // bisect the fraction of the step that lands on the line
                let (mut lo, mut hi) = (0.0, 1.0);
                let mut best = (next, da);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    let (pm, am) = rk4_step(&rhs, p, mid * h)?;
                    best = (pm, am);
                    let lm = level(pm);
                    if lm.abs() < 1e-15 {
                        break;
                    }
                    if lm * l0 > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Ok((best.0, acc + best.1));
            }
            p = next;
            acc += da;
            if p.dist(self.center) > 2.0 * self.radius {
                return Err(Error::TransversalMiss { q });
            }
        }
        Err(Error::TransversalMiss { q })
    }

    fn eval_s(&self, field: &FrameField, q: Point) -> Result<(f64, f64)> {
        let (foot, integral) = self.to_transversal(field, q, CurveKind::Seed)?;
        let sin = field.normal(foot)?.dot(self.e2);
        Ok((foot.dot(self.e1), integral.exp() / sin))
    }

    fn eval_t(&self, field: &FrameField, q: Point) -> Result<(f64, f64)> {
        let (foot, integral) = self.to_transversal(field, q, CurveKind::Characteristic)?;
        let (n, d) = field.normal_and_d(foot)?;
        let d = d.expect("graph mode");
        Ok((foot.dot(self.e2), integral.exp() / (d * n.dot(self.e2))))
    }

    fn eval(&self, field: &FrameField, q: Point) -> Result<ChartValue> {
        let (s, f) = self.eval_s(field, q)?;
        let (t, g) = if field.is_graph() {
            let (t, g) = self.eval_t(field, q)?;
            (Some(t), Some(g))
        } else {
            (None, None)
        };
        Ok(ChartValue { s, f, t, g })
    }
}

/// Builds the chart on an `n * n` grid over the square of half-width `r`
/// (in the chart frame) around `p0`. The radius is shrunk until the normal
/// stays within the guard angle of `N(p0)` over the square.
pub fn build_chart(
    field: &FrameField,
    p0: Point,
    r: f64,
    n: usize,
    opts: &ChartOptions,
) -> Result<Chart> {
    if n < 5 || !(r > 0.0) || !(opts.step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "chart needs n >= 5, r > 0 and step > 0 (got n {n}, r {r}, step {})",
            opts.step
        )));
    }
    let e2 = field.normal(p0)?;
    let e1 = e2.rot_cw();
    let rotation = PI / 2.0 - angle_of(e2);
    let min_cos = opts.guard_angle.cos();
    let mut radius = r;
    let mut shrinks = 0;
    loop {
        let probe = lattice(p0, e1, e2, radius, 21);
        let mut ok = true;
        for q in probe {
            if field.normal(q)?.dot(e2) < min_cos {
                ok = false;
                break;
            }
        }
        if ok {
            break;
        }
        shrinks += 1;
        if shrinks > 40 {
            return Err(Error::InvalidArgument(format!(
                "normal turns too fast near {p0} for any chart radius"
            )));
        }
        radius *= opts.shrink;
    }

    let frame = Frame {
        center: p0,
        e1,
        e2,
        radius,
        step: opts.step,
    };
    let points = lattice(p0, e1, e2, radius, n);
    let values: Vec<ChartValue> = points
        .par_iter()
        .map(|&q| frame.eval(field, q))
        .collect::<Result<_>>()?;
    let graph = field.is_graph();
    Ok(Chart {
        center: p0,
        rotation,
        radius,
        grid_n: n,
        step: opts.step,
        e1,
        e2,
        s: values.iter().map(|v| v.s).collect(),
        f: values.iter().map(|v| v.f).collect(),
        t: graph.then(|| values.iter().map(|v| v.t.expect("graph")).collect()),
        g: graph.then(|| values.iter().map(|v| v.g.expect("graph")).collect()),
        points,
        residuals: None,
    })
}

fn lattice(p0: Point, e1: Point, e2: Point, r: f64, n: usize) -> Vec<Point> {
    let c = |k: usize| -r + 2.0 * r * k as f64 / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            out.push(p0 + e1 * c(i) + e2 * c(j));
        }
    }
    out
}

/// Derivative along one grid axis: fourth order everywhere except the rim,
/// which gets second-order one-sided differences.
fn axis_derivative(v: &[f64], n: usize, h: f64, i: usize, j: usize, along_i: bool) -> f64 {
    let at = |k: usize| if along_i { v[j * n + k] } else { v[k * n + i] };
    let k = if along_i { i } else { j };
    if k >= 2 && k + 2 < n {
        (-at(k + 2) + 8.0 * at(k + 1) - 8.0 * at(k - 1) + at(k - 2)) / (12.0 * h)
    } else if k == 1 && n >= 5 {
        (-3.0 * at(0) - 10.0 * at(1) + 18.0 * at(2) - 6.0 * at(3) + at(4)) / (12.0 * h)
    } else if k + 2 == n && n >= 5 {
        (3.0 * at(k + 1) + 10.0 * at(k) - 18.0 * at(k - 1) + 6.0 * at(k - 2) - at(k - 3)) / (12.0 * h)
    } else if k == 0 {
        (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
    } else {
        (3.0 * at(k) - 4.0 * at(k - 1) + at(k - 2)) / (2.0 * h)
    }
}

impl Chart {
    fn frame(&self) -> Frame {
        Frame {
            center: self.center,
            e1: self.e1,
            e2: self.e2,
            radius: self.radius,
            step: self.step,
        }
    }

    pub fn grid_spacing(&self) -> f64 {
        2.0 * self.radius / (self.grid_n - 1) as f64
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.grid_n + i
    }

    /// Grid indices `(i, j)` at least `margin` away from the rim.
    pub fn inner_indices(&self, margin: usize) -> Vec<(usize, usize)> {
        let n = self.grid_n;
        let mut out = Vec::new();
        for j in margin..n.saturating_sub(margin) {
            for i in margin..n.saturating_sub(margin) {
                out.push((i, j));
            }
        }
        out
    }

    /// Cartesian gradient of a grid array.
    pub fn gradient(&self, v: &[f64], i: usize, j: usize) -> Point {
        let h = self.grid_spacing();
        let da = axis_derivative(v, self.grid_n, h, i, j, true);
        let db = axis_derivative(v, self.grid_n, h, i, j, false);
        self.e1 * da + self.e2 * db
    }

    /// Chart coordinates and densities at an arbitrary point of the chart
    /// ball, by the same traces that filled the grid.
    pub fn evaluate(&self, field: &FrameField, q: Point) -> Result<ChartValue> {
        self.frame().eval(field, q)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("finite chart data")
    }
}

/// Moves `q` along the curve of `kind` by signed arclength `ds` in one RK4
/// step.
fn shift(field: &FrameField, q: Point, kind: CurveKind, ds: f64) -> Result<Point> {
    let rhs = |p: Point| -> Result<(Point, f64)> { Ok((kind.velocity(field.normal(p)?), 0.0)) };
    Ok(rk4_step(&rhs, q, ds)?.0)
}

/// Residuals of the gradient identities, the transport equations for `f`
/// and `g`, the flat metric in chart coordinates, and the Jacobian.
/// Evaluation failures show up as failing entries.
pub fn chart_residuals(c: &Chart, field: &FrameField, tol: &Tolerances) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let inner = c.inner_indices(1);
    let frame = c.frame();
    let hd = ChartOptions::default().transport_offset;

    let per_point: Vec<[f64; 6]> = inner
        .par_iter()
        .map(|&(i, j)| {
            let k = c.index(i, j);
            let q = c.points[k];
            let go = || -> Result<[f64; 6]> {
                let fs = field.frame_at(q)?;
                let gs = c.gradient(&c.s, i, j);
                let grad_s = gs.dist(fs.nperp * c.f[k]);
                let fp = frame.eval_s(field, shift(field, q, CurveKind::Seed, hd)?)?.1;
                let fm = frame.eval_s(field, shift(field, q, CurveKind::Seed, -hd)?)?.1;
                let transport_f = (fp - fm) / (2.0 * hd) + c.f[k] * fs.h;
                let (mut grad_t, mut transport_g, mut metric, mut jac) = (0.0, 0.0, 0.0, 0.0);
                if let (Some(t), Some(g)) = (&c.t, &c.g) {
                    let d = fs.d.expect("graph mode");
                    let rot = fs.rot_f.expect("graph mode");
                    let gt = c.gradient(t, i, j);
                    grad_t = gt.dist(fs.n * (g[k] * d));
                    let gp = frame.eval_t(field, shift(field, q, CurveKind::Characteristic, hd)?)?.1;
                    let gm = frame.eval_t(field, shift(field, q, CurveKind::Characteristic, -hd)?)?.1;
                    transport_g = (gp - gm) / (2.0 * hd) + rot * g[k] / d;
                    let comp = |v: Point| (gs.dot(v) / c.f[k], gt.dot(v) / (g[k] * d));
                    let (an, bn) = comp(fs.n);
                    let (ap, bp) = comp(fs.nperp);
                    metric = (an * an + bn * bn - 1.0)
                        .abs()
                        .max((ap * ap + bp * bp - 1.0).abs())
                        .max((an * ap + bn * bp).abs());
                    let det = gs.cross(gt);
                    let expected = c.f[k] * g[k] * d;
                    jac = if det > 0.0 && expected > 0.0 {
                        (det - expected).abs() / expected
                    } else {
                        f64::NAN
                    };
                }
                Ok([grad_s, transport_f, grad_t, transport_g, metric, jac])
            };
            go().unwrap_or([f64::NAN; 6])
        })
        .collect();
    let column = |m: usize| per_point.iter().map(|r| r[m]).collect::<Vec<f64>>();
    let mut add = |check: &str, anchor: &str, m: usize| {
        rep.push(Entry::from_residuals(check, anchor, &column(m), tol.get(check)));
    };
    add("chart.grad_s", "grad s = f N_perp", 0);
    add("chart.transport_f", "N f + f H = 0", 1);
    if field.is_graph() {
        add("chart.grad_t", "grad t = g D N", 2);
        add("chart.transport_g", "N_perp g + g rot F / D = 0", 3);
        add("chart.metric", "ds^2/f^2 + dt^2/(g D)^2 = dx^2 + dy^2", 4);
        add("chart.jacobian", "det d(s,t)/d(x,y) = f g D > 0", 5);
    }
    rep.set_meta("field", &field.name);
    rep.set_meta("chart.center", c.center);
    rep.set_meta("chart.radius", c.radius);
    rep.set_meta("chart.grid_n", c.grid_n);
    rep
}

/// Residuals of `theta_s = -H / f`, of
/// `theta_t = rot F / (g D^2) - N_perp(log D) / (g D)`, and of the symmetry
/// of mixed partials of `(x, y)` as functions of `(s, t)`.
pub fn theta_derivative_checks(
    c: &Chart,
    field: &FrameField,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let (Some(t), Some(g)) = (&c.t, &c.g) else {
        return Err(Error::Mode(format!(
            "theta derivative checks need a graph-mode field; '{}' is direct",
            field.name
        )));
    };
    if !field.is_graph() {
        return Err(Error::Mode("chart and field modes differ".into()));
    }
    let n = c.grid_n;
    let theta0 = angle_of(c.e2);
    let mut theta = Vec::with_capacity(n * n);
    for &q in &c.points {
        let th = field.normal(q).map(angle_of).unwrap_or(f64::NAN);
        theta.push(th + 2.0 * PI * ((theta0 - th) / (2.0 * PI)).round());
    }

    // inverse Jacobian [x_s x_t; y_s y_t] at every grid point
    let mut xs = vec![0.0; n * n];
    let mut xt = vec![0.0; n * n];
    let mut ys = vec![0.0; n * n];
    let mut yt = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            let k = c.index(i, j);
            let gs = c.gradient(&c.s, i, j);
            let gt = c.gradient(t, i, j);
            let det = gs.cross(gt);
            xs[k] = gt.y / det;
            xt[k] = -gs.y / det;
            ys[k] = -gt.x / det;
            yt[k] = gs.x / det;
        }
    }

    let mut rs = Vec::new();
    let mut rt = Vec::new();
    for (i, j) in c.inner_indices(1) {
        let k = c.index(i, j);
        let q = c.points[k];
        let go = || -> Result<(f64, f64)> {
            let fs = field.frame_at(q)?;
            let d = fs.d.expect("graph mode");
            let rot = fs.rot_f.expect("graph mode");
            let gth = c.gradient(&theta, i, j);
            let th_s = gth.x * xs[k] + gth.y * ys[k];
            let th_t = gth.x * xt[k] + gth.y * yt[k];
            let h = field.fd_step_at(q);
            let dlog = (field.d(q + fs.nperp * h)?.ln() - field.d(q - fs.nperp * h)?.ln()) / (2.0 * h);
            Ok((
                th_s + fs.h / c.f[k],
                th_t - rot / (g[k] * d * d) + dlog / (g[k] * d),
            ))
        };
        let (a, b) = go().unwrap_or((f64::NAN, f64::NAN));
        rs.push(a);
        rt.push(b);
    }

    let mut mx = Vec::new();
    let mut my = Vec::new();
    // the stencils reach two nodes out, so stay clear of rim-contaminated values
    for (i, j) in c.inner_indices(3) {
        let k = c.index(i, j);
        // d/dt = x_t d/dx + y_t d/dy, and likewise for s
        let dt = Point::new(xt[k], yt[k]);
        let ds = Point::new(xs[k], ys[k]);
        mx.push(c.gradient(&xs, i, j).dot(dt) - c.gradient(&xt, i, j).dot(ds));
        my.push(c.gradient(&ys, i, j).dot(dt) - c.gradient(&yt, i, j).dot(ds));
    }

    let mut rep = VerificationReport::new();
    let mut add = |check: &str, anchor: &str, r: &[f64]| {
        rep.push(Entry::from_residuals(check, anchor, r, tol.get(check)));
    };
    add("theta.s", "theta_s = -H / f", &rs);
    add("theta.t", "theta_t = rot F / (g D^2) - N_perp(log D) / (g D)", &rt);
    add("theta.mixed_x", "x_st = x_ts", &mx);
    add("theta.mixed_y", "y_st = y_ts", &my);
    rep.set_meta("field", &field.name);
    Ok(rep)
}
