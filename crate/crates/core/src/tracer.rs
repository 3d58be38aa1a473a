//! Characteristic and seed curves by fixed-step fourth-order Runge-Kutta.

use crate::error::{Error, Result};
use crate::fields::FrameField;
use crate::geometry::{Point, Rect};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{BufRead, Write};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    /// Integral curve of `N_perp`.
    Characteristic,
    /// Integral curve of `N`.
    Seed,
}

impl CurveKind {
    /// Velocity of the curve given the unit normal at a point.
    pub fn velocity(self, n: Point) -> Point {
        match self {
            CurveKind::Characteristic => n.rot_cw(),
            CurveKind::Seed => n,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExitEvent {
    Completed,
    LeftBox,
    Singular,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Signed arclength from the start.
    pub sigma: f64,
    pub p: Point,
    /// Angle of `N`, unwrapped along the curve.
    pub theta: f64,
    pub h: f64,
    pub kappa: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub kind: CurveKind,
    pub start: Point,
    pub samples: Vec<Sample>,
    pub exit: ExitEvent,
}

/// One classical RK4 step for `p' = v(p)` together with a scalar
/// accumulator `a' = rate(p)`.
pub(crate) fn rk4_step<F>(rhs: &F, p: Point, h: f64) -> Result<(Point, f64)>
where
    F: Fn(Point) -> Result<(Point, f64)> + ?Sized,
{
    let (k1, a1) = rhs(p)?;
    let (k2, a2) = rhs(p + k1 * (0.5 * h))?;
    let (k3, a3) = rhs(p + k2 * (0.5 * h))?;
    let (k4, a4) = rhs(p + k3 * h)?;
    let dp = (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
    Ok((p + dp, (a1 + 2.0 * (a2 + a3) + a4) * (h / 6.0)))
}

/// Number of uniform steps no longer than `step` covering `|length|`.
pub(crate) fn step_count(length: f64, step: f64) -> usize {
    ((length.abs() / step) - 1e-9).ceil().max(1.0) as usize
}

fn unwrap_near(theta: f64, reference: f64) -> f64 {
    theta + 2.0 * PI * ((reference - theta) / (2.0 * PI)).round()
}

fn stage_error(e: Error, step: f64) -> Error {
    match e {
        Error::Domain { p, .. } => Error::StepTooLarge { p, step },
        other => other,
    }
}

/// Traces the curve of `kind` through `p0` over signed arclength `length`
/// (negative runs against the direction field) with steps no longer than
/// `step`. Stops early on leaving `bbox` or reaching a singular point.
pub fn trace(
    field: &FrameField,
    p0: Point,
    kind: CurveKind,
    length: f64,
    step: f64,
    bbox: &Rect,
) -> Result<Curve> {
    if !(step > 0.0) || !length.is_finite() || length == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "trace needs step > 0 and nonzero finite length (got step {step}, length {length})"
        )));
    }
    if !bbox.contains(p0) {
        return Err(Error::InvalidArgument(format!("start {p0} outside box {bbox}")));
    }
    let first = field.frame_at(p0)?;
    let n = step_count(length, step);
    let h = length / n as f64;
    let rhs = |p: Point| -> Result<(Point, f64)> { Ok((kind.velocity(field.normal(p)?), 0.0)) };

    let mut samples = vec![Sample {
        sigma: 0.0,
        p: p0,
        theta: first.theta,
        h: first.h,
        kappa: None,
    }];
    let mut exit = ExitEvent::Completed;
    let mut p = p0;
    for i in 0..n {
        let (mut q, mut frac) = match rk4_step(&rhs, p, h) {
            Ok((q, _)) => (q, 1.0),
            Err(Error::SingularPoint { .. }) => {
                exit = ExitEvent::Singular;
                break;
            }
            Err(e) => return Err(stage_error(e, h)),
        };
        let left = !bbox.contains(q);
        if left {
            exit = ExitEvent::LeftBox;
            match land_on_box(&rhs, p, h, bbox) {
                Some((qb, fb)) => {
                    q = qb;
                    frac = fb;
                }
                None => break,
            }
            if frac * h.abs() < 1e-12 {
                break;
            }
        }
        let s = match field.frame_at(q) {
            Ok(s) => s,
            Err(Error::SingularPoint { .. }) => {
                exit = ExitEvent::Singular;
                break;
            }
            Err(e) => return Err(stage_error(e, h)),
        };
        let prev = samples.last().expect("nonempty").theta;
        samples.push(Sample {
            sigma: (i as f64 + frac) * h,
            p: q,
            theta: unwrap_near(s.theta, prev),
            h: s.h,
            kappa: None,
        });
        p = q;
        if left {
            break;
        }
    }
    let mut curve = Curve {
        kind,
        start: p0,
        samples,
        exit,
    };
    curve.fill_curvature();
    Ok(curve)
}

/// Bisects the fraction of the step at which the trace crosses the box
/// boundary; returns the last inside point and its fraction.
fn land_on_box<F>(rhs: &F, p: Point, h: f64, bbox: &Rect) -> Option<(Point, f64)>
where
    F: Fn(Point) -> Result<(Point, f64)>,
{
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best = (p, 0.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let q = rk4_step(rhs, p, mid * h).ok()?.0;
        if bbox.contains(q) {
            lo = mid;
            best = (q, mid);
            if bbox.inner_distance(q) < 1e-10 {
                break;
            }
        } else {
            hi = mid;
        }
    }
    Some(best)
}

/// Derivative at node `at` of the quadratic through three samples.
pub(crate) fn lagrange3_derivative(s: [f64; 3], f: [f64; 3], at: usize) -> f64 {
    let x = s[at];
    let mut d = 0.0;
    for j in 0..3 {
        let (a, b) = match j {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let denom = (s[j] - s[a]) * (s[j] - s[b]);
        d += f[j] * ((x - s[a]) + (x - s[b])) / denom;
    }
    d
}

/// `d theta / d sigma` at every sample: three-point differences, central in
/// the interior and one-sided at the two ends.
pub fn curvature_profile(c: &Curve) -> Result<Vec<(f64, f64)>> {
    let n = c.samples.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    let sig: Vec<f64> = c.samples.iter().map(|s| s.sigma).collect();
    let th: Vec<f64> = c.samples.iter().map(|s| s.theta).collect();
    let window = |k: usize| ([sig[k], sig[k + 1], sig[k + 2]], [th[k], th[k + 1], th[k + 2]]);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (k, at) = if i == 0 {
            (0, 0)
        } else if i == n - 1 {
            (n - 3, 2)
        } else {
            (i - 1, 1)
        };
        let (s, f) = window(k);
        out.push((sig[i], lagrange3_derivative(s, f, at)));
    }
    Ok(out)
}

impl Curve {
    /// Sets `kappa` on every sample when there are at least three.
    pub fn fill_curvature(&mut self) {
        if let Ok(profile) = curvature_profile(self) {
            for (s, (_, k)) in self.samples.iter_mut().zip(profile) {
                s.kappa = Some(k);
            }
        }
    }

    pub fn points(&self) -> Vec<Point> {
        self.samples.iter().map(|s| s.p).collect()
    }

    pub fn end(&self) -> Point {
        self.samples.last().expect("curves have a start sample").p
    }

    /// Distance from `q` to the polyline through the samples.
    pub fn distance_to(&self, q: Point) -> f64 {
        polyline_distance(&self.points(), q)
    }

    /// Writes `sigma,x,y,theta,H,kappa` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "sigma,x,y,theta,H,kappa")?;
        for s in &self.samples {
            let kappa = s.kappa.map(fmt17).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt17(s.sigma),
                fmt17(s.p.x),
                fmt17(s.p.y),
                fmt17(s.theta),
                fmt17(s.h),
                kappa
            )?;
        }
        Ok(())
    }

    /// Reads the CSV written by [`Curve::write_csv`]. Kind and exit event are
    /// not part of the format and must be supplied.
    pub fn read_csv<R: BufRead>(r: R, kind: CurveKind) -> std::io::Result<Curve> {
        let bad = |m: String| std::io::Error::new(std::io::ErrorKind::InvalidData, m);
        let mut lines = r.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        if header.trim() != "sigma,x,y,theta,H,kappa" {
            return Err(bad(format!("unexpected header '{header}'")));
        }
        let mut samples = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 6 {
                return Err(bad(format!("row {}: expected 6 columns", i + 2)));
            }
            let num = |c: &str| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("row {}: {e}", i + 2)))
            };
            samples.push(Sample {
                sigma: num(cols[0])?,
                p: Point::new(num(cols[1])?, num(cols[2])?),
                theta: num(cols[3])?,
                h: num(cols[4])?,
                kappa: if cols[5].trim().is_empty() {
                    None
                } else {
                    Some(num(cols[5])?)
                },
            });
        }
        let start = samples
            .first()
            .map(|s| s.p)
            .ok_or_else(|| bad("no samples".into()))?;
        Ok(Curve {
            kind,
            start,
            samples,
            exit: ExitEvent::Completed,
        })
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn segment_distance(a: Point, b: Point, q: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return q.dist(a);
    }
    let t = ((q - a).dot(ab) / len2).clamp(0.0, 1.0);
    q.dist(a + ab * t)
}

pub fn polyline_distance(pts: &[Point], q: Point) -> f64 {
    match pts.len() {
        0 => f64::INFINITY,
        1 => q.dist(pts[0]),
        _ => pts
            .windows(2)
            .map(|w| segment_distance(w[0], w[1], q))
            .fold(f64::INFINITY, f64::min),
    }
}
