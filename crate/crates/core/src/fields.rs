//! The Legendrian frame `(theta, N, N_perp, D, H, rot F)` of a planar field.
//!
//! A [`FrameField`] is built either from a graph function `u` and a vector
//! field `F = (F1, F2)`, in which case `N = (grad u + F) / |grad u + F|`, or
//! directly from an angle field `theta` with `N = (cos theta, sin theta)`.
//! In both cases `N_perp = (N2, -N1)` and `H = div N`.

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};
use charflow_expr::{Dual2, EvalError, Expr, FieldDefinition};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub type BuiltinFn = Arc<dyn Fn(f64, f64) -> Result<Dual2, EvalError> + Send + Sync>;

/// A scalar function of the plane: a parsed expression or a Rust closure
/// returning value and gradient.
#[derive(Clone)]
pub enum Scalar {
    Expr(Expr),
    Builtin { label: String, f: BuiltinFn },
}

impl Scalar {
    pub fn builtin(
        label: impl Into<String>,
        f: impl Fn(f64, f64) -> Result<Dual2, EvalError> + Send + Sync + 'static,
    ) -> Self {
        Scalar::Builtin {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    /// Parses `src` as an expression.
    pub fn parse(src: &str) -> Result<Self, charflow_expr::SyntaxError> {
        charflow_expr::parse(src).map(Scalar::Expr)
    }

    pub fn value(&self, p: Point) -> Result<f64> {
        let r = match self {
            Scalar::Expr(e) => e.eval(p.x, p.y),
            Scalar::Builtin { f, .. } => f(p.x, p.y).map(|d| d.value),
        };
        r.map_err(|source| Error::Domain { p, source })
    }

    pub fn dual(&self, p: Point) -> Result<Dual2> {
        let r = match self {
            Scalar::Expr(e) => e.eval_dual(p.x, p.y),
            Scalar::Builtin { f, .. } => f(p.x, p.y),
        };
        r.map_err(|source| Error::Domain { p, source })
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Expr(e) => write!(f, "{e}"),
            Scalar::Builtin { label, .. } => write!(f, "<{label}>"),
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({self})")
    }
}

impl From<Expr> for Scalar {
    fn from(e: Expr) -> Self {
        Scalar::Expr(e)
    }
}

#[derive(Clone, Debug)]
pub enum Mode {
    Graph { u: Scalar, f1: Scalar, f2: Scalar },
    Direct { theta: Scalar, h: Option<Scalar> },
}

pub const DEFAULT_SINGULAR_THRESHOLD: f64 = 1e-8;
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct FrameField {
    pub name: String,
    pub mode: Mode,
    /// Graph mode: points with `D` below this are singular.
    pub singular_threshold: f64,
    /// Base step for differencing `N`; scaled by `max(1, |p|)`.
    pub fd_step: f64,
}

/// Everything the frame knows at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameSample {
    pub p: Point,
    /// Angle of `N` in `(-pi, pi]`.
    pub theta: f64,
    pub n: Point,
    pub nperp: Point,
    /// `|grad u + F|`; graph mode only.
    pub d: Option<f64>,
    pub h: f64,
    /// `(F2)_x - (F1)_y`; graph mode only.
    pub rot_f: Option<f64>,
}

/// Angle of `v` folded into `(-pi, pi]`.
pub fn angle_of(v: Point) -> f64 {
    let a = v.y.atan2(v.x);
    if a <= -PI {
        PI
    } else {
        a
    }
}

impl FrameField {
    pub fn graph(u: impl Into<Scalar>, f1: impl Into<Scalar>, f2: impl Into<Scalar>) -> Self {
        Self::with_mode(
            "graph",
            Mode::Graph {
                u: u.into(),
                f1: f1.into(),
                f2: f2.into(),
            },
        )
    }

    pub fn direct(theta: impl Into<Scalar>, h: Option<Scalar>) -> Self {
        Self::with_mode(
            "direct",
            Mode::Direct {
                theta: theta.into(),
                h,
            },
        )
    }

    fn with_mode(name: &str, mode: Mode) -> Self {
        Self {
            name: name.to_string(),
            mode,
            singular_threshold: DEFAULT_SINGULAR_THRESHOLD,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    pub fn from_definition(def: FieldDefinition) -> Self {
        match def {
            FieldDefinition::Graph { u, f1, f2 } => Self::graph(u, f1, f2),
            FieldDefinition::Direct { theta, h } => Self::direct(theta, h.map(Scalar::Expr)),
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn is_graph(&self) -> bool {
        matches!(self.mode, Mode::Graph { .. })
    }

    fn require_graph(&self, what: &str) -> Result<(&Scalar, &Scalar, &Scalar)> {
        match &self.mode {
            Mode::Graph { u, f1, f2 } => Ok((u, f1, f2)),
            Mode::Direct { .. } => Err(Error::Mode(format!(
                "{what} needs a graph-mode field (u, F); '{}' is direct",
                self.name
            ))),
        }
    }

    /// `grad u + F` in graph mode.
    fn horizontal_gradient(&self, p: Point) -> Result<Point> {
        let (u, f1, f2) = self.require_graph("grad u + F")?;
        let du = u.dual(p)?;
        Ok(Point::new(du.dx + f1.value(p)?, du.dy + f2.value(p)?))
    }

    /// Unit normal `N` and, in graph mode, `D`.
    pub fn normal_and_d(&self, p: Point) -> Result<(Point, Option<f64>)> {
        match &self.mode {
            Mode::Graph { .. } => {
                let g = self.horizontal_gradient(p)?;
                let d = g.norm();
                if !(d >= self.singular_threshold) {
                    return Err(Error::SingularPoint { p, d });
                }
                Ok((g * (1.0 / d), Some(d)))
            }
            Mode::Direct { theta, .. } => Ok((Point::polar(theta.value(p)?), None)),
        }
    }

    pub fn normal(&self, p: Point) -> Result<Point> {
        self.normal_and_d(p).map(|(n, _)| n)
    }

    /// `N_perp`, the characteristic direction.
    pub fn nperp(&self, p: Point) -> Result<Point> {
        self.normal(p).map(Point::rot_cw)
    }

    pub fn d(&self, p: Point) -> Result<f64> {
        self.require_graph("D")?;
        let (_, d) = self.normal_and_d(p)?;
        Ok(d.expect("graph mode"))
    }

    pub fn rot_f(&self, p: Point) -> Result<f64> {
        let (_, f1, f2) = self.require_graph("rot F")?;
        Ok(f2.dual(p)?.dx - f1.dual(p)?.dy)
    }

    /// The differencing step used at `p`.
    pub fn fd_step_at(&self, p: Point) -> f64 {
        self.fd_step * p.norm().max(1.0)
    }

    /// `H` from the supplied expression if any, else by central differences
    /// of the components of `N`.
    pub fn h(&self, p: Point) -> Result<f64> {
        if let Mode::Direct { h: Some(h), .. } = &self.mode {
            return h.value(p);
        }
        self.h_differenced(p, self.fd_step_at(p))
    }

    /// `d/dx N1 + d/dy N2` by central differences with step `step`.
    pub fn h_differenced(&self, p: Point, step: f64) -> Result<f64> {
        let ex = Point::new(step, 0.0);
        let ey = Point::new(0.0, step);
        let dn1 = self.normal(p + ex)?.x - self.normal(p - ex)?.x;
        let dn2 = self.normal(p + ey)?.y - self.normal(p - ey)?.y;
        Ok((dn1 + dn2) / (2.0 * step))
    }

    pub fn frame_at(&self, p: Point) -> Result<FrameSample> {
        let (n, d) = self.normal_and_d(p)?;
        let rot_f = if self.is_graph() {
            Some(self.rot_f(p)?)
        } else {
            None
        };
        Ok(FrameSample {
            p,
            theta: angle_of(n),
            n,
            nperp: n.rot_cw(),
            d,
            h: self.h(p)?,
            rot_f,
        })
    }

    /// Grid points of an `n * n` lattice over `bbox` where `D` falls below
    /// the threshold. Sampling only: an empty result certifies nothing.
    pub fn scan_singular(&self, bbox: &Rect, n: usize) -> Result<Vec<Point>> {
        self.require_graph("scan_singular")?;
        let mut out = Vec::new();
        for p in bbox.grid(n) {
            let d = self.horizontal_gradient(p)?.norm();
            if !(d >= self.singular_threshold) {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// A direct-mode field with the same `N` as this one; `H` is left to
    /// differencing.
    pub fn as_direct(&self) -> FrameField {
        let inner = self.clone();
        let theta = Scalar::builtin(format!("theta of {}", self.name), move |x, y| {
            let p = Point::new(x, y);
            let n = inner.normal(p).map_err(|e| match e {
                Error::Domain { source, .. } => source,
                _ => EvalError::NonFinite { op: "frame" },
            })?;
            Ok(Dual2::constant(angle_of(n)))
        });
        FrameField {
            name: format!("{} (direct)", self.name),
            mode: Mode::Direct { theta, h: None },
            singular_threshold: self.singular_threshold,
            fd_step: self.fd_step,
        }
    }
}
