//! Built-in fields with closed-form ground truth.

use crate::error::{Error, Result};
use crate::fields::{FrameField, Scalar};
use crate::geometry::{Point, Rect};
use charflow_expr::{parse, BinOp, Dual2, Expr, Var};
use rand::Rng;
use std::sync::Arc;

pub type PointFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Point) -> Point + Send + Sync>;

/// Closed forms of the chart quantities around the entry's default center.
#[derive(Clone)]
pub struct ChartTruth {
    pub s: PointFn,
    pub f: PointFn,
    pub t: Option<PointFn>,
    pub g: Option<PointFn>,
}

#[derive(Clone)]
pub struct GroundTruth {
    pub h: PointFn,
    /// Unit tangent of the characteristic family member through a point, in
    /// the direction of travel.
    pub characteristic_tangent: VectorFn,
    /// Unit tangent of the seed family member through a point.
    pub seed_tangent: VectorFn,
    pub chart: Option<ChartTruth>,
    /// Whether `H` is Lipschitz on the whole validity domain.
    pub smooth: bool,
}

/// Where random start points are drawn from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleRegion {
    Box(Rect),
    Annulus { rmin: f64, rmax: f64 },
}

impl SampleRegion {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Point {
        match *self {
            SampleRegion::Box(b) => Point::new(
                rng.gen_range(b.xmin..=b.xmax),
                rng.gen_range(b.ymin..=b.ymax),
            ),
            SampleRegion::Annulus { rmin, rmax } => {
                let r = rng.gen_range(rmin..=rmax);
                let a = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                Point::polar(a) * r
            }
        }
    }
}

#[derive(Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub summary: &'static str,
    pub validity: &'static str,
    pub frame: FrameField,
    pub truth: GroundTruth,
    pub in_domain: Arc<dyn Fn(Point) -> bool + Send + Sync>,
    /// Default chart and funnel center.
    pub center: Point,
    pub chart_radius: f64,
    pub sample_region: SampleRegion,
    /// Traces stop when they leave this box.
    pub trace_box: Rect,
}

pub const NAMES: [&str; 4] = ["bilinear", "radial", "example32", "lipschitz_xy"];

/// Looks up an entry. `bilinear` also accepts a profile `bilinear(g)` with
/// `g` an expression in `y`.
pub fn get(name: &str) -> Result<CatalogEntry> {
    let name = name.trim();
    if let Some(inner) = name
        .strip_prefix("bilinear(")
        .and_then(|s| s.strip_suffix(')'))
    {
        let g = parse(inner).map_err(|e| Error::InvalidArgument(format!("bilinear profile: {e}")))?;
        if mentions_x(&g) {
            return Err(Error::InvalidArgument(
                "bilinear profile must depend on y only".into(),
            ));
        }
        return Ok(bilinear(g));
    }
    match name {
        "bilinear" => Ok(bilinear(Expr::num(0.0))),
        "radial" => Ok(radial()),
        "example32" => Ok(example32()),
        "lipschitz_xy" => Ok(lipschitz_xy()),
        _ => Err(Error::UnknownEntry(name.to_string())),
    }
}

/// All registered entries with their default parameters.
pub fn list() -> Vec<CatalogEntry> {
    NAMES.iter().map(|n| get(n).expect("registered")).collect()
}

fn mentions_x(e: &Expr) -> bool {
    match e {
        Expr::Var(Var::X) => true,
        Expr::Num(_) | Expr::Var(Var::Y) | Expr::Pi => false,
        Expr::Neg(a) => mentions_x(a),
        Expr::Binary(_, a, b) => mentions_x(a) || mentions_x(b),
        Expr::Call(_, args) => args.iter().any(mentions_x),
    }
}

fn heisenberg_f() -> (Expr, Expr) {
    (Expr::neg(Expr::y()), Expr::x())
}

fn bilinear(g: Expr) -> CatalogEntry {
    let is_default = g == Expr::num(0.0);
    let name = if is_default {
        "bilinear".to_string()
    } else {
        format!("bilinear({g})")
    };
    let u = if is_default {
        Expr::binary(BinOp::Mul, Expr::x(), Expr::y())
    } else {
        Expr::binary(
            BinOp::Add,
            Expr::binary(BinOp::Mul, Expr::x(), Expr::y()),
            g.clone(),
        )
    };
    let (f1, f2) = heisenberg_f();
    let frame = FrameField::graph(u, f1, f2).named(name.clone());
    let gp = g.clone();
    let d: PointFn = Arc::new(move |p: Point| {
        let dg = gp.eval_dual(0.0, p.y).map(|d| d.dy).unwrap_or(f64::NAN);
        (2.0 * p.x + dg).abs()
    });
    let dg = d.clone();
    CatalogEntry {
        name,
        summary: "u = xy + g(y), F = (-y, x); straight characteristics and seeds",
        validity: "x > 0",
        frame,
        truth: GroundTruth {
            h: Arc::new(|_| 0.0),
            characteristic_tangent: Arc::new(|_| Point::new(1.0, 0.0)),
            seed_tangent: Arc::new(|_| Point::new(0.0, 1.0)),
            chart: Some(ChartTruth {
                s: Arc::new(|p| p.x),
                f: Arc::new(|_| 1.0),
                t: Some(Arc::new(|p| p.y)),
                g: Some(Arc::new(move |p| 1.0 / dg(p))),
            }),
            smooth: true,
        },
        in_domain: Arc::new(|p| p.x > 0.0),
        center: Point::new(1.0, 0.5),
        chart_radius: 0.5,
        sample_region: SampleRegion::Box(Rect::new(0.5, 1.5, 0.0, 1.0)),
        trace_box: Rect::new(0.05, 3.0, -2.0, 2.0),
    }
}

fn radial() -> CatalogEntry {
    let theta = parse("atan2(y, x)").expect("static");
    CatalogEntry {
        name: "radial".into(),
        summary: "theta = polar angle; clockwise circular characteristics, radial seeds",
        validity: "0.2 <= r <= 5",
        frame: FrameField::direct(theta, None).named("radial"),
        truth: GroundTruth {
            h: Arc::new(|p| 1.0 / p.norm()),
            characteristic_tangent: Arc::new(|p| p.rot_cw() * (1.0 / p.norm())),
            seed_tangent: Arc::new(|p| p * (1.0 / p.norm())),
            // rays hit the transversal x = 1 at (1, y/x)
            chart: Some(ChartTruth {
                s: Arc::new(|p| -p.y / p.x),
                f: Arc::new(|p| p.norm() / (p.x * p.x)),
                t: None,
                g: None,
            }),
            smooth: true,
        },
        in_domain: Arc::new(|p| (0.2..=5.0).contains(&p.norm())),
        center: Point::new(1.0, 0.0),
        chart_radius: 0.3,
        sample_region: SampleRegion::Annulus {
            rmin: 0.5,
            rmax: 2.0,
        },
        trace_box: Rect::new(-3.5, 3.5, -3.5, 3.5),
    }
}

/// Which of the three quartic families a point belongs to. Points on a
/// seam go to the higher-numbered case.
pub fn example32_case(p: Point) -> u8 {
    let q = p.x.powi(4);
    if p.y > q {
        1
    } else if p.y > 0.0 {
        2
    } else {
        3
    }
}

/// Slope and line curvature of the family member through `p`.
fn example32_slope_curvature(p: Point) -> (f64, f64) {
    let (x, y) = (p.x, p.y);
    match example32_case(p) {
        1 => {
            let x2 = x * x;
            let x6 = x2 * x2 * x2;
            (4.0 * x * x2, 12.0 * x2 * (1.0 + 16.0 * x6).powf(-1.5))
        }
        2 => {
            // y = a x^4 with a = y / x^4
            let a = y / x.powi(4);
            let x2 = x * x;
            let x6 = x2 * x2 * x2;
            (
                4.0 * y / x,
                12.0 * a * x2 * (1.0 + 16.0 * a * a * x6).powf(-1.5),
            )
        }
        _ => (0.0, 0.0),
    }
}

/// Height of the family member through `through`, as a dual number in the
/// abscissa.
fn example32_member(through: Point, x: Dual2) -> Dual2 {
    let x4 = x.powi(4);
    match example32_case(through) {
        1 => x4 + (through.y - through.x.powi(4)),
        2 => x4 * (through.y / through.x.powi(4)),
        _ => Dual2::constant(through.y),
    }
}

fn example32() -> CatalogEntry {
    let theta = Scalar::builtin("example32 theta", |x, y| {
        let (slope, _) = example32_slope_curvature(Point::new(x, y));
        Ok(Dual2::constant(1f64.atan2(-slope)))
    });
    let h = Scalar::builtin("example32 H", |x, y| {
        let (_, k) = example32_slope_curvature(Point::new(x, y));
        Ok(Dual2::constant(-k))
    });
    CatalogEntry {
        name: "example32".into(),
        summary: "quartic characteristic families y = x^4 + c, y = a x^4, y = c; non-unique through the origin",
        validity: "whole plane",
        frame: FrameField::direct(theta, Some(h)).named("example32"),
        truth: GroundTruth {
            h: Arc::new(|p| {
                // closed forms evaluated independently of the frame's code path
                let (x, y) = (p.x, p.y);
                if y > x.powi(4) {
                    -12.0 * x * x * (1.0 + 16.0 * x.powi(6)).powf(-1.5)
                } else if y > 0.0 {
                    let a = y / x.powi(4);
                    -12.0 * a * x * x * (1.0 + 16.0 * a * a * x.powi(6)).powf(-1.5)
                } else {
                    0.0
                }
            }),
            characteristic_tangent: Arc::new(|p| {
                let d = example32_member(p, Dual2::var_x(p.x));
                let t = Point::new(1.0, d.dx);
                t * (1.0 / t.norm())
            }),
            seed_tangent: Arc::new(|p| {
                let d = example32_member(p, Dual2::var_x(p.x));
                let t = Point::new(-d.dx, 1.0);
                t * (1.0 / t.norm())
            }),
            chart: None,
            smooth: false,
        },
        in_domain: Arc::new(|_| true),
        center: Point::new(0.5, 0.5),
        chart_radius: 0.15,
        sample_region: SampleRegion::Box(Rect::new(-0.5, 0.5, 0.3, 0.7)),
        trace_box: Rect::new(-2.0, 2.0, -2.0, 2.0),
    }
}

fn lipschitz_xy() -> CatalogEntry {
    let u = Scalar::builtin("xy for y > 0, else 0", |x, y| {
        if y > 0.0 {
            Ok(Dual2::new(x * y, y, x))
        } else {
            Ok(Dual2::constant(0.0))
        }
    });
    let (f1, f2) = heisenberg_f();
    CatalogEntry {
        name: "lipschitz_xy".into(),
        summary: "u = xy above the x-axis, 0 below, F = (-y, x); seeds are C1 but not C2 across y = 0",
        validity: "x > 0",
        frame: FrameField::graph(u, f1, f2).named("lipschitz_xy"),
        truth: GroundTruth {
            h: Arc::new(|p| if p.y > 0.0 { 0.0 } else { 1.0 / p.norm() }),
            characteristic_tangent: Arc::new(|p| {
                if p.y > 0.0 {
                    Point::new(1.0, 0.0)
                } else {
                    p * (1.0 / p.norm())
                }
            }),
            seed_tangent: Arc::new(|p| {
                if p.y > 0.0 {
                    Point::new(0.0, 1.0)
                } else {
                    p.rot_ccw() * (1.0 / p.norm())
                }
            }),
            chart: None,
            smooth: false,
        },
        in_domain: Arc::new(|p| p.x > 0.0),
        center: Point::new(1.0, 0.5),
        chart_radius: 0.2,
        sample_region: SampleRegion::Box(Rect::new(0.5, 1.5, 0.1, 0.9)),
        trace_box: Rect::new(0.05, 3.0, -3.0, 3.0),
    }
}
