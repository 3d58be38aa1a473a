//! Named verification suites. Each runs one family of checks on a target
//! field and returns a [`VerificationReport`].

use crate::catalog::{CatalogEntry, GroundTruth, SampleRegion};
use crate::charts::{build_chart, chart_residuals, theta_derivative_checks, Chart, ChartOptions};
use crate::error::{Error, Result};
use crate::fields::FrameField;
use crate::flux::{flux_dnperp, flux_n, PolygonDomain};
use crate::funnel::{funnel, FunnelOptions};
use crate::geometry::{Point, Rect};
use crate::picard::picard_characteristic;
use crate::report::{merge, Entry, Tolerances, VerificationReport};
use crate::tracer::{polyline_distance, trace, Curve, CurveKind};
use crate::variational::{euler_lagrange_residual, minimize_lh, GraphCurve};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const SUITES: [&str; 6] = ["theorem-a", "charts", "theta-t", "flux", "funnel", "all"];

/// A field together with the places to probe it.
#[derive(Clone)]
pub struct Target {
    pub frame: FrameField,
    pub center: Point,
    pub chart_radius: f64,
    pub sample_region: SampleRegion,
    pub trace_box: Rect,
    /// Closed forms, when known. Chart closed forms only apply at `center`.
    pub truth: Option<GroundTruth>,
}

impl From<CatalogEntry> for Target {
    fn from(e: CatalogEntry) -> Self {
        Self {
            frame: e.frame,
            center: e.center,
            chart_radius: e.chart_radius,
            sample_region: e.sample_region,
            trace_box: e.trace_box,
            truth: Some(e.truth),
        }
    }
}

impl Target {
    /// A target without ground truth: starts are drawn from the square of
    /// half-width `radius` around `center`, and traces stop four radii out.
    pub fn custom(frame: FrameField, center: Point, radius: f64) -> Self {
        Self {
            frame,
            center,
            chart_radius: radius,
            sample_region: SampleRegion::Box(Rect::around(center, radius)),
            trace_box: Rect::around(center, 4.0 * radius),
            truth: None,
        }
    }

    fn smooth(&self) -> bool {
        self.truth.as_ref().is_none_or(|t| t.smooth)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Random start points for the curvature checks.
    pub starts: usize,
    /// Coarsest trace step; the curvature study also runs at half and a
    /// quarter of it.
    pub step: f64,
    pub trace_length: f64,
    /// Chart grid sizes. Entries come from the last one; with three or more
    /// sizes a convergence order is attached.
    pub chart_grids: Vec<usize>,
    pub refinement: usize,
    pub variational_nodes: usize,
    pub funnel_delta: f64,
    pub funnel_branches: usize,
    pub tolerances: Tolerances,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: 20,
            step: 1e-3,
            trace_length: 1.0,
            chart_grids: vec![41],
            refinement: 64,
            variational_nodes: 401,
            funnel_delta: 1e-6,
            funnel_branches: 5,
            tolerances: Tolerances::default(),
        }
    }
}

impl SuiteConfig {
    fn describe(&self, rep: &mut VerificationReport, t: &Target) {
        rep.set_meta("field", &t.frame.name);
        rep.set_meta("seed", self.seed);
        rep.set_meta("step", self.step);
        rep.set_meta("starts", self.starts);
        rep.set_meta("trace_length", self.trace_length);
        rep.set_meta(
            "chart_grids",
            self.chart_grids.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
        );
        rep.set_meta("refinement", self.refinement);
        rep.set_meta("variational_nodes", self.variational_nodes);
        rep.set_meta("funnel_delta", self.funnel_delta);
        rep.set_meta("center", t.center);
    }
}

/// Runs the named suite (`all` merges every other one).
pub fn run(name: &str, target: &Target, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let mut rep = match name {
        "theorem-a" => theorem_a(target, cfg)?,
        "charts" => charts(target, cfg)?,
        "theta-t" => theta_t(target, cfg)?,
        "flux" => flux(target, cfg)?,
        "funnel" => funnel_growth(target, cfg)?,
        "all" => {
            let chart = chart_study(target, cfg)?;
            merge(&[
                theorem_a(target, cfg)?,
                chart_report(target, cfg, &chart),
                theta_report(target, cfg, chart.last())?,
                flux(target, cfg)?,
                funnel_growth(target, cfg)?,
            ])
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown suite '{other}' (expected one of {})",
                SUITES.join(", ")
            )))
        }
    };
    rep.set_meta("suite", name);
    cfg.describe(&mut rep, target);
    Ok(rep)
}

fn starts(target: &Target, cfg: &SuiteConfig) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.starts).map(|_| target.sample_region.sample(&mut rng)).collect()
}

fn trace_all(target: &Target, pts: &[Point], kind: CurveKind, length: f64, step: f64) -> Result<Vec<Curve>> {
    pts.par_iter()
        .map(|&p| trace(&target.frame, p, kind, length, step, &target.trace_box))
        .collect()
}

fn interior_kappa<'a>(c: &'a Curve) -> impl Iterator<Item = &'a crate::tracer::Sample> {
    let n = c.samples.len();
    c.samples.iter().skip(1).take(n.saturating_sub(2))
}

/// Curvature law along characteristics, unit speed, reversibility, closed
/// forms, and the Picard and variational routes to the same curves.
pub fn theorem_a(target: &Target, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let tol = &cfg.tolerances;
    let pts = starts(target, cfg);
    let mut rep = VerificationReport::new();

    let steps = [cfg.step, cfg.step / 2.0, cfg.step / 4.0];
    let mut maxima = Vec::new();
    let mut finest = Vec::new();
    let mut closed = Vec::new();
    for (level, &h) in steps.iter().enumerate() {
        let curves = trace_all(target, &pts, CurveKind::Characteristic, cfg.trace_length, h)?;
        let mut res = Vec::new();
        let mut res_truth = Vec::new();
        for c in &curves {
            for s in interior_kappa(c) {
                let k = s.kappa.unwrap_or(f64::NAN);
                res.push(k + s.h);
                if let Some(t) = &target.truth {
                    res_truth.push(k + (t.h)(s.p));
                }
            }
        }
        maxima.push(res.iter().fold(0.0f64, |m, r| m.max(r.abs())));
        if level == 0 {
            finest = res;
            closed = res_truth;
            let mut speed = Vec::new();
            for c in &curves {
                for w in c.samples.windows(2) {
                    speed.push(w[1].p.dist(w[0].p) / (w[1].sigma - w[0].sigma) - 1.0);
                }
            }
            rep.push(Entry::from_residuals(
                "tracer.unit_speed",
                "|dx/dsigma| = 1",
                &speed,
                tol.get("tracer.unit_speed"),
            ));
            if target.smooth() {
                let back: Vec<f64> = curves
                    .par_iter()
                    .map(|c| {
                        let len = c.samples.last().map_or(0.0, |s| s.sigma);
                        trace(&target.frame, c.end(), CurveKind::Characteristic, -len, h, &target.trace_box)
                            .map(|b| b.end().dist(c.start))
                            .unwrap_or(f64::NAN)
                    })
                    .collect();
                rep.push(Entry::from_residuals(
                    "tracer.reversibility",
                    "trace(L) then trace(-L) returns to the start",
                    &back,
                    tol.get("tracer.reversibility"),
                ));
            }
        }
    }
    rep.push(
        Entry::from_residuals(
            "theorem_a.curvature",
            "d theta / d sigma = -H",
            &finest,
            tol.get("theorem_a.curvature"),
        )
        .with_order(&steps, &maxima),
    );
    if let Some(t) = &target.truth {
        rep.push(Entry::from_residuals(
            "theorem_a.closed_form",
            "kappa = -H with H in closed form",
            &closed,
            tol.get("theorem_a.closed_form"),
        ));
        let mut tangency = Vec::new();
        for &p in &pts {
            let n = target.frame.normal(p)?;
            tangency.push(n.rot_cw().dist((t.characteristic_tangent)(p)));
            tangency.push(n.dist((t.seed_tangent)(p)));
        }
        rep.push(Entry::from_residuals(
            "catalog.tangency",
            "N_perp and N match the closed-form curve families",
            &tangency,
            tol.get("catalog.tangency"),
        ));
    }

    rep.push(picard_agreement(target, cfg)?);
    if target.smooth() {
        rep.entries.extend(variational_agreement(target, cfg)?);
    } else {
        rep.set_meta("skipped.variational", "H is not Lipschitz on this field");
    }
    Ok(rep)
}

fn picard_agreement(target: &Target, cfg: &SuiteConfig) -> Result<Entry> {
    let check = "picard.rk_agreement";
    let mut span = target.chart_radius;
    let mut attempt = 0;
    let pic = loop {
        match picard_characteristic(&target.frame, target.center, (0.0, span), 2001, 200) {
            Err(Error::SlopeBlowup { .. }) if attempt < 8 => {
                span /= 2.0;
                attempt += 1;
            }
            other => break other?,
        }
    };
    let len = pic.curve.samples.last().map_or(0.0, |s| s.sigma);
    let rk = trace(
        &target.frame,
        target.center,
        CurveKind::Characteristic,
        len + 10.0 * cfg.step,
        cfg.step / 10.0,
        &target.trace_box,
    )?;
    let poly = rk.points();
    let res: Vec<f64> = pic.curve.points().iter().map(|&q| polyline_distance(&poly, q)).collect();
    Ok(Entry::from_residuals(
        check,
        "integral-equation solution = RK characteristic",
        &res,
        cfg.tolerances.get(check),
    ))
}

/// Minimizes the functional over graphs in the frame `e1 = N_perp(center)`,
/// `e2 = N(center)`, with endpoints on the traced characteristic.
fn variational_agreement(target: &Target, cfg: &SuiteConfig) -> Result<Vec<Entry>> {
    let field = &target.frame;
    let p0 = target.center;
    let e2 = field.normal(p0)?;
    let e1 = e2.rot_cw();
    let len = target.chart_radius;
    let tr = trace(field, p0, CurveKind::Characteristic, len, cfg.step, &target.trace_box)?;
    let end = tr.end() - p0;
    let (x1, y1) = (end.dot(e1), end.dot(e2));
    let to_global = |q: Point| p0 + e1 * q.x + e2 * q.y;
    let h_local = |q: Point| field.h(to_global(q));
    let c0 = GraphCurve::from_fn(0.0, x1, cfg.variational_nodes, |x| y1 * x / x1).with_baseline(y1.min(0.0) - len);
    let m = minimize_lh(&c0, h_local, 1e-10, 200)?;
    let el = euler_lagrange_residual(&m.curve, h_local)?;
    let poly = tr.points();
    let gap: Vec<f64> = m
        .curve
        .points()
        .iter()
        .map(|&q| polyline_distance(&poly, to_global(q)))
        .collect();
    let tol = &cfg.tolerances;
    Ok(vec![
        Entry::from_residuals(
            "variational.el_residual",
            "(y' / sqrt(1 + y'^2))' + H = 0 at the minimizer",
            &el,
            tol.get("variational.el_residual"),
        ),
        Entry::from_residuals(
            "variational.rk_agreement",
            "minimizer of |G| - int H = RK characteristic",
            &gap,
            tol.get("variational.rk_agreement"),
        ),
    ])
}

fn chart_study(target: &Target, cfg: &SuiteConfig) -> Result<Vec<Chart>> {
    if cfg.chart_grids.is_empty() {
        return Err(Error::InvalidArgument("no chart grid sizes given".into()));
    }
    cfg.chart_grids
        .iter()
        .map(|&n| build_chart(&target.frame, target.center, target.chart_radius, n, &ChartOptions::default()))
        .collect()
}

fn chart_report(target: &Target, cfg: &SuiteConfig, charts: &[Chart]) -> VerificationReport {
    let tol = &cfg.tolerances;
    let reports: Vec<VerificationReport> = charts.iter().map(|c| chart_residuals(c, &target.frame, tol)).collect();
    let last = charts.last().expect("at least one grid");
    let mut rep = reports.last().expect("at least one grid").clone();
    if reports.len() >= 3 {
        let spacings: Vec<f64> = charts.iter().map(Chart::grid_spacing).collect();
        for e in &mut rep.entries {
            let errors: Vec<f64> = reports
                .iter()
                .map(|r| r.entry(&e.check).map_or(f64::NAN, |x| x.max_residual))
                .collect();
            *e = e.clone().with_order(&spacings, &errors);
        }
    }
    if let Some(truth) = target.truth.as_ref().and_then(|t| t.chart.as_ref()) {
        let mut add = |check: &str, anchor: &str, ours: &[f64], exact: &dyn Fn(Point) -> f64| {
            let res: Vec<f64> = last.points.iter().zip(ours).map(|(&q, v)| v - exact(q)).collect();
            rep.push(Entry::from_residuals(check, anchor, &res, tol.get(check)));
        };
        add("chart.s_closed_form", "s in closed form", &last.s, &*truth.s);
        add("chart.f_closed_form", "f in closed form", &last.f, &*truth.f);
        if let (Some(t), Some(tt)) = (&last.t, &truth.t) {
            add("chart.t_closed_form", "t in closed form", t, &**tt);
        }
        if let (Some(g), Some(gt)) = (&last.g, &truth.g) {
            add("chart.g_closed_form", "g in closed form", g, &**gt);
        }
    }
    if !target.frame.is_graph() {
        rep.set_meta("skipped.chart_t", "direct-mode field has no t, g chart");
    }
    rep
}

/// Gradient identities and transport equations of the chart at the
/// target's center.
pub fn charts(target: &Target, cfg: &SuiteConfig) -> Result<VerificationReport> {
    Ok(chart_report(target, cfg, &chart_study(target, cfg)?))
}

fn theta_report(target: &Target, cfg: &SuiteConfig, chart: Option<&Chart>) -> Result<VerificationReport> {
    if !target.frame.is_graph() {
        let mut rep = VerificationReport::new();
        rep.set_meta("skipped.theta", "direct-mode field has no t, g chart");
        return Ok(rep);
    }
    let chart = match chart {
        Some(c) => c.clone(),
        None => chart_study(target, cfg)?.pop().expect("at least one grid"),
    };
    theta_derivative_checks(&chart, &target.frame, &cfg.tolerances)
}

/// Derivatives of `theta` in chart coordinates and symmetry of mixed
/// partials. Direct-mode fields are skipped and noted in the metadata.
pub fn theta_t(target: &Target, cfg: &SuiteConfig) -> Result<VerificationReport> {
    if !target.frame.is_graph() {
        return theta_report(target, cfg, None);
    }
    let n = *cfg.chart_grids.last().ok_or_else(|| Error::InvalidArgument("no chart grid sizes given".into()))?;
    let chart = build_chart(&target.frame, target.center, target.chart_radius, n, &ChartOptions::default())?;
    theta_report(target, cfg, Some(&chart))
}

/// The square of half-width `r` around `c`, its left and right halves, and
/// a notched hexagon inside it.
fn flux_domains(c: Point, r: f64) -> Result<(PolygonDomain, PolygonDomain, PolygonDomain, PolygonDomain)> {
    let whole = PolygonDomain::rectangle(c.x - r, c.x + r, c.y - r, c.y + r)?;
    let left = PolygonDomain::rectangle(c.x - r, c.x, c.y - r, c.y + r)?;
    let right = PolygonDomain::rectangle(c.x, c.x + r, c.y - r, c.y + r)?;
    let q = |x: f64, y: f64| Point::new(c.x + r * x, c.y + r * y);
    let notched = PolygonDomain::new(vec![
        q(-0.8, -0.8),
        q(0.8, -0.8),
        q(0.8, 0.8),
        q(0.0, 0.1),
        q(-0.8, 0.8),
    ])?;
    Ok((whole, left, right, notched))
}

/// Divergence identities for `N` and `D N_perp` over polygons around the
/// center, and cancellation over a shared edge.
pub fn flux(target: &Target, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let tol = &cfg.tolerances;
    let field = &target.frame;
    let k = cfg.refinement;
    let (whole, left, right, notched) = flux_domains(target.center, target.chart_radius)?;
    let mut rep = VerificationReport::new();

    let mut n_res = Vec::new();
    let mut add_res = Vec::new();
    let fw = flux_n(field, &whole, None, k)?;
    let fl = flux_n(field, &left, None, k)?;
    let fr = flux_n(field, &right, None, k)?;
    let fh = flux_n(field, &notched, None, k)?;
    n_res.extend([fw.residual, fl.residual, fr.residual, fh.residual]);
    add_res.push(fl.lhs + fr.lhs - fw.lhs);
    rep.push(Entry::from_residuals(
        "flux.n",
        "closed int N . nu = int H",
        &n_res,
        tol.get("flux.n"),
    ));

    if field.is_graph() {
        let gw = flux_dnperp(field, &whole, None, k)?;
        let gl = flux_dnperp(field, &left, None, k)?;
        let gr = flux_dnperp(field, &right, None, k)?;
        let gh = flux_dnperp(field, &notched, None, k)?;
        add_res.push(gl.lhs + gr.lhs - gw.lhs);
        rep.push(Entry::from_residuals(
            "flux.dnperp",
            "closed int D N_perp . nu = int rot F",
            &[gw.residual, gl.residual, gr.residual, gh.residual],
            tol.get("flux.dnperp"),
        ));
    } else {
        rep.set_meta("skipped.flux_dnperp", "direct-mode field has no D or rot F");
    }
    rep.push(Entry::from_residuals(
        "flux.additivity",
        "fluxes through a shared edge cancel",
        &add_res,
        tol.get("flux.additivity"),
    ));
    Ok(rep)
}

/// Largest `|H|` on a lattice over the square of half-width `r` around `c`.
fn h_bound(field: &FrameField, c: Point, r: f64) -> Result<f64> {
    Rect::around(c, r)
        .grid(21)
        .into_iter()
        .try_fold(0.0f64, |m, q| Ok(m.max(field.h(q)?.abs())))
}

/// Branch separation against the growth bound `2 delta exp(4 H_M r)`, for
/// characteristic and seed bundles from the center.
pub fn funnel_growth(target: &Target, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let check = "funnel.growth";
    let field = &target.frame;
    let r_max = target.chart_radius;
    let radii = [r_max / 4.0, r_max / 2.0, r_max];
    let hm = h_bound(field, target.center, r_max)?;
    let mut opts = FunnelOptions::new(target.trace_box);
    opts.step = cfg.step;
    opts.refinement = cfg.refinement;
    let mut res = Vec::new();
    for kind in [CurveKind::Characteristic, CurveKind::Seed] {
        let f = funnel(field, target.center, kind, &radii, cfg.funnel_branches, cfg.funnel_delta, &opts)?;
        for row in &f.rows {
            let bound = 2.0 * cfg.funnel_delta * (4.0 * hm * row.r).exp();
            res.push(row.separation.map_or(f64::NAN, |s| s / bound));
        }
    }
    let mut rep = VerificationReport::new();
    rep.push(Entry::from_residuals(
        check,
        "separation <= 2 delta exp(4 H_M r)",
        &res,
        cfg.tolerances.get(check),
    ));
    rep.set_meta("funnel.h_bound", crate::tracer::fmt17(hm));
    Ok(rep)
}
