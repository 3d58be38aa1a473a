use crate::config::Config;
use crate::{CliError, FieldArgs, Format};
use charflow::catalog;
use charflow::charts::{build_chart, chart_residuals, ChartOptions};
use charflow::flux::{flux_dnperp, flux_n, PolygonDomain};
use charflow::report::TOLERANCES;
use charflow::suites::{self, SuiteConfig, Target};
use charflow::tracer::{self, fmt17, CurveKind, ExitEvent};
use charflow::variational::{euler_lagrange_residual, minimize_lh, GraphCurve};
use charflow::{Entry, FrameField, Point, Rect, Tolerances, VerificationReport};
use clap::Args;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

fn numbers(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got '{s}'"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(format!("non-finite number in '{s}'"));
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointArg(pub Point);

impl FromStr for PointArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v = numbers(s, 2)?;
        Ok(PointArg(Point::new(v[0], v[1])))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectArg(pub Rect);

impl FromStr for RectArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v = numbers(s, 4)?;
        if !(v[0] < v[1] && v[2] < v[3]) {
            return Err(format!("'{s}' is not xmin,xmax,ymin,ymax with min < max"));
        }
        Ok(RectArg(Rect::new(v[0], v[1], v[2], v[3])))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KindArg(pub CurveKind);

impl FromStr for KindArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "char" | "characteristic" => Ok(KindArg(CurveKind::Characteristic)),
            "seed" => Ok(KindArg(CurveKind::Seed)),
            _ => Err(format!("unknown curve kind '{s}' (char or seed)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridList(pub Vec<usize>);

impl FromStr for GridList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| format!("'{t}': {e}")))
            .collect::<Result<_, _>>()
            .map(GridList)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToleranceArg(pub String, pub f64);

impl FromStr for ToleranceArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (k, v) = s.split_once('=').ok_or_else(|| format!("expected check=value, got '{s}'"))?;
        let v: f64 = v.trim().parse().map_err(|e| format!("'{v}': {e}"))?;
        Ok(ToleranceArg(k.trim().to_string(), v))
    }
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Start point `x,y`.
    #[arg(long, allow_hyphen_values = true)]
    start: Option<PointArg>,
    /// `char` or `seed` [default: char]
    #[arg(long)]
    kind: Option<KindArg>,
    /// Signed arclength; negative runs backwards [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    arclen: Option<f64>,
    /// Largest RK4 step [default: 1e-3]
    #[arg(long)]
    step: Option<f64>,
    /// Stopping box `xmin,xmax,ymin,ymax` [default: the field's trace box]
    #[arg(long = "box", allow_hyphen_values = true)]
    bbox: Option<RectArg>,
    /// CSV output [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ChartArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Grid nodes per side [default: 41]
    #[arg(long)]
    grid: Option<usize>,
    /// RK4 step of the chart traces [default: 1e-3]
    #[arg(long)]
    step: Option<f64>,
    /// Chart JSON output [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Separate residual report; the chart JSON embeds it either way.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MinimizeArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Left endpoint `x,y`.
    #[arg(long, allow_hyphen_values = true)]
    from: Option<PointArg>,
    /// Right endpoint `x,y`.
    #[arg(long, allow_hyphen_values = true)]
    to: Option<PointArg>,
    /// Graph nodes including endpoints [default: 401]
    #[arg(long)]
    nodes: Option<usize>,
    /// Stop when the gradient max-norm is below this [default: 1e-10]
    #[arg(long)]
    gradient_tol: Option<f64>,
    /// [default: 200]
    #[arg(long)]
    max_iters: Option<usize>,
    /// Lower edge of the enclosed region [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    baseline: Option<f64>,
    /// Minimizer CSV [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Euler-Lagrange residual report [default: stderr]
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FluxArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Polygon JSON: a vertex list or `{"vertices": [...]}`.
    #[arg(long)]
    polygon: Option<PathBuf>,
    /// Rectangle `xmin,xmax,ymin,ymax` instead of a polygon file.
    #[arg(long, allow_hyphen_values = true)]
    rect: Option<RectArg>,
    /// Test function as an expression in x, y [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    /// Quadrature refinement [default: 64]
    #[arg(long)]
    refinement: Option<usize>,
    /// Report output [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// theorem-a, charts, theta-t, flux, funnel or all.
    suite: String,
    #[command(flatten)]
    field: FieldArgs,
    /// Seed of the start-point sampler [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Number of random start points [default: 20]
    #[arg(long)]
    starts: Option<usize>,
    /// Coarsest trace step [default: 1e-3]
    #[arg(long)]
    step: Option<f64>,
    /// Trace length of the curvature checks [default: 1]
    #[arg(long)]
    length: Option<f64>,
    /// Chart grid sizes, e.g. `21,41,81` [default: 41]
    #[arg(long)]
    grids: Option<GridList>,
    /// Flux quadrature refinement [default: 64]
    #[arg(long)]
    refinement: Option<usize>,
    /// Tolerance override `check=value`; repeatable.
    #[arg(long = "tolerance")]
    tolerances: Vec<ToleranceArg>,
    /// Report output [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_to(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn render(rep: &VerificationReport, format: Format) -> String {
    match format {
        Format::Json => rep.to_json() + "\n",
        Format::Text => rep.to_text(),
    }
}

fn stamp(rep: &mut VerificationReport, command: &str) {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    rep.set_meta("command", command);
    rep.set_meta("timestamp", secs);
    rep.set_meta("version", env!("CARGO_PKG_VERSION"));
}

fn load_field_file(path: &Path) -> Result<FrameField, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let def = charflow_expr::parse_field_file(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    Ok(FrameField::from_definition(def).named(name))
}

/// A catalog entry, or a field file probed around `--center`.
fn target(cfg: &Config, a: &FieldArgs) -> Result<Target, CliError> {
    let name: String = cfg
        .pick(a.field.clone(), "field")?
        .ok_or_else(|| CliError::Usage("no field given (--field or config key 'field')".into()))?;
    let center = cfg.pick(a.center, "center")?.map(|c| c.0);
    let radius = cfg.pick(a.radius, "radius")?;
    if radius.is_some_and(|r| !(r > 0.0)) {
        return Err(CliError::Usage("radius must be positive".into()));
    }
    let mut t = match catalog::get(&name) {
        Ok(e) => Target::from(e),
        Err(charflow::Error::UnknownEntry(_)) if Path::new(&name).is_file() => {
            let frame = load_field_file(Path::new(&name))?;
            Target::custom(frame, center.unwrap_or(Point::new(0.0, 0.0)), radius.unwrap_or(0.2))
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(c) = center {
        if c != t.center {
            t.center = c;
            // closed-form charts are normalized at the default center
            if let Some(truth) = &mut t.truth {
                truth.chart = None;
            }
        }
    }
    if let Some(r) = radius {
        t.chart_radius = r;
    }
    Ok(t)
}

fn positive(v: f64, what: &str) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{what} must be positive, got {v}")))
    }
}

pub fn trace(cfg: &Config, a: TraceArgs) -> Result<(), CliError> {
    let t = target(cfg, &a.field)?;
    let start = cfg
        .pick(a.start, "start")?
        .ok_or_else(|| CliError::Usage("no start point given (--start x,y)".into()))?;
    let kind = cfg.or(a.kind, "kind", KindArg(CurveKind::Characteristic))?.0;
    let arclen = cfg.or(a.arclen, "arclen", 1.0)?;
    let step = positive(cfg.or(a.step, "step", 1e-3)?, "step")?;
    let bbox = cfg.or(a.bbox, "box", RectArg(t.trace_box))?.0;
    let out = cfg.pick(a.out, "out")?;
    let curve = tracer::trace(&t.frame, start.0, kind, arclen, step, &bbox)?;
    if curve.exit != ExitEvent::Completed {
        eprintln!(
            "charflow: trace stopped early ({:?}) at sigma {}",
            curve.exit,
            curve.samples.last().map_or(0.0, |s| s.sigma)
        );
    }
    let mut buf = Vec::new();
    curve
        .write_csv(&mut buf)
        .map_err(|e| CliError::io(Path::new("<buffer>"), e))?;
    write_to(out.as_deref(), &String::from_utf8(buf).expect("csv is ascii"))
}

pub fn chart(cfg: &Config, format: Format, a: ChartArgs) -> Result<(), CliError> {
    let t = target(cfg, &a.field)?;
    let n = cfg.or(a.grid, "grid", 41)?;
    let opts = ChartOptions {
        step: positive(cfg.or(a.step, "step", 1e-3)?, "step")?,
        ..ChartOptions::default()
    };
    let out = cfg.pick(a.out, "out")?;
    let report_path = cfg.pick(a.report, "report")?;
    let mut chart = build_chart(&t.frame, t.center, t.chart_radius, n, &opts)?;
    let mut rep = chart_residuals(&chart, &t.frame, &tolerances(cfg, &[])?);
    stamp(&mut rep, "chart");
    if chart.radius != t.chart_radius {
        eprintln!("charflow: chart radius shrunk to {}", chart.radius);
    }
    chart.residuals = Some(rep.clone());
    write_to(out.as_deref(), &(chart.to_json() + "\n"))?;
    if let Some(p) = report_path {
        write_to(Some(&p), &render(&rep, format))?;
    }
    Ok(())
}

pub fn minimize(cfg: &Config, format: Format, a: MinimizeArgs) -> Result<(), CliError> {
    let t = target(cfg, &a.field)?;
    let from = cfg.pick(a.from, "from")?.ok_or_else(|| CliError::Usage("no left endpoint (--from x,y)".into()))?.0;
    let to = cfg.pick(a.to, "to")?.ok_or_else(|| CliError::Usage("no right endpoint (--to x,y)".into()))?.0;
    if !(to.x > from.x) {
        return Err(CliError::Usage("the right endpoint must lie to the right of the left one".into()));
    }
    let nodes = cfg.or(a.nodes, "nodes", 401)?;
    let tol = positive(cfg.or(a.gradient_tol, "gradient-tol", 1e-10)?, "gradient tolerance")?;
    let max_iters = cfg.or(a.max_iters, "max-iters", 200)?;
    let baseline = cfg.or(a.baseline, "baseline", 0.0)?;
    let out = cfg.pick(a.out, "out")?;
    let report_path = cfg.pick(a.report, "report")?;
    if nodes < 3 {
        return Err(CliError::Usage(format!("need at least 3 nodes, got {nodes}")));
    }

    let h = |p: Point| t.frame.h(p);
    let c0 = GraphCurve::from_fn(from.x, to.x, nodes, |x| from.y + (to.y - from.y) * (x - from.x) / (to.x - from.x))
        .with_baseline(baseline);
    let m = minimize_lh(&c0, h, tol, max_iters)?;
    let curve = m.curve.to_curve(h)?;
    let el = euler_lagrange_residual(&m.curve, h)?;

    let tols = tolerances(cfg, &[])?;
    let mut rep = VerificationReport::new();
    rep.push(Entry::from_residuals(
        "variational.el_residual",
        "(y' / sqrt(1 + y'^2))' + H = 0 at the minimizer",
        &el,
        tols.get("variational.el_residual"),
    ));
    rep.set_meta("field", &t.frame.name);
    rep.set_meta("minimize.value", fmt17(m.value));
    rep.set_meta("minimize.initial_value", fmt17(m.initial_value));
    rep.set_meta("minimize.iterations", m.iterations);
    rep.set_meta("minimize.gradient_norm", fmt17(m.gradient_norm));
    stamp(&mut rep, "minimize");

    let mut buf = Vec::new();
    curve
        .write_csv(&mut buf)
        .map_err(|e| CliError::io(Path::new("<buffer>"), e))?;
    write_to(out.as_deref(), &String::from_utf8(buf).expect("csv is ascii"))?;
    match report_path {
        Some(p) => write_to(Some(&p), &render(&rep, format)),
        None => {
            eprint!("{}", rep.to_text());
            Ok(())
        }
    }
}

pub fn flux(cfg: &Config, format: Format, a: FluxArgs) -> Result<(), CliError> {
    let t = target(cfg, &a.field)?;
    let polygon = cfg.pick(a.polygon, "polygon")?;
    let rect = cfg.pick(a.rect, "rect")?;
    let domain = match (polygon, rect) {
        (Some(p), None) => {
            let text = std::fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
            PolygonDomain::from_json(&text)?
        }
        (None, Some(r)) => PolygonDomain::rectangle(r.0.xmin, r.0.xmax, r.0.ymin, r.0.ymax)?,
        _ => return Err(CliError::Usage("give exactly one of --polygon and --rect".into())),
    };
    let phi = cfg
        .pick(a.phi, "phi")?
        .map(|s| charflow_expr::parse(&s).map_err(|e| CliError::Usage(format!("phi: {e}"))))
        .transpose()?;
    let k = cfg.or(a.refinement, "refinement", 64)?;
    if k == 0 {
        return Err(CliError::Usage("refinement must be at least 1".into()));
    }
    let out = cfg.pick(a.out, "out")?;
    let tols = tolerances(cfg, &[])?;

    let mut rep = VerificationReport::new();
    let r = flux_n(&t.frame, &domain, phi.as_ref(), k)?;
    rep.push(Entry::from_residuals("flux.n", "closed int phi N . nu = int grad phi . N + phi H", &[r.residual], tols.get("flux.n")));
    rep.set_meta("flux.n.lhs", fmt17(r.lhs));
    rep.set_meta("flux.n.rhs", fmt17(r.rhs));
    if t.frame.is_graph() {
        let r = flux_dnperp(&t.frame, &domain, phi.as_ref(), k)?;
        rep.push(Entry::from_residuals(
            "flux.dnperp",
            "closed int phi D N_perp . nu = int grad phi . D N_perp + phi rot F",
            &[r.residual],
            tols.get("flux.dnperp"),
        ));
        rep.set_meta("flux.dnperp.lhs", fmt17(r.lhs));
        rep.set_meta("flux.dnperp.rhs", fmt17(r.rhs));
    }
    rep.set_meta("field", &t.frame.name);
    rep.set_meta("refinement", k);
    stamp(&mut rep, "flux");
    write_to(out.as_deref(), &render(&rep, format))
}

fn tolerances(cfg: &Config, flags: &[ToleranceArg]) -> Result<Tolerances, CliError> {
    let mut tol = Tolerances::default();
    let known = |c: &str| TOLERANCES.iter().any(|(n, _)| *n == c);
    for (check, v) in cfg.tolerances() {
        let v: f64 = v
            .parse()
            .map_err(|e| CliError::Usage(format!("config tolerance '{check}': {e}")))?;
        if !known(check) {
            return Err(CliError::Usage(format!("unknown check '{check}'")));
        }
        tol.set(check, v);
    }
    for ToleranceArg(check, v) in flags {
        if !known(check) {
            return Err(CliError::Usage(format!("unknown check '{check}'")));
        }
        tol.set(check, *v);
    }
    Ok(tol)
}

pub fn verify(cfg: &Config, format: Format, a: VerifyArgs) -> Result<(), CliError> {
    if !suites::SUITES.contains(&a.suite.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown suite '{}' (expected one of {})",
            a.suite,
            suites::SUITES.join(", ")
        )));
    }
    let t = target(cfg, &a.field)?;
    let d = SuiteConfig::default();
    let sc = SuiteConfig {
        seed: cfg.or(a.seed, "seed", d.seed)?,
        starts: cfg.or(a.starts, "starts", d.starts)?,
        step: positive(cfg.or(a.step, "step", d.step)?, "step")?,
        trace_length: positive(cfg.or(a.length, "length", d.trace_length)?, "length")?,
        chart_grids: cfg.or(a.grids, "grids", GridList(d.chart_grids.clone()))?.0,
        refinement: cfg.or(a.refinement, "refinement", d.refinement)?,
        tolerances: tolerances(cfg, &a.tolerances)?,
        ..d
    };
    let out = cfg.pick(a.out, "out")?;
    let mut rep = suites::run(&a.suite, &t, &sc)?;
    stamp(&mut rep, "verify");
    write_to(out.as_deref(), &render(&rep, format))?;
    if rep.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = rep.entries.iter().filter(|e| !e.pass).map(|e| e.check.as_str()).collect();
        Err(CliError::Failed(failed.join(", ")))
    }
}

pub fn catalog_list(format: Format) -> Result<(), CliError> {
    let entries = catalog::list();
    let text = match format {
        Format::Text => entries
            .iter()
            .map(|e| format!("{:<14} {:<34} {}\n", e.name, e.validity, e.summary))
            .collect(),
        Format::Json => {
            let v: Vec<serde_json::Value> = entries
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "name": e.name,
                        "validity": e.validity,
                        "summary": e.summary,
                        "mode": if e.frame.is_graph() { "graph" } else { "direct" },
                        "center": [e.center.x, e.center.y],
                        "chart_radius": e.chart_radius,
                    })
                })
                .collect();
            serde_json::to_string_pretty(&v).expect("plain values") + "\n"
        }
    };
    write_to(None, &text)
}
