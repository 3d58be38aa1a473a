//! Parser corpus and random expression generation shared by the expression
//! tests and the acceptance suite.
#![allow(dead_code)]

use charflow_expr::{BinOp, Expr, Func};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const X: f64 = 2.0;
pub const Y: f64 = 3.0;

pub enum Expect {
    /// Value at `(X, Y)`, written as plain Rust arithmetic.
    Value(f64),
    /// Syntax error at this byte offset.
    SyntaxAt(usize),
    /// Parses, but evaluation at `(X, Y)` fails.
    EvalFails,
}

pub fn corpus() -> Vec<(&'static str, Expect)> {
    use std::f64::consts::PI;
    use Expect::*;
    let (x, y) = (X, Y);
    vec![
        ("x*y", Value(x * y)),
        ("-x^2", Value(-(x * x))),
        ("x + y * 2", Value(x + y * 2.0)),
        ("(x + y) * 2", Value((x + y) * 2.0)),
        ("x - y - 1", Value(x - y - 1.0)),
        ("x - (y - 1)", Value(x - (y - 1.0))),
        ("x / y / 2", Value(x / y / 2.0)),
        ("x / (y / 2)", Value(x / (y / 2.0))),
        ("2^3^2", Value(512.0)),
        ("(2^3)^2", Value(64.0)),
        ("-2^2", Value(-4.0)),
        ("(-2)^2", Value(4.0)),
        ("x^-1", Value(0.5)),
        ("--x", Value(x)),
        ("x * -y", Value(-x * y)),
        ("-x * y", Value(-x * y)),
        ("x - -y", Value(x + y)),
        ("2*x^2 + 3*x + 1", Value(2.0 * x * x + 3.0 * x + 1.0)),
        ("pi", Value(PI)),
        ("2*pi*x", Value(2.0 * PI * x)),
        ("sin(x)", Value(x.sin())),
        ("cos(x*y)", Value((x * y).cos())),
        ("tan(0.5)", Value(0.5f64.tan())),
        ("exp(-x)", Value((-x).exp())),
        ("log(y)", Value(y.ln())),
        ("sqrt(x*x + y*y)", Value((x * x + y * y).sqrt())),
        ("abs(x - y)", Value((x - y).abs())),
        ("atan2(y, x)", Value(y.atan2(x))),
        ("min(x, y)", Value(x.min(y))),
        ("max(x, y)", Value(x.max(y))),
        ("min(max(x, 1), 0.5)", Value(0.5)),
        ("1.5e2", Value(150.0)),
        ("2.5E-1 * x", Value(0.25 * x)),
        (".5", Value(0.5)),
        ("  x   *   y  ", Value(x * y)),
        ("x^0.5", Value(x.sqrt())),
        ("y^x", Value(9.0)),
        ("exp(log(x))", Value(x.ln().exp())),
        ("sin(x)^2 + cos(x)^2", Value(x.sin().powi(2) + x.cos().powi(2))),
        ("x*y + y*abs(y)", Value(x * y + y * y.abs())),
        ("((x))", Value(x)),
        ("-(x + y)", Value(-(x + y))),
        ("x^2^-1", Value(x.powf(0.5))),
        ("1/(1 + x^2)", Value(1.0 / (1.0 + x * x))),
        // syntax errors
        ("sin(x", SyntaxAt(5)),
        ("x +", SyntaxAt(3)),
        ("(x + y", SyntaxAt(6)),
        ("x + y)", SyntaxAt(5)),
        ("foo(x)", SyntaxAt(0)),
        ("z + 1", SyntaxAt(0)),
        ("atan2(x)", SyntaxAt(0)),
        ("sin(x, y)", SyntaxAt(0)),
        ("min(x, y, 1)", SyntaxAt(0)),
        ("x $ y", SyntaxAt(2)),
        ("1.2.3", SyntaxAt(0)),
        ("sin x", SyntaxAt(4)),
        ("x y", SyntaxAt(2)),
        ("*x", SyntaxAt(0)),
        ("()", SyntaxAt(1)),
        ("", SyntaxAt(0)),
        ("f(,)", SyntaxAt(0)),
        ("max(x,)", SyntaxAt(6)),
        // evaluation errors
        ("log(-y)", EvalFails),
        ("x / (y - 3)", EvalFails),
        ("(-x)^0.5", EvalFails),
        ("sqrt(x - y)", EvalFails),
        ("exp(1000*x)", EvalFails),
        ("atan2(y - 3, x - 2)", EvalFails),
        ("(x - 2)^-1", EvalFails),
    ]
}

fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..4) {
            0 => Expr::x(),
            1 => Expr::y(),
            2 => Expr::Pi,
            _ => Expr::num((rng.gen_range(-20..=20) as f64) / 8.0),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..13) {
        0 => Expr::binary(BinOp::Add, random_expr(rng, d), random_expr(rng, d)),
        1 => Expr::binary(BinOp::Sub, random_expr(rng, d), random_expr(rng, d)),
        2 | 3 => Expr::binary(BinOp::Mul, random_expr(rng, d), random_expr(rng, d)),
        4 => Expr::binary(BinOp::Div, random_expr(rng, d), random_expr(rng, d)),
        5 => Expr::binary(
            BinOp::Pow,
            random_expr(rng, d),
            Expr::num(rng.gen_range(-2..=3) as f64),
        ),
        6 => Expr::neg(random_expr(rng, d)),
        7 => Expr::call(Func::Sin, vec![random_expr(rng, d)]),
        8 => Expr::call(Func::Cos, vec![random_expr(rng, d)]),
        9 => Expr::call(Func::Exp, vec![random_expr(rng, d)]),
        10 => Expr::call(
            Func::Log,
            vec![Expr::binary(
                BinOp::Add,
                Expr::num(1.5),
                Expr::call(Func::Sin, vec![random_expr(rng, d)]),
            )],
        ),
        11 => Expr::call(
            Func::Sqrt,
            vec![Expr::binary(
                BinOp::Add,
                Expr::num(1.0),
                Expr::binary(BinOp::Mul, random_expr(rng, d), random_expr(rng, d)),
            )],
        ),
        _ => Expr::call(Func::Atan2, vec![random_expr(rng, d), random_expr(rng, d)]),
    }
}

/// Outcome of one finite-difference comparison.
pub struct GradientCase {
    pub expr: Expr,
    pub x: f64,
    pub y: f64,
    pub dual: (f64, f64),
    pub fd: (f64, f64),
}

impl GradientCase {
    /// `|dual - fd| / (1 + |dual|)`, maximized over both partials.
    pub fn relative_error(&self) -> f64 {
        let ex = (self.dual.0 - self.fd.0).abs() / (1.0 + self.dual.0.abs());
        let ey = (self.dual.1 - self.fd.1).abs() / (1.0 + self.dual.1.abs());
        ex.max(ey)
    }
}

/// Central differences of the plain evaluator with step `h`.
pub fn central_difference(e: &Expr, x: f64, y: f64, h: f64) -> Option<(f64, f64)> {
    let fx = (e.eval(x + h, y).ok()? - e.eval(x - h, y).ok()?) / (2.0 * h);
    let fy = (e.eval(x, y + h).ok()? - e.eval(x, y - h).ok()?) / (2.0 * h);
    Some((fx, fy))
}

/// Draws random expressions and points until `count` of them evaluate
/// cleanly with moderate magnitudes, returning the dual and finite-difference
/// gradients for each.
pub fn random_gradient_cases(seed: u64, count: usize, h: f64) -> Vec<GradientCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let expr = random_expr(&mut rng, 4);
        let x = rng.gen_range(-1.0..1.0);
        let y = rng.gen_range(-1.0..1.0);
        let Ok(d) = expr.eval_dual(x, y) else { continue };
        // Large magnitudes or steep gradients put the difference quotient in
        // the rounding-dominated regime; those draws say nothing about the
        // derivative code.
        if d.value.abs() > 1e3 || d.dx.abs() > 1e3 || d.dy.abs() > 1e3 {
            continue;
        }
        let Some(fd) = central_difference(&expr, x, y, h) else { continue };
        // Points within a few steps of a singularity (poles, atan2 branch
        // cut) make the difference quotient meaningless.
        let Some(fd_half) = central_difference(&expr, x, y, h / 2.0) else { continue };
        if (fd.0 - fd_half.0).abs() > 1e-3 * (1.0 + fd.0.abs())
            || (fd.1 - fd_half.1).abs() > 1e-3 * (1.0 + fd.1.abs())
        {
            continue;
        }
        out.push(GradientCase {
            expr,
            x,
            y,
            dual: (d.dx, d.dy),
            fd,
        });
    }
    out
}
