//! Evaluation of expressions, plain and with first derivatives.
//!
//! The two evaluators are written independently so the plain one can serve
//! as a finite-difference reference for the dual one.

use crate::ast::{BinOp, Expr, Func, Var};
use crate::dual::Dual2;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error: {op} undefined at {arg}")]
    Domain { op: &'static str, arg: f64 },
    #[error("non-finite result from {op}")]
    NonFinite { op: &'static str },
}

fn domain(op: &'static str, arg: f64) -> EvalError {
    EvalError::Domain { op, arg }
}

fn finite(v: f64, op: &'static str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite { op })
    }
}

fn finite_dual(v: Dual2, op: &'static str) -> Result<Dual2, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite { op })
    }
}

/// Integer exponent test used by both evaluators: integer-valued and, for
/// duals, locally constant.
fn as_integer(v: f64) -> Option<i64> {
    if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 {
        Some(v as i64)
    } else {
        None
    }
}

impl Expr {
    /// Plain evaluation at `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Pi => PI,
            Expr::Neg(e) => -e.eval(x, y)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval(x, y)?;
                let b = b.eval(x, y)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(domain("division", b));
                        }
                        a / b
                    }
                    BinOp::Pow => match as_integer(b) {
                        Some(n) => {
                            if n < 0 && a == 0.0 {
                                return Err(domain("negative power", a));
                            }
                            a.powi(n as i32)
                        }
                        None => {
                            if a <= 0.0 {
                                return Err(domain("fractional power", a));
                            }
                            (b * a.ln()).exp()
                        }
                    },
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(x, y)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.tan(),
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(domain("log", a));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(domain("sqrt", a));
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                    Func::Atan2 => {
                        let b = args[1].eval(x, y)?;
                        if a == 0.0 && b == 0.0 {
                            return Err(domain("atan2", 0.0));
                        }
                        a.atan2(b)
                    }
                    Func::Min => a.min(args[1].eval(x, y)?),
                    Func::Max => a.max(args[1].eval(x, y)?),
                }
            }
        };
        finite(v, "evaluation")
    }

    /// Value and both first partials at `(x, y)`.
    pub fn eval_dual(&self, x: f64, y: f64) -> Result<Dual2, EvalError> {
        let v = match self {
            Expr::Num(v) => Dual2::constant(*v),
            Expr::Var(Var::X) => Dual2::var_x(x),
            Expr::Var(Var::Y) => Dual2::var_y(y),
            Expr::Pi => Dual2::constant(PI),
            Expr::Neg(e) => -e.eval_dual(x, y)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval_dual(x, y)?;
                let b = b.eval_dual(x, y)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.value == 0.0 {
                            return Err(domain("division", b.value));
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        let int = as_integer(b.value).filter(|_| b.dx == 0.0 && b.dy == 0.0);
                        match int {
                            Some(n) => {
                                if n < 0 && a.value == 0.0 {
                                    return Err(domain("negative power", a.value));
                                }
                                a.powi(n)
                            }
                            None => {
                                if a.value <= 0.0 {
                                    return Err(domain("fractional power", a.value));
                                }
                                a.powf(b)
                            }
                        }
                    }
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval_dual(x, y)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.tan(),
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a.value <= 0.0 {
                            return Err(domain("log", a.value));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a.value < 0.0 {
                            return Err(domain("sqrt", a.value));
                        }
                        if a.value == 0.0 {
                            // value is fine, the derivative is not
                            return Err(EvalError::NonFinite { op: "sqrt" });
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                    Func::Atan2 => {
                        let b = args[1].eval_dual(x, y)?;
                        if a.value == 0.0 && b.value == 0.0 {
                            return Err(domain("atan2", 0.0));
                        }
                        a.atan2(b)
                    }
                    Func::Min => a.min(args[1].eval_dual(x, y)?),
                    Func::Max => a.max(args[1].eval_dual(x, y)?),
                }
            }
        };
        finite_dual(v, "evaluation")
    }
}

/// Free-function form of [`Expr::eval_dual`].
pub fn eval_dual(e: &Expr, x: f64, y: f64) -> Result<Dual2, EvalError> {
    e.eval_dual(x, y)
}
