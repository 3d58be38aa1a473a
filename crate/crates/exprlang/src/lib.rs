//! A small expression language for user-defined planar fields.
//!
//! Expressions range over the coordinates `x` and `y`, numeric literals,
//! `pi`, the operators `+ - * / ^` and the functions `sin cos tan exp log
//! sqrt abs atan2 min max`. Evaluation with [`Dual2`] yields exact first
//! partial derivatives, which is how gradients of `u` and `rot F` are
//! obtained without differencing.
//!
//! ```
//! let e = charflow_expr::parse("sqrt(x*x + y*y)").unwrap();
//! let d = e.eval_dual(3.0, 4.0).unwrap();
//! assert_eq!(d.value, 5.0);
//! assert!((d.dx - 0.6).abs() < 1e-15);
//! ```

mod ast;
mod dual;
mod eval;
mod fieldfile;
mod parser;

pub use ast::{BinOp, Expr, Func, Var};
pub use dual::Dual2;
pub use eval::{eval_dual, EvalError};
pub use fieldfile::{parse_field_file, FieldDefinition, FieldFileError};
pub use parser::{parse, SyntaxError};
