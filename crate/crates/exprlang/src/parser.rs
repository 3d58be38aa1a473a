//! Recursive-descent parser.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'x' | 'y' | 'pi' | func '(' sum (',' sum)* ')' | '(' sum ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)`.

use crate::ast::{BinOp, Expr, Func, Var};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: {message}")]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

impl SyntaxError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        Self {
            offset,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| SyntaxError::new(start, format!("malformed number '{text}'")))?;
                Tok::Num(v)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                Tok::Ident(src[start..i].to_string())
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                i += 1;
                Tok::Op(c as char)
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b',' => {
                i += 1;
                Tok::Comma
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(SyntaxError::new(start, format!("unexpected character '{ch}'")));
            }
        };
        out.push(Token { tok, offset: start });
    }
    out.push(Token {
        tok: Tok::End,
        offset: src.len(),
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn sum(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn product(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        if self.peek().tok == Tok::Op('-') {
            self.bump();
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.primary()?;
        if self.peek().tok == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn expect_rparen(&mut self, open: usize) -> Result<(), SyntaxError> {
        let t = self.bump();
        match t.tok {
            Tok::RParen => Ok(()),
            Tok::End => Err(SyntaxError::new(
                t.offset,
                format!("unbalanced parenthesis opened at byte {open}"),
            )),
            _ => Err(SyntaxError::new(t.offset, "expected ')'")),
        }
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.sum()?;
                self.expect_rparen(t.offset)?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::Var(Var::X)),
                "y" => Ok(Expr::Var(Var::Y)),
                "pi" => Ok(Expr::Pi),
                _ => {
                    let func = Func::from_name(&name).ok_or_else(|| {
                        SyntaxError::new(t.offset, format!("unknown identifier '{name}'"))
                    })?;
                    let open = self.bump();
                    if open.tok != Tok::LParen {
                        return Err(SyntaxError::new(
                            open.offset,
                            format!("expected '(' after function '{name}'"),
                        ));
                    }
                    let mut args = vec![self.sum()?];
                    while self.peek().tok == Tok::Comma {
                        self.bump();
                        args.push(self.sum()?);
                    }
                    self.expect_rparen(open.offset)?;
                    if args.len() != func.arity() {
                        return Err(SyntaxError::new(
                            t.offset,
                            format!(
                                "function '{name}' takes {} argument(s), got {}",
                                func.arity(),
                                args.len()
                            ),
                        ));
                    }
                    Ok(Expr::Call(func, args))
                }
            },
            Tok::RParen => Err(SyntaxError::new(t.offset, "unbalanced ')'")),
            Tok::End => Err(SyntaxError::new(t.offset, "unexpected end of input")),
            Tok::Comma => Err(SyntaxError::new(t.offset, "unexpected ','")),
            Tok::Op(c) => Err(SyntaxError::new(t.offset, format!("unexpected operator '{c}'"))),
        }
    }
}

/// Parses an expression, reporting the first syntax error with its byte offset.
pub fn parse(source: &str) -> Result<Expr, SyntaxError> {
    if source.trim().is_empty() {
        return Err(SyntaxError::new(0, "empty expression"));
    }
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.sum()?;
    let t = p.peek();
    match t.tok {
        Tok::End => Ok(e),
        Tok::RParen => Err(SyntaxError::new(t.offset, "unbalanced ')'")),
        _ => Err(SyntaxError::new(t.offset, "unexpected trailing input")),
    }
}
