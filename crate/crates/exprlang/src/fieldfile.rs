//! Field definition files: one `key = expression` per line, `#` comments.
//!
//! Graph mode uses the keys `u`, `F1`, `F2`; direct mode uses `theta` and
//! optionally `H`.

use crate::ast::Expr;
use crate::parser::{parse, SyntaxError};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub enum FieldDefinition {
    Graph { u: Expr, f1: Expr, f2: Expr },
    Direct { theta: Expr, h: Option<Expr> },
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FieldFileError {
    #[error("line {line}: expected 'key = expression'")]
    MissingEquals { line: usize },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key '{key}'")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: {source}")]
    Syntax {
        line: usize,
        #[source]
        source: SyntaxError,
    },
    #[error("incomplete field definition: {0}")]
    Incomplete(String),
}

const KEYS: [&str; 5] = ["u", "F1", "F2", "theta", "H"];

/// Parses the text of a field definition file.
pub fn parse_field_file(text: &str) -> Result<FieldDefinition, FieldFileError> {
    let mut entries: BTreeMap<&str, Expr> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, rhs) = trimmed
            .split_once('=')
            .ok_or(FieldFileError::MissingEquals { line })?;
        let key = key.trim();
        let key = KEYS
            .iter()
            .copied()
            .find(|k| *k == key)
            .ok_or_else(|| FieldFileError::UnknownKey {
                line,
                key: key.to_string(),
            })?;
        let expr = parse(rhs.trim()).map_err(|source| FieldFileError::Syntax { line, source })?;
        if entries.insert(key, expr).is_some() {
            return Err(FieldFileError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
    }

    let graph = ["u", "F1", "F2"].iter().any(|k| entries.contains_key(k));
    let direct = entries.contains_key("theta");
    match (graph, direct) {
        (true, true) => Err(FieldFileError::Incomplete(
            "graph keys (u, F1, F2) and theta are mutually exclusive".into(),
        )),
        (true, false) => {
            if entries.contains_key("H") {
                return Err(FieldFileError::Incomplete(
                    "H is only accepted in direct mode".into(),
                ));
            }
            let mut take = |k: &str| {
                entries
                    .remove(k)
                    .ok_or_else(|| FieldFileError::Incomplete(format!("graph mode needs '{k}'")))
            };
            Ok(FieldDefinition::Graph {
                u: take("u")?,
                f1: take("F1")?,
                f2: take("F2")?,
            })
        }
        (false, true) => Ok(FieldDefinition::Direct {
            theta: entries.remove("theta").expect("checked above"),
            h: entries.remove("H"),
        }),
        (false, false) => Err(FieldFileError::Incomplete(
            "expected either u/F1/F2 or theta".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_file() {
        let def = parse_field_file("# heisenberg\nu = x*y\nF1 = -y\nF2 = x\n").unwrap();
        assert!(matches!(def, FieldDefinition::Graph { .. }));
    }

    #[test]
    fn direct_file_with_h() {
        let def = parse_field_file("theta = atan2(y, x)\nH = 1/sqrt(x^2+y^2)").unwrap();
        match def {
            FieldDefinition::Direct { h, .. } => assert!(h.is_some()),
            _ => panic!("expected direct"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(
            parse_field_file("u = x\nF1 = (y\nF2 = x"),
            Err(FieldFileError::Syntax {
                line: 2,
                source: SyntaxError {
                    offset: 2,
                    message: "unbalanced parenthesis opened at byte 0".into()
                }
            })
        );
        assert!(matches!(
            parse_field_file("v = x"),
            Err(FieldFileError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            parse_field_file("u = x\nF1 = y"),
            Err(FieldFileError::Incomplete(_))
        ));
    }
}
