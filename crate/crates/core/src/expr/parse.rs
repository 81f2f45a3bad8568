use thiserror::Error;

use super::{BinOp, Func, ScalarExpr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("`{name}` at byte {offset} is not smooth and is rejected")]
    NonSmooth { name: String, offset: usize },
    #[error("variable `{name}` at byte {offset} is out of range for dimension {dim}")]
    VariableOutOfRange {
        name: String,
        offset: usize,
        dim: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
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
            let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            out.push((Tok::Num(value), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(ParseError::Syntax {
                        offset: start,
                        message: format!("unexpected character `{}`", src[start..].chars().next().unwrap()),
                    })
                }
            };
            i += c.len_utf8();
            out.push((tok, start));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.bump();
            let rhs = self.term()?;
            lhs = ScalarExpr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut lhs = self.factor()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.bump();
            let rhs = self.factor()?;
            lhs = ScalarExpr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<ScalarExpr, ParseError> {
        let base = self.base()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.bump();
            let exponent = self.factor()?;
            return Ok(ScalarExpr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<ScalarExpr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(ScalarExpr::from_node(super::Node::Num(v))),
            Some(Tok::Op('-')) => Ok(ScalarExpr::neg_raw(self.base()?)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(e),
                    _ => {
                        self.pos -= 1;
                        Err(self.err("expected `)`"))
                    }
                }
            }
            Some(Tok::Ident(name)) => self.ident(name, offset),
            Some(_) => {
                self.pos -= 1;
                Err(self.err("expected a number, identifier or `(`"))
            }
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn ident(&mut self, name: String, offset: usize) -> Result<ScalarExpr, ParseError> {
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let index: usize = digits.parse().unwrap_or(usize::MAX);
                if index == 0 || index > self.dim {
                    return Err(ParseError::VariableOutOfRange {
                        name,
                        offset,
                        dim: self.dim,
                    });
                }
                return Ok(ScalarExpr::var(index - 1));
            }
        }
        let func = match Func::from_name(&name) {
            Some(f) => f,
            None if matches!(name.as_str(), "abs" | "sign" | "min" | "max" | "floor" | "ceil") => {
                return Err(ParseError::NonSmooth { name, offset })
            }
            None => return Err(ParseError::UnknownIdentifier { name, offset }),
        };
        match self.bump() {
            Some(Tok::LParen) => {}
            _ => {
                self.pos -= 1;
                return Err(self.err(format!("expected `(` after `{name}`")));
            }
        }
        let arg = self.expr()?;
        match self.bump() {
            Some(Tok::RParen) => Ok(ScalarExpr::call(func, arg)),
            _ => {
                self.pos -= 1;
                Err(self.err("expected `)`"))
            }
        }
    }
}

/// Parse `src` as an expression over coordinates `x1..x{dim}`.
///
/// `^` is right-associative; unary minus binds tighter than `^`, so `-x1^2`
/// is `(-x1)^2`.
pub fn parse(src: &str, dim: usize) -> Result<ScalarExpr, ParseError> {
    if src.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
        dim,
    };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Node;

    #[test]
    fn parses_quadratic() {
        let e = parse("x1^2/2 + x2^2/2", 2).unwrap();
        assert_eq!(e.eval(&[1.0, 2.0]), 2.5);
        assert!(matches!(e.node(), Node::Binary(BinOp::Add, _, _)));
    }

    #[test]
    fn parses_function_call() {
        let e = parse("exp(2*x1)", 3).unwrap();
        match e.node() {
            Node::Call(Func::Exp, arg) => assert_eq!(arg.eval(&[0.5, 0.0, 0.0]), 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_range_variable() {
        assert!(matches!(
            parse("x5", 3),
            Err(ParseError::VariableOutOfRange { offset: 0, dim: 3, .. })
        ));
        assert!(matches!(parse("x0", 3), Err(ParseError::VariableOutOfRange { .. })));
    }

    #[test]
    fn rejects_abs_and_unknown_names() {
        assert!(matches!(parse("abs(x1)", 1), Err(ParseError::NonSmooth { .. })));
        assert!(matches!(
            parse("1 + foo(x1)", 1),
            Err(ParseError::UnknownIdentifier { offset: 4, .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert_eq!(
            parse("x1 + * 2", 1),
            Err(ParseError::Syntax {
                offset: 5,
                message: "expected a number, identifier or `(`".into()
            })
        );
        assert!(matches!(parse("(x1 + 2", 1), Err(ParseError::Syntax { offset: 7, .. })));
        assert!(matches!(parse("x1 $", 1), Err(ParseError::Syntax { offset: 3, .. })));
        assert_eq!(parse("   ", 1), Err(ParseError::Empty));
    }

    #[test]
    fn pow_is_right_associative_and_neg_binds_tightest() {
        let e = parse("2^3^2", 1).unwrap();
        assert_eq!(e.eval(&[0.0]), 512.0);
        let e = parse("-x1^2", 1).unwrap();
        assert_eq!(e.eval(&[3.0]), 9.0);
        let e = parse("1 - -x1", 1).unwrap();
        assert_eq!(e.eval(&[3.0]), 4.0);
        let e = parse("1.5e-1*x1", 1).unwrap();
        assert!((e.eval(&[2.0]) - 0.3).abs() < 1e-15);
    }
}
