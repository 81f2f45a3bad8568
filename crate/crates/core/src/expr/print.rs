use std::fmt;

use super::{BinOp, Node, ScalarExpr};

// Binding strength of a printed node; children weaker than required get
// parentheses. Mirrors the grammar: expr < term < factor < base.
fn strength(e: &ScalarExpr) -> u8 {
    match e.node() {
        Node::Binary(BinOp::Add | BinOp::Sub, _, _) => 1,
        Node::Binary(BinOp::Mul | BinOp::Div, _, _) => 2,
        Node::Binary(BinOp::Pow, _, _) => 3,
        Node::Num(_) | Node::Var(_) | Node::Neg(_) | Node::Call(_, _) => 4,
    }
}

fn child(f: &mut fmt::Formatter<'_>, e: &ScalarExpr, min: u8) -> fmt::Result {
    if strength(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(v) => write!(f, "{v}"),
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Neg(e) => {
                f.write_str("-")?;
                child(f, e, 4)
            }
            Node::Call(func, e) => write!(f, "{}({e})", func.name()),
            Node::Binary(op, a, b) => {
                let (lmin, rmin) = match op {
                    BinOp::Add | BinOp::Sub => (1, 2),
                    BinOp::Mul | BinOp::Div => (2, 3),
                    BinOp::Pow => (4, 3),
                };
                child(f, a, lmin)?;
                match op {
                    BinOp::Pow => f.write_str("^")?,
                    _ => write!(f, " {} ", op.symbol())?,
                }
                child(f, b, rmin)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    #[test]
    fn prints_minimal_parentheses() {
        let cases = [
            ("x1^2/2 + x2^2/2", "x1^2 / 2 + x2^2 / 2"),
            ("(x1 + x2)*x3", "(x1 + x2) * x3"),
            ("x1 - (x2 - x3)", "x1 - (x2 - x3)"),
            ("(x1^2)^3", "(x1^2)^3"),
            ("x1^2^3", "x1^2^3"),
            ("-(x1*x2)", "-(x1 * x2)"),
            ("2*-x1", "2 * -x1"),
            ("exp(-x1/2)", "exp(-x1 / 2)"),
        ];
        for (src, want) in cases {
            assert_eq!(parse(src, 3).unwrap().to_string(), want, "{src}");
        }
    }
}
