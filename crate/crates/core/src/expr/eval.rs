use thiserror::Error;

use super::{BinOp, Func, Node, ScalarExpr};
use crate::jet::Jet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("point has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("expression references x{var} but the point has dimension {dim}")]
    VariableOutOfRange { var: usize, dim: usize },
    #[error("{reason} in `{subexpr}`")]
    Domain { reason: String, subexpr: String },
}

fn domain(reason: &str, e: &ScalarExpr) -> EvalError {
    EvalError::Domain {
        reason: reason.to_string(),
        subexpr: e.to_string(),
    }
}

impl ScalarExpr {
    /// Evaluate value and all partials up to third order at `p`.
    ///
    /// Fails on points outside the smooth domain of any node (logarithm or
    /// square root of a nonpositive value, zero denominators, poles of `tan`,
    /// non-integer powers of negative bases).
    pub fn eval_jet(&self, p: &[f64]) -> Result<Jet, EvalError> {
        if let Some(v) = self.max_var() {
            if v >= p.len() {
                return Err(EvalError::VariableOutOfRange {
                    var: v + 1,
                    dim: p.len(),
                });
            }
        }
        self.jet_rec(p)
    }

    fn jet_rec(&self, p: &[f64]) -> Result<Jet, EvalError> {
        let n = p.len();
        let out = match self.node() {
            Node::Num(v) => Jet::constant(n, *v),
            Node::Var(i) => Jet::variable(n, *i, p[*i]),
            Node::Neg(e) => -&e.jet_rec(p)?,
            Node::Binary(op, a, b) => {
                let ja = a.jet_rec(p)?;
                match op {
                    BinOp::Add => &ja + &b.jet_rec(p)?,
                    BinOp::Sub => &ja - &b.jet_rec(p)?,
                    BinOp::Mul => &ja * &b.jet_rec(p)?,
                    BinOp::Div => {
                        let jb = b.jet_rec(p)?;
                        if jb.value() == 0.0 {
                            return Err(domain("division by zero", self));
                        }
                        ja.div_jet(&jb)
                    }
                    BinOp::Pow => {
                        if let Some(k) = b.as_constant() {
                            let x = ja.value();
                            if x < 0.0 && k.fract() != 0.0 {
                                return Err(domain("non-integer power of a negative base", self));
                            }
                            if x == 0.0 && !(k.fract() == 0.0 && k >= 0.0) {
                                return Err(domain("non-smooth power at zero", self));
                            }
                            ja.powf(k)
                        } else {
                            if ja.value() <= 0.0 {
                                return Err(domain("variable exponent needs a positive base", self));
                            }
                            ja.pow_jet(&b.jet_rec(p)?)
                        }
                    }
                }
            }
            Node::Call(func, a) => {
                let ja = a.jet_rec(p)?;
                let x = ja.value();
                match func {
                    Func::Exp => ja.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(domain("logarithm of a nonpositive value", self));
                        }
                        ja.ln()
                    }
                    Func::Sin => ja.sin(),
                    Func::Cos => ja.cos(),
                    Func::Tan => {
                        if x.cos().abs() < 1e-300 {
                            return Err(domain("pole of tan", self));
                        }
                        ja.tan()
                    }
                    Func::Sinh => ja.sinh(),
                    Func::Cosh => ja.cosh(),
                    Func::Tanh => ja.tanh(),
                    Func::Sqrt => {
                        if x <= 0.0 {
                            return Err(domain("square root of a nonpositive value", self));
                        }
                        ja.sqrt()
                    }
                }
            }
        };
        if !out.value().is_finite() {
            return Err(domain("non-finite value", self));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    #[test]
    fn half_squared_norm() {
        let e = parse("(x1^2 + x2^2 + x3^2)/2", 3).unwrap();
        let j = e.eval_jet(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(j.value(), 7.0);
        assert_eq!(j.d1(), &[1.0, 2.0, 3.0]);
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(j.hess(a, b), if a == b { 1.0 } else { 0.0 });
            }
        }
        assert!(j.d3().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let e = parse("1 + log(x1 - 2)", 1).unwrap();
        let err = e.eval_jet(&[1.0]).unwrap_err();
        assert_eq!(err.to_string(), "logarithm of a nonpositive value in `log(x1 - 2)`");
        let e = parse("x1/(x1 - 1)", 1).unwrap();
        assert!(e.eval_jet(&[1.0]).is_err());
        let e = parse("sqrt(x1)", 1).unwrap();
        assert!(e.eval_jet(&[0.0]).is_err());
        let e = parse("x1^0.5", 1).unwrap();
        assert!(e.eval_jet(&[-1.0]).is_err());
        assert!(parse("x1^2", 1).unwrap().eval_jet(&[-1.0]).is_ok());
    }

    #[test]
    fn dimension_is_checked() {
        let e = parse("x3", 3).unwrap();
        assert!(e.eval_jet(&[1.0, 2.0]).is_err());
    }
}
