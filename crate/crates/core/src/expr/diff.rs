use super::{BinOp, Func, Node, ScalarExpr};

impl ScalarExpr {
    /// Symbolic partial derivative with respect to the 0-based variable `var`.
    ///
    /// Only trivial folding is applied (zeros and ones), no simplification.
    pub fn derivative(&self, var: usize) -> ScalarExpr {
        if !self.depends_on(var) {
            return ScalarExpr::zero();
        }
        match self.node() {
            Node::Num(_) => ScalarExpr::zero(),
            Node::Var(i) => {
                if *i == var {
                    ScalarExpr::one()
                } else {
                    ScalarExpr::zero()
                }
            }
            Node::Neg(e) => e.derivative(var).neg(),
            Node::Binary(op, a, b) => {
                let (da, db) = (a.derivative(var), b.derivative(var));
                match op {
                    BinOp::Add => da.add(&db),
                    BinOp::Sub => da.sub(&db),
                    BinOp::Mul => da.mul(b).add(&a.mul(&db)),
                    BinOp::Div => da.div(b).sub(&a.mul(&db).div(&b.powi(2))),
                    BinOp::Pow => {
                        if let Some(k) = b.as_constant() {
                            b.mul(&a.pow(&ScalarExpr::num(k - 1.0))).mul(&da)
                        } else {
                            self.mul(&db.mul(&a.log()).add(&b.mul(&da).div(a)))
                        }
                    }
                }
            }
            Node::Call(func, a) => {
                let da = a.derivative(var);
                let outer = match func {
                    Func::Exp => self.clone(),
                    Func::Log => return da.div(a),
                    Func::Sin => ScalarExpr::call(Func::Cos, a.clone()),
                    Func::Cos => ScalarExpr::call(Func::Sin, a.clone()).neg(),
                    Func::Tan => return da.div(&ScalarExpr::call(Func::Cos, a.clone()).powi(2)),
                    Func::Sinh => ScalarExpr::call(Func::Cosh, a.clone()),
                    Func::Cosh => ScalarExpr::call(Func::Sinh, a.clone()),
                    Func::Tanh => ScalarExpr::one().sub(&self.powi(2)),
                    Func::Sqrt => return da.div(&self.scale(2.0)),
                };
                outer.mul(&da)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    fn central(src: &str, p: &[f64], var: usize) -> f64 {
        let e = parse(src, p.len()).unwrap();
        let h = 1e-6;
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[var] += h;
        b[var] -= h;
        (e.eval(&a) - e.eval(&b)) / (2.0 * h)
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let p = [0.4, 0.7];
        for src in [
            "x1^3*x2",
            "exp(x1*x2)/(1 + x2^2)",
            "log(1 + x1^2) - sqrt(2 + x2)",
            "tan(x1) + tanh(x2*x1) + sinh(x1) * cosh(x2)",
            "x1^x2",
            "-sin(x1)^2 * cos(x2)",
        ] {
            let e = parse(src, 2).unwrap();
            for var in 0..2 {
                let d = e.derivative(var).eval(&p);
                let fd = central(src, &p, var);
                assert!((d - fd).abs() < 1e-7 * (1.0 + fd.abs()), "{src} d{var}: {d} vs {fd}");
            }
        }
    }

    #[test]
    fn derivative_of_independent_expression_is_literal_zero() {
        let e = parse("sin(x2)", 2).unwrap();
        assert!(e.derivative(0).is_zero());
    }
}
