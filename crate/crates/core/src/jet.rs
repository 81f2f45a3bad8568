//! Truncated Taylor arithmetic in `n` variables up to third order.
//!
//! A [`Jet`] carries a value together with all partial derivatives of order
//! 1..=`order` at a fixed point. Second and third derivatives are stored as
//! full (symmetric) `n^2` and `n^3` row-major blocks. Every operation yields a
//! jet whose order is the minimum of its inputs' orders, so derivatives that
//! were never available are never fabricated.

use std::ops::{Add, Mul, Neg, Sub};

pub const MAX_ORDER: u8 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    dim: usize,
    order: u8,
    value: f64,
    d1: Vec<f64>,
    d2: Vec<f64>,
    d3: Vec<f64>,
}

/// Jet of a scalar field; the name used by expression evaluation.
pub type ScalarJet = Jet;

fn sizes(dim: usize, order: u8) -> (usize, usize, usize) {
    (
        if order >= 1 { dim } else { 0 },
        if order >= 2 { dim * dim } else { 0 },
        if order >= 3 { dim * dim * dim } else { 0 },
    )
}

impl Jet {
    pub fn constant(dim: usize, value: f64) -> Self {
        Self::constant_with_order(dim, value, MAX_ORDER)
    }

    pub fn constant_with_order(dim: usize, value: f64, order: u8) -> Self {
        assert!(order <= MAX_ORDER);
        let (s1, s2, s3) = sizes(dim, order);
        Jet {
            dim,
            order,
            value,
            d1: vec![0.0; s1],
            d2: vec![0.0; s2],
            d3: vec![0.0; s3],
        }
    }

    /// The coordinate function `x_{index}` (0-based) evaluated at `value`.
    pub fn variable(dim: usize, index: usize, value: f64) -> Self {
        let mut j = Self::constant(dim, value);
        j.d1[index] = 1.0;
        j
    }

    /// Assemble a jet from raw derivative blocks. Block lengths decide the order.
    pub fn from_parts(dim: usize, value: f64, d1: Vec<f64>, d2: Vec<f64>, d3: Vec<f64>) -> Self {
        let order = if d1.is_empty() {
            0
        } else if d2.is_empty() {
            1
        } else if d3.is_empty() {
            2
        } else {
            3
        };
        let (s1, s2, s3) = sizes(dim, order);
        assert!(d1.len() == s1 && d2.len() == s2 && d3.len() == s3, "inconsistent jet blocks");
        Jet {
            dim,
            order,
            value,
            d1,
            d2,
            d3,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn d1(&self) -> &[f64] {
        &self.d1
    }

    pub fn d2(&self) -> &[f64] {
        &self.d2
    }

    pub fn d3(&self) -> &[f64] {
        &self.d3
    }

    pub fn grad(&self, i: usize) -> f64 {
        self.d1[i]
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.d2[i * self.dim + j]
    }

    pub fn third(&self, i: usize, j: usize, k: usize) -> f64 {
        self.d3[(i * self.dim + j) * self.dim + k]
    }

    pub fn truncate(&self, order: u8) -> Jet {
        if order >= self.order {
            return self.clone();
        }
        let (s1, s2, s3) = sizes(self.dim, order);
        Jet {
            dim: self.dim,
            order,
            value: self.value,
            d1: self.d1[..s1].to_vec(),
            d2: self.d2[..s2].to_vec(),
            d3: self.d3[..s3].to_vec(),
        }
    }

    /// The jet of `∂_i` of this field, one order lower.
    pub fn partial(&self, i: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let n = self.dim;
        let d1 = if self.order >= 2 {
            self.d2[i * n..(i + 1) * n].to_vec()
        } else {
            Vec::new()
        };
        let d2 = if self.order >= 3 {
            self.d3[i * n * n..(i + 1) * n * n].to_vec()
        } else {
            Vec::new()
        };
        Jet {
            dim: n,
            order: self.order - 1,
            value: self.d1[i],
            d1,
            d2,
            d3: Vec::new(),
        }
    }

    pub fn scale(&self, c: f64) -> Jet {
        self.map_all(|x| c * x)
    }

    pub fn add_scalar(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.value += c;
        out
    }

    fn map_all(&self, f: impl Fn(f64) -> f64) -> Jet {
        Jet {
            dim: self.dim,
            order: self.order,
            value: f(self.value),
            d1: self.d1.iter().map(|&x| f(x)).collect(),
            d2: self.d2.iter().map(|&x| f(x)).collect(),
            d3: self.d3.iter().map(|&x| f(x)).collect(),
        }
    }

    fn zip(&self, rhs: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        assert_eq!(self.dim, rhs.dim, "jet dimension mismatch");
        let order = self.order.min(rhs.order);
        let (s1, s2, s3) = sizes(self.dim, order);
        Jet {
            dim: self.dim,
            order,
            value: f(self.value, rhs.value),
            d1: (0..s1).map(|i| f(self.d1[i], rhs.d1[i])).collect(),
            d2: (0..s2).map(|i| f(self.d2[i], rhs.d2[i])).collect(),
            d3: (0..s3).map(|i| f(self.d3[i], rhs.d3[i])).collect(),
        }
    }

    /// `self += c * rhs`, truncating to the lower order.
    pub fn add_scaled(&mut self, c: f64, rhs: &Jet) {
        if rhs.order < self.order {
            *self = self.truncate(rhs.order);
        }
        self.value += c * rhs.value;
        for (a, b) in self.d1.iter_mut().zip(&rhs.d1) {
            *a += c * b;
        }
        for (a, b) in self.d2.iter_mut().zip(&rhs.d2) {
            *a += c * b;
        }
        for (a, b) in self.d3.iter_mut().zip(&rhs.d3) {
            *a += c * b;
        }
    }

    pub fn mul_jet(&self, rhs: &Jet) -> Jet {
        assert_eq!(self.dim, rhs.dim, "jet dimension mismatch");
        let n = self.dim;
        let order = self.order.min(rhs.order);
        let (a, b) = (self, rhs);
        let (av, bv) = (a.value, b.value);
        let mut out = Jet::constant_with_order(n, av * bv, order);
        if order >= 1 {
            for i in 0..n {
                out.d1[i] = a.d1[i] * bv + av * b.d1[i];
            }
        }
        if order >= 2 {
            for i in 0..n {
                for j in 0..n {
                    out.d2[i * n + j] = a.d2[i * n + j] * bv
                        + a.d1[i] * b.d1[j]
                        + a.d1[j] * b.d1[i]
                        + av * b.d2[i * n + j];
                }
            }
        }
        if order >= 3 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let ijk = (i * n + j) * n + k;
                        out.d3[ijk] = a.d3[ijk] * bv
                            + a.d2[i * n + j] * b.d1[k]
                            + a.d2[i * n + k] * b.d1[j]
                            + a.d2[j * n + k] * b.d1[i]
                            + a.d1[i] * b.d2[j * n + k]
                            + a.d1[j] * b.d2[i * n + k]
                            + a.d1[k] * b.d2[i * n + j]
                            + av * b.d3[ijk];
                    }
                }
            }
        }
        out
    }

    /// Compose a univariate function with this jet, given the function's
    /// value and first three derivatives at `self.value()`.
    pub fn compose(&self, h: [f64; 4]) -> Jet {
        let n = self.dim;
        let a = self;
        let mut out = Jet::constant_with_order(n, h[0], self.order);
        if self.order >= 1 {
            for i in 0..n {
                out.d1[i] = h[1] * a.d1[i];
            }
        }
        if self.order >= 2 {
            for i in 0..n {
                for j in 0..n {
                    out.d2[i * n + j] = h[2] * a.d1[i] * a.d1[j] + h[1] * a.d2[i * n + j];
                }
            }
        }
        if self.order >= 3 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let ijk = (i * n + j) * n + k;
                        out.d3[ijk] = h[3] * a.d1[i] * a.d1[j] * a.d1[k]
                            + h[2]
                                * (a.d2[i * n + j] * a.d1[k]
                                    + a.d2[i * n + k] * a.d1[j]
                                    + a.d2[j * n + k] * a.d1[i])
                            + h[1] * a.d3[ijk];
                    }
                }
            }
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let x = self.value;
        let r = 1.0 / x;
        self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    pub fn div_jet(&self, rhs: &Jet) -> Jet {
        self.mul_jet(&rhs.recip())
    }

    pub fn exp(&self) -> Jet {
        let e = self.value.exp();
        self.compose([e; 4])
    }

    pub fn ln(&self) -> Jet {
        let x = self.value;
        self.compose([x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn tan(&self) -> Jet {
        let t = self.value.tan();
        let sec2 = 1.0 + t * t;
        self.compose([t, sec2, 2.0 * t * sec2, 2.0 * sec2 * (1.0 + 3.0 * t * t)])
    }

    pub fn sinh(&self) -> Jet {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.compose([s, c, s, c])
    }

    pub fn cosh(&self) -> Jet {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.compose([c, s, c, s])
    }

    pub fn tanh(&self) -> Jet {
        let t = self.value.tanh();
        let s = 1.0 - t * t;
        self.compose([t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0)])
    }

    pub fn sqrt(&self) -> Jet {
        let x = self.value;
        let r = x.sqrt();
        self.compose([r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x)])
    }

    /// `self^p` for a constant exponent. Negative bases require integer `p`.
    pub fn powf(&self, p: f64) -> Jet {
        let x = self.value;
        let pw = |k: f64| if p - k == 0.0 { 1.0 } else { x.powf(p - k) };
        self.compose([
            x.powf(p),
            p * pw(1.0),
            p * (p - 1.0) * pw(2.0),
            p * (p - 1.0) * (p - 2.0) * pw(3.0),
        ])
    }

    /// `self^rhs` with a varying exponent, via `exp(rhs * ln self)`.
    pub fn pow_jet(&self, rhs: &Jet) -> Jet {
        rhs.mul_jet(&self.ln()).exp()
    }

    /// Largest magnitude over the value and every stored derivative.
    pub fn max_abs(&self) -> f64 {
        std::iter::once(self.value)
            .chain(self.d1.iter().copied())
            .chain(self.d2.iter().copied())
            .chain(self.d3.iter().copied())
            .fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_variables_has_exact_partials() {
        let x = Jet::variable(2, 0, 1.5);
        let y = Jet::variable(2, 1, -2.0);
        let p = &(&x * &x) * &y;
        assert_eq!(p.value(), 1.5 * 1.5 * -2.0);
        assert_eq!(p.grad(0), 2.0 * 1.5 * -2.0);
        assert_eq!(p.grad(1), 2.25);
        assert_eq!(p.hess(0, 0), -4.0);
        assert_eq!(p.hess(0, 1), 3.0);
        assert_eq!(p.third(0, 0, 1), 2.0);
        assert_eq!(p.third(0, 1, 0), 2.0);
        assert_eq!(p.third(0, 0, 0), 0.0);
    }

    #[test]
    fn exp_jet_at_origin() {
        let e = Jet::variable(1, 0, 0.0).exp();
        assert_eq!((e.value(), e.grad(0), e.hess(0, 0), e.third(0, 0, 0)), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn partial_lowers_order() {
        let x = Jet::variable(2, 0, 0.3);
        let y = Jet::variable(2, 1, 0.2);
        let f = (&x * &y).sin();
        let fx = f.partial(0);
        assert_eq!(fx.order(), 2);
        assert_eq!(fx.value(), f.grad(0));
        assert_eq!(fx.grad(1), f.hess(0, 1));
        assert_eq!(fx.hess(1, 1), f.third(0, 1, 1));
        assert_eq!(fx.partial(1).partial(0).order(), 0);
    }

    #[test]
    fn mixed_order_arithmetic_truncates() {
        let a = Jet::variable(2, 0, 1.0);
        let b = a.truncate(1);
        let c = &a * &b;
        assert_eq!(c.order(), 1);
        assert!(c.d2().is_empty());
        let mut d = a.clone();
        d.add_scaled(2.0, &b);
        assert_eq!(d.order(), 1);
        assert_eq!(d.grad(0), 3.0);
    }

    #[test]
    fn recip_and_pow_agree() {
        let x = Jet::variable(1, 0, 1.7);
        let a = x.recip();
        let b = x.powf(-1.0);
        for (u, v) in [a.value(), a.grad(0), a.hess(0, 0), a.third(0, 0, 0)]
            .into_iter()
            .zip([b.value(), b.grad(0), b.hess(0, 0), b.third(0, 0, 0)])
        {
            assert!((u - v).abs() < 1e-14);
        }
    }
}
