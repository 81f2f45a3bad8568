use serde::Serialize;

use super::{CurvatureError, MetricJet, TensorJet};
use crate::jet::Jet;
use crate::tensor::{MetricAtPoint, TensorValue, Variance};

use Variance::{Contravariant as Up, Covariant as Down};

/// Curvature of a metric at one point, built from its third-order jet.
///
/// Connection coefficients are kept to second order and the Riemann, Ricci
/// and scalar curvature to first order, so one covariant derivative of any
/// curvature quantity is available without differencing.
#[derive(Debug, Clone)]
pub struct Geometry {
    jet: MetricJet,
    gamma: TensorJet,
    riemann: TensorJet,
    ricci: TensorJet,
    scalar: Jet,
}

impl Geometry {
    pub fn new(jet: MetricJet) -> Self {
        let n = jet.dim();
        // Γ_dab = ½(∂_a g_db + ∂_b g_da − ∂_d g_ab)
        let lowered = TensorJet::from_fn(n, &[Down, Down, Down], |i| {
            let (d, a, b) = (i[0], i[1], i[2]);
            let mut acc = jet.g_jet(d, b).partial(a);
            acc.add_scaled(1.0, &jet.g_jet(d, a).partial(b));
            acc.add_scaled(-1.0, &jet.g_jet(a, b).partial(d));
            acc.scale(0.5)
        });
        let gamma = TensorJet::from_fn(n, &[Up, Down, Down], |i| {
            let (c, a, b) = (i[0], i[1], i[2]);
            let mut acc = Jet::constant_with_order(n, 0.0, 2);
            for d in 0..n {
                acc.add_scaled(1.0, &(jet.g_inv_jet(c, d) * lowered.get(&[d, a, b])));
            }
            acc
        });
        // R^d_abc = ∂_b Γ^d_ac − ∂_a Γ^d_bc + Γ^e_ac Γ^d_be − Γ^e_bc Γ^d_ae
        let mixed = TensorJet::from_fn(n, &[Up, Down, Down, Down], |i| {
            let (d, a, b, c) = (i[0], i[1], i[2], i[3]);
            let mut acc = gamma.get(&[d, a, c]).partial(b);
            acc.add_scaled(-1.0, &gamma.get(&[d, b, c]).partial(a));
            for e in 0..n {
                acc.add_scaled(1.0, &(gamma.get(&[e, a, c]) * gamma.get(&[d, b, e])));
                acc.add_scaled(-1.0, &(gamma.get(&[e, b, c]) * gamma.get(&[d, a, e])));
            }
            acc
        });
        let riemann = TensorJet::from_fn(n, &[Down, Down, Down, Down], |i| {
            let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
            let mut acc = Jet::constant_with_order(n, 0.0, 1);
            for e in 0..n {
                acc.add_scaled(1.0, &(jet.g_jet(d, e) * mixed.get(&[e, a, b, c])));
            }
            acc
        });
        let ricci = TensorJet::from_fn(n, &[Down, Down], |i| {
            let (a, c) = (i[0], i[1]);
            let mut acc = Jet::constant_with_order(n, 0.0, 1);
            for b in 0..n {
                for d in 0..n {
                    acc.add_scaled(1.0, &(jet.g_inv_jet(b, d) * riemann.get(&[a, b, c, d])));
                }
            }
            acc
        });
        let mut scalar = Jet::constant_with_order(n, 0.0, 1);
        for a in 0..n {
            for c in 0..n {
                scalar.add_scaled(1.0, &(jet.g_inv_jet(a, c) * ricci.get(&[a, c])));
            }
        }
        Geometry {
            jet,
            gamma,
            riemann,
            ricci,
            scalar,
        }
    }

    pub fn dim(&self) -> usize {
        self.jet.dim()
    }

    pub fn metric_jet(&self) -> &MetricJet {
        &self.jet
    }

    pub fn metric(&self) -> &MetricAtPoint {
        self.jet.at()
    }

    pub fn point(&self) -> &[f64] {
        self.jet.point()
    }

    /// Metric `g_ab` as a field jet (third order).
    pub fn metric_field(&self) -> TensorJet {
        TensorJet::from_fn(self.dim(), &[Down, Down], |i| self.jet.g_jet(i[0], i[1]).clone())
    }

    pub fn gamma_jet(&self) -> &TensorJet {
        &self.gamma
    }

    pub fn christoffel(&self) -> TensorValue {
        self.gamma.values()
    }

    pub fn riemann_jet(&self) -> &TensorJet {
        &self.riemann
    }

    pub fn riemann(&self) -> TensorValue {
        self.riemann.values()
    }

    pub fn ricci_jet(&self) -> &TensorJet {
        &self.ricci
    }

    pub fn ricci(&self) -> TensorValue {
        self.ricci.values()
    }

    pub fn scalar_jet(&self) -> &Jet {
        &self.scalar
    }

    pub fn scalar(&self) -> f64 {
        self.scalar.value()
    }

    fn require_dim(&self, what: &'static str, min: usize) -> Result<(), CurvatureError> {
        if self.dim() < min {
            return Err(CurvatureError::DimensionTooSmall {
                what,
                min,
                dim: self.dim(),
            });
        }
        Ok(())
    }

    pub fn weyl_jet(&self) -> Result<TensorJet, CurvatureError> {
        self.require_dim("Weyl tensor", 3)?;
        let n = self.dim();
        let nf = n as f64;
        let g = |a: usize, b: usize| self.jet.g_jet(a, b);
        let ric = |a: usize, b: usize| self.ricci.get(&[a, b]);
        let k1 = 1.0 / ((nf - 1.0) * (nf - 2.0));
        let k2 = -1.0 / (nf - 2.0);
        Ok(TensorJet::from_fn(n, &[Down, Down, Down, Down], |i| {
            let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
            let mut acc = self.riemann.get(i).clone();
            let kulkarni = &(g(a, c) * g(b, d)) - &(g(a, d) * g(b, c));
            acc.add_scaled(k1, &(&self.scalar * &kulkarni));
            acc.add_scaled(k2, &(ric(a, c) * g(b, d)));
            acc.add_scaled(-k2, &(ric(a, d) * g(b, c)));
            acc.add_scaled(k2, &(ric(b, d) * g(a, c)));
            acc.add_scaled(-k2, &(ric(b, c) * g(a, d)));
            acc
        }))
    }

    pub fn weyl(&self) -> Result<TensorValue, CurvatureError> {
        Ok(self.weyl_jet()?.values())
    }

    /// `S = (Ric − R g / (2(n−1))) / (n−2)`
    pub fn schouten_jet(&self) -> Result<TensorJet, CurvatureError> {
        self.require_dim("Schouten tensor", 3)?;
        let n = self.dim();
        let nf = n as f64;
        Ok(TensorJet::from_fn(n, &[Down, Down], |i| {
            let mut acc = self.ricci.get(i).clone();
            acc.add_scaled(-1.0 / (2.0 * (nf - 1.0)), &(&self.scalar * self.jet.g_jet(i[0], i[1])));
            acc.scale(1.0 / (nf - 2.0))
        }))
    }

    pub fn schouten(&self) -> Result<TensorValue, CurvatureError> {
        Ok(self.schouten_jet()?.values())
    }

    /// `∇_c R_ab`, stored as `[a][b][c]`.
    pub fn nabla_ricci(&self) -> TensorValue {
        self.ricci.covariant_derivative(&self.gamma).values()
    }

    /// `∇_c S_ab`, stored as `[a][b][c]`.
    pub fn nabla_schouten(&self) -> Result<TensorValue, CurvatureError> {
        Ok(self.schouten_jet()?.covariant_derivative(&self.gamma).values())
    }

    /// `∇_a R`
    pub fn grad_scalar(&self) -> TensorValue {
        TensorValue::from_components(self.dim(), &[Down], self.scalar.d1().to_vec())
    }

    /// `C_abc = ∇_c R_ab − ∇_b R_ac − (∇_c R g_ab − ∇_b R g_ac) / (2(n−1))`
    pub fn cotton(&self) -> TensorValue {
        let n = self.dim();
        let nr = self.nabla_ricci();
        let dr = self.scalar.d1();
        let k = 1.0 / (2.0 * (n as f64 - 1.0));
        let g = |a: usize, b: usize| self.jet.g(a, b);
        TensorValue::from_fn(n, &[Down, Down, Down], |i| {
            let (a, b, c) = (i[0], i[1], i[2]);
            nr.get(&[a, b, c]) - nr.get(&[a, c, b]) - k * (dr[c] * g(a, b) - dr[b] * g(a, c))
        })
    }

    /// `∇^d W_abcd` (divergence on the last slot).
    pub fn div_weyl(&self) -> Result<TensorValue, CurvatureError> {
        self.require_dim("divergence of the Weyl tensor", 4)?;
        let n = self.dim();
        let nw = self.weyl_jet()?.covariant_derivative(&self.gamma).values();
        Ok(TensorValue::from_fn(n, &[Down, Down, Down], |i| {
            let mut acc = 0.0;
            for d in 0..n {
                for e in 0..n {
                    acc += self.jet.g_inv(d, e) * nw.get(&[i[0], i[1], i[2], d, e]);
                }
            }
            acc
        }))
    }

    /// Differential of a scalar field as a field jet (one order below `f`).
    pub fn differential(&self, f: &Jet) -> TensorJet {
        TensorJet::from_fn(self.dim(), &[Down], |i| f.partial(i[0]))
    }

    /// `∇²f_ab = ∂_a∂_b f − Γ^c_ab ∂_c f` as a field jet.
    pub fn hessian_jet(&self, f: &Jet) -> TensorJet {
        self.differential(f).covariant_derivative(&self.gamma)
    }

    pub fn hessian(&self, f: &Jet) -> TensorValue {
        self.hessian_jet(f).values()
    }

    pub fn gradient(&self, f: &Jet) -> TensorValue {
        TensorValue::from_components(self.dim(), &[Down], f.d1().to_vec())
    }

    /// `Δf = g^{ab} ∇²f_ab`
    pub fn laplacian(&self, f: &Jet) -> f64 {
        let h = self.hessian(f);
        let n = self.dim();
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                acc += self.jet.g_inv(a, b) * h.get(&[a, b]);
            }
        }
        acc
    }

    /// `|∇f|² = g^{ab} ∂_a f ∂_b f`
    pub fn grad_norm_sq(&self, f: &Jet) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                acc += self.jet.g_inv(a, b) * f.grad(a) * f.grad(b);
            }
        }
        acc
    }

    /// `∇_c∇_b∇_a u`, stored as `[a][b][c]`.
    pub fn third_covariant_derivative(&self, u: &Jet) -> TensorValue {
        self.hessian_jet(u).covariant_derivative(&self.gamma).values()
    }

    pub fn pack(&self) -> CurvaturePack {
        CurvaturePack {
            dim: self.dim(),
            point: self.point().to_vec(),
            metric: self.metric().g.clone(),
            christoffel: self.christoffel(),
            riemann: self.riemann(),
            ricci: self.ricci(),
            scalar: self.scalar(),
            weyl: self.weyl().ok(),
            schouten: self.schouten().ok(),
            cotton: self.cotton(),
            nabla_ricci: self.nabla_ricci(),
            grad_scalar: self.grad_scalar(),
            div_weyl: self.div_weyl().ok(),
        }
    }
}

/// Curvature quantities at a point, as plain values.
#[derive(Debug, Clone, Serialize)]
pub struct CurvaturePack {
    pub dim: usize,
    pub point: Vec<f64>,
    pub metric: TensorValue,
    pub christoffel: TensorValue,
    pub riemann: TensorValue,
    pub ricci: TensorValue,
    pub scalar: f64,
    pub weyl: Option<TensorValue>,
    pub schouten: Option<TensorValue>,
    pub cotton: TensorValue,
    pub nabla_ricci: TensorValue,
    pub grad_scalar: TensorValue,
    pub div_weyl: Option<TensorValue>,
}
