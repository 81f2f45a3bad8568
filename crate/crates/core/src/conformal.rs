//! Conformal rescalings `g̃ = e^{−2u} g` and the transformation laws of the
//! Schouten, Cotton and Ricci tensors under them.
//!
//! The rescaled metric is assembled from expression trees, so its jets are as
//! exact as those of the base metric.

use crate::curvature::{CurvatureError, Geometry, MetricField, MetricJet, Residual};
use crate::expr::ScalarExpr;
use crate::gqe::GqeData;
use crate::jet::Jet;
use crate::tensor::{TensorValue, Variance};

/// `e^{−2u} g` with entries built as expression products.
pub fn conformal_metric(m: &MetricField, u: &ScalarExpr) -> Result<MetricField, CurvatureError> {
    let factor = u.scale(-2.0).exp();
    MetricField::from_upper(m.dim(), m.domain().clone(), |i, j| factor.mul(m.entry(i, j)))
}

/// A base metric, a conformal potential and the rescaled metric.
#[derive(Debug, Clone)]
pub struct ConformalPair {
    pub base: MetricField,
    pub u: ScalarExpr,
    pub rescaled: MetricField,
}

impl ConformalPair {
    pub fn new(base: MetricField, u: ScalarExpr) -> Result<Self, CurvatureError> {
        let rescaled = conformal_metric(&base, &u)?;
        Ok(ConformalPair { base, u, rescaled })
    }

    /// `u = f/(n−2)`, so that `g̃ = e^{−2f/(n−2)} g`.
    pub fn from_potential(base: MetricField, f: &ScalarExpr) -> Result<Self, CurvatureError> {
        let n = base.dim();
        if n < 3 {
            return Err(CurvatureError::DimensionTooSmall {
                what: "conformal potential rescaling",
                min: 3,
                dim: n,
            });
        }
        let u = f.scale(1.0 / (n as f64 - 2.0));
        Self::new(base, u)
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Geometry of both metrics and the jet of `u` at `p`.
    pub fn at(&self, p: &[f64]) -> Result<PairAtPoint, CurvatureError> {
        let base = Geometry::new(MetricJet::new(&self.base, p)?);
        let rescaled = Geometry::new(MetricJet::new(&self.rescaled, p)?);
        let u = self.u.eval_jet(p).map_err(|source| CurvatureError::Eval {
            point: p.to_vec(),
            source,
        })?;
        Ok(PairAtPoint { base, rescaled, u })
    }
}

pub struct PairAtPoint {
    pub base: Geometry,
    pub rescaled: Geometry,
    pub u: Jet,
}

/// `S̃ − (S + ∇²u + du⊗du − ½|∇u|² g)`, right-hand side in the base metric.
pub fn schouten_conformal_residual(pair: &ConformalPair, p: &[f64]) -> Result<Residual, CurvatureError> {
    let at = pair.at(p)?;
    let g = &at.base;
    let s = g.schouten()?;
    let s_tilde = at.rescaled.schouten()?;
    let du = g.gradient(&at.u);
    let hess = g.hessian(&at.u);
    let rhs = s
        .add(&hess)
        .add(&du.outer(&du))
        .axpy(-0.5 * g.grad_norm_sq(&at.u), &g.metric().g);
    Ok(Residual::new(s_tilde.sub(&rhs), &[&s_tilde, &s, &hess]))
}

/// Contraction of the Weyl tensor with `∇v` (raised by `geom`'s metric).
///
/// `placement` maps the free indices `(a, b, c)` and the contracted `d` to
/// the four Weyl slots.
fn weyl_along(
    geom: &Geometry,
    v: &Jet,
    placement: fn(usize, usize, usize, usize) -> [usize; 4],
) -> Result<TensorValue, CurvatureError> {
    let n = geom.dim();
    let w = geom.weyl()?;
    let grad = geom.metric().sharp(v.d1());
    Ok(TensorValue::from_fn(n, &[Variance::Covariant; 3], |i| {
        (0..n).map(|d| w.get(&placement(i[0], i[1], i[2], d)) * grad[d]).sum()
    }))
}

/// `W_cbad`: the placement under which the Cotton law holds.
fn cbad(a: usize, b: usize, c: usize, d: usize) -> [usize; 4] {
    [c, b, a, d]
}

/// `W_abcd`: kept for the negative control.
fn abcd(a: usize, b: usize, c: usize, d: usize) -> [usize; 4] {
    [a, b, c, d]
}

/// The Cotton law is stated for `Ĉ = C/(n−2)²`, i.e. `(n−2)Ĉ = ∇_c S_ab − ∇_b S_ac`.
/// Returns `(n−2)Ĉ̃ − (n−2)Ĉ − W(∇v)` for the given Weyl placement.
fn cotton_law(at: &PairAtPoint, v: &Jet, coeff: f64, placement: fn(usize, usize, usize, usize) -> [usize; 4]) -> Result<Residual, CurvatureError> {
    let k = 1.0 / (at.base.dim() as f64 - 2.0);
    let c = at.base.cotton().scale(k);
    let c_tilde = at.rescaled.cotton().scale(k);
    let wv = weyl_along(&at.base, v, placement)?.scale(coeff);
    Ok(Residual::new(c_tilde.sub(&c).sub(&wv), &[&c_tilde, &c, &wv]))
}

/// `(n−2)C̃ − (n−2)C − W_cbad ∇^d u` in the normalization `(n−2)C = ∇_c S_ab − ∇_b S_ac`,
/// with `∇^d u` raised by the base metric. In dimension three this is `C̃ − C`
/// up to a constant factor.
pub fn cotton_conformal_residual(pair: &ConformalPair, p: &[f64]) -> Result<Residual, CurvatureError> {
    let at = pair.at(p)?;
    cotton_law(&at, &at.u, 1.0, cbad)
}

/// Same law with the Weyl slots read as `W_abcd ∇^d u`. This reading does not
/// hold for generic metrics; it exists so tests can show that.
pub fn cotton_conformal_residual_abcd(pair: &ConformalPair, p: &[f64]) -> Result<Residual, CurvatureError> {
    let at = pair.at(p)?;
    cotton_law(&at, &at.u, 1.0, abcd)
}

/// Potential form for `g̃ = e^{−2f/(n−2)} g`:
/// `(n−2)C̃ − (n−2)C − W_cbad ∇^d f / (n−2)`.
pub fn cotton_conformal_residual_potential(
    m: &MetricField,
    f: &ScalarExpr,
    p: &[f64],
) -> Result<Residual, CurvatureError> {
    let pair = ConformalPair::from_potential(m.clone(), f)?;
    let at = pair.at(p)?;
    let fj = at.u.scale(pair.dim() as f64 - 2.0);
    cotton_law(&at, &fj, 1.0 / (pair.dim() as f64 - 2.0), cbad)
}

fn potential_terms(g: &Geometry, f: &Jet) -> (TensorValue, TensorValue, f64, f64) {
    let df = g.gradient(f);
    (g.hessian(f), df.outer(&df), g.laplacian(f), g.grad_norm_sq(f))
}

/// `Ric_g̃ − [Ric + ∇²f + df⊗df/(n−2) + (Δf − |∇f|²) g/(n−2)]` for
/// `g̃ = e^{−2f/(n−2)} g`.
pub fn ricci_conformal_residual(m: &MetricField, f: &ScalarExpr, p: &[f64]) -> Result<Residual, CurvatureError> {
    let pair = ConformalPair::from_potential(m.clone(), f)?;
    let at = pair.at(p)?;
    let k = 1.0 / (pair.dim() as f64 - 2.0);
    let fj = at.u.scale(pair.dim() as f64 - 2.0);
    let g = &at.base;
    let (hess, dfdf, lap, grad_sq) = potential_terms(g, &fj);
    let ric = g.ricci();
    let ric_tilde = at.rescaled.ricci();
    let rhs = ric
        .add(&hess)
        .axpy(k, &dfdf)
        .axpy(k * (lap - grad_sq), &g.metric().g);
    Ok(Residual::new(ric_tilde.sub(&rhs), &[&ric_tilde, &ric, &hess, &dfdf]))
}

/// For a GQE structure, `Ric_g̃ − (μ + 1/(n−2)) df⊗df
/// − (Δf − |∇f|² + (n−2)λ) e^{2f/(n−2)} g̃ / (n−2)`.
pub fn gqe_conformal_ricci_residual(m: &MetricField, d: &GqeData, p: &[f64]) -> Result<Residual, CurvatureError> {
    let pair = ConformalPair::from_potential(m.clone(), &d.f)?;
    let at = pair.at(p)?;
    let n = pair.dim() as f64;
    let k = 1.0 / (n - 2.0);
    let fj = at.u.scale(n - 2.0);
    let (mu, lambda) = (d.mu.eval(p), d.lambda.eval(p));
    let (_, dfdf, lap, grad_sq) = potential_terms(&at.base, &fj);
    let ric_tilde = at.rescaled.ricci();
    let g_tilde = &at.rescaled.metric().g;
    let coeff = k * (lap - grad_sq + (n - 2.0) * lambda) * (2.0 * k * fj.value()).exp();
    let rhs = dfdf.scale(mu + k).axpy(coeff, g_tilde);
    Ok(Residual::new(ric_tilde.sub(&rhs), &[&ric_tilde, &rhs]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::ChartDomain;
    use crate::zoo;

    fn expr(s: &str, n: usize) -> ScalarExpr {
        crate::expr::parse(s, n).unwrap()
    }

    #[test]
    fn zero_potential_is_identity() {
        let m = zoo::random_metric(4, 3).unwrap();
        let pair = ConformalPair::new(m.clone(), ScalarExpr::zero()).unwrap();
        let p = [0.1, 0.2, -0.3, 0.4];
        assert_eq!(pair.rescaled.at(&p).unwrap(), m.at(&p).unwrap());
        assert_eq!(schouten_conformal_residual(&pair, &p).unwrap().tensor.max_abs(), 0.0);
    }

    #[test]
    fn rescaled_entries_match_pointwise_product() {
        let m = zoo::random_metric(3, 5).unwrap();
        let u = expr("0.3*sin(x1)*x2", 3);
        let pair = ConformalPair::new(m.clone(), u.clone()).unwrap();
        let p = [0.4, -0.7, 0.2];
        let scale = (-2.0 * u.eval(&p)).exp();
        let (g, gt) = (m.at(&p).unwrap(), pair.rescaled.at(&p).unwrap());
        for a in 0..3 {
            for b in 0..3 {
                assert!((gt.g(a, b) - scale * g.g(a, b)).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn stereographic_sphere_from_flat_space() {
        let n = 3;
        let flat = MetricField::conformally_flat(n, ScalarExpr::one(), ChartDomain::cube(n, 1.0)).unwrap();
        let u = expr("-log(2/(1 + x1^2 + x2^2 + x3^2))", n);
        let sphere = conformal_metric(&flat, &u).unwrap();
        let geo = Geometry::new(MetricJet::new(&sphere, &[0.3, -0.2, 0.5]).unwrap());
        assert!((geo.scalar() - 6.0).abs() < 1e-10);
    }

    #[test]
    fn constant_potential_is_a_homothety() {
        let m = zoo::random_metric(4, 11).unwrap();
        let c = 0.35;
        let pair = ConformalPair::new(m, ScalarExpr::num(c)).unwrap();
        let at = pair.at(&[0.2, 0.1, -0.4, 0.3]).unwrap();
        let scaled = at.base.riemann().scale((-2.0 * c).exp());
        assert!(at.rescaled.riemann().sub(&scaled).max_abs() < 1e-12);
        assert!((at.rescaled.scalar() - (2.0 * c).exp() * at.base.scalar()).abs() < 1e-10);
    }

    #[test]
    fn schouten_law_on_flat_base() {
        let n = 4;
        let flat = MetricField::conformally_flat(n, ScalarExpr::one(), ChartDomain::cube(n, 1.0)).unwrap();
        let pair = ConformalPair::new(flat, expr("0.4*x1*x2 + 0.2*cos(x3 + x4)", n)).unwrap();
        let r = schouten_conformal_residual(&pair, &[0.3, 0.1, -0.2, 0.6]).unwrap();
        assert!(r.tensor.max_abs() < 1e-10, "{}", r.scaled);
    }

    #[test]
    fn three_dimensional_cotton_is_invariant() {
        let m = zoo::random_metric(3, 21).unwrap();
        let pair = ConformalPair::new(m, zoo::random_function(3, 4, 0.4)).unwrap();
        let r = cotton_conformal_residual(&pair, &[0.1, -0.5, 0.3]).unwrap();
        assert!(r.scaled < 1e-8, "{}", r.scaled);
    }

    #[test]
    fn cotton_law_forms_agree_on_the_remark_instance() {
        let inst = zoo::remark_counterexample(2, 4).unwrap();
        let f = inst.gqe.unwrap().f;
        let p = [0.7, -0.2, 0.3, 0.1];
        let pair = ConformalPair::from_potential(inst.metric.clone(), &f).unwrap();
        let general = cotton_conformal_residual(&pair, &p).unwrap();
        let potential = cotton_conformal_residual_potential(&inst.metric, &f, &p).unwrap();
        assert!(general.scaled < 1e-10 && potential.scaled < 1e-10);
        // Base Cotton vanishes, so the rescaled Cotton tensor is carried by W(∇f).
        let c_tilde = pair.at(&p).unwrap().rescaled.cotton();
        assert!(c_tilde.max_abs() > 1e-3);
    }

    #[test]
    fn cotton_law_needs_the_cbad_placement() {
        for n in [4, 5] {
            let m = zoo::random_metric(n, 5).unwrap();
            let pair = ConformalPair::new(m, zoo::random_function(n, 3, 0.4)).unwrap();
            let p: Vec<f64> = (0..n).map(|i| 0.1 * i as f64 - 0.15).collect();
            assert!(cotton_conformal_residual(&pair, &p).unwrap().scaled < 1e-10);
            assert!(cotton_conformal_residual_abcd(&pair, &p).unwrap().scaled > 1e-4);
        }
    }

    #[test]
    fn ricci_law_flat_gaussian_potential() {
        let n = 4;
        let flat = MetricField::conformally_flat(n, ScalarExpr::one(), ChartDomain::cube(n, 2.0)).unwrap();
        let f = ScalarExpr::squared_norm(0..n).scale(0.5);
        let r = ricci_conformal_residual(&flat, &f, &[0.5, -0.3, 0.2, 1.1]).unwrap();
        assert!(r.scaled < 1e-9, "{}", r.scaled);
    }

    #[test]
    fn ricci_law_constant_potential() {
        let m = zoo::random_metric(5, 2).unwrap();
        let r = ricci_conformal_residual(&m, &ScalarExpr::num(0.7), &[0.1, 0.2, 0.3, -0.4, 0.0]).unwrap();
        assert!(r.tensor.max_abs() < 1e-11);
    }

    #[test]
    fn composition_of_rescalings() {
        let m = zoo::random_metric(4, 8).unwrap();
        let (u, v) = (zoo::random_function(4, 1, 0.3), zoo::random_function(4, 2, 0.3));
        let twice = conformal_metric(&conformal_metric(&m, &u).unwrap(), &v).unwrap();
        let once = conformal_metric(&m, &u.add(&v)).unwrap();
        let p = [0.3, -0.1, 0.2, 0.5];
        let a = Geometry::new(MetricJet::new(&twice, &p).unwrap()).pack();
        let b = Geometry::new(MetricJet::new(&once, &p).unwrap()).pack();
        assert!(a.riemann.sub(&b.riemann).max_abs() < 1e-10);
        assert!(a.cotton.sub(&b.cotton).max_abs() < 1e-10);
        assert!((a.scalar - b.scalar).abs() < 1e-10);
    }

    #[test]
    fn gqe_form_of_conformal_ricci() {
        for key in ["gaussian:4", "remark:2,4", "warped-gqe:4,sphere", "almost-soliton:4"] {
            let inst = zoo::lookup(key).unwrap();
            let r = gqe_conformal_ricci_residual(&inst.metric, inst.gqe.as_ref().unwrap(), &[0.3, 0.2, -0.1, 0.25]).unwrap();
            assert!(r.scaled < 1e-8, "{key}: {}", r.scaled);
        }
    }
}
