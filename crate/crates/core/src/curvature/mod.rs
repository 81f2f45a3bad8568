//! Curvature of a metric given in a single coordinate chart.
//!
//! Sign convention: `Riem(X,Y)Z = ∇_Y∇_X Z − ∇_X∇_Y Z + ∇_[X,Y] Z`, with
//! `R_abcd = g_de R^e_abc`. Under this convention the round sphere has
//! `R_abcd v^a w^b v^c w^d > 0`, and `R_abcd = g_ac g_bd − g_ad g_bc` for the
//! unit sphere.

mod field;
mod geometry;
mod metric;

pub use field::TensorJet;
pub use geometry::{CurvaturePack, Geometry};
pub use metric::{ChartDomain, DomainSpec, MetricField, MetricJet};

use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::tensor::{TensorError, TensorValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },
    #[error("metric is degenerate at {point:?}: {source}")]
    Degenerate {
        point: Vec<f64>,
        #[source]
        source: TensorError,
    },
    #[error("metric evaluation failed at {point:?}: {source}")]
    Eval {
        point: Vec<f64>,
        #[source]
        source: EvalError,
    },
    #[error("invalid metric field: {0}")]
    InvalidField(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{what} needs dimension at least {min}, got {dim}")]
    DimensionTooSmall { what: &'static str, min: usize, dim: usize },
}

/// Metric jet of `field` at `p` (value and partials to third order).
pub fn metric_jet(field: &MetricField, p: &[f64]) -> Result<MetricJet, CurvatureError> {
    MetricJet::new(field, p)
}

/// `Γ^c_ab`, stored with the upper index first.
pub fn christoffel(jet: &MetricJet) -> TensorValue {
    Geometry::new(jet.clone()).christoffel()
}

/// Riemann tensor `R_abcd`.
pub fn riemann(jet: &MetricJet) -> TensorValue {
    Geometry::new(jet.clone()).riemann()
}

/// Ricci tensor `R_ac = g^{bd} R_abcd`.
pub fn ricci(jet: &MetricJet) -> TensorValue {
    Geometry::new(jet.clone()).ricci()
}

pub fn scalar_curvature(jet: &MetricJet) -> f64 {
    Geometry::new(jet.clone()).scalar()
}

pub fn weyl(jet: &MetricJet) -> Result<TensorValue, CurvatureError> {
    Geometry::new(jet.clone()).weyl()
}

pub fn cotton(jet: &MetricJet) -> TensorValue {
    Geometry::new(jet.clone()).cotton()
}

pub fn div_weyl(jet: &MetricJet) -> Result<TensorValue, CurvatureError> {
    Geometry::new(jet.clone()).div_weyl()
}

/// Scale-aware residual: `max|diff| / (1 + max operand magnitude)`.
pub fn scaled_residual(diff: &TensorValue, operands: &[&TensorValue]) -> f64 {
    let scale = operands.iter().fold(0.0f64, |m, t| m.max(t.max_abs()));
    diff.max_abs() / (1.0 + scale)
}

/// Difference tensor together with its scale-aware magnitude.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Residual {
    pub tensor: TensorValue,
    pub scaled: f64,
}

impl Residual {
    pub fn new(diff: TensorValue, operands: &[&TensorValue]) -> Self {
        let scaled = scaled_residual(&diff, operands);
        Residual { tensor: diff, scaled }
    }
}

/// `∇_c∇_b∇_a u − ∇_b∇_c∇_a u − R_cbad ∇^d u`, stored as `[a][b][c]`.
pub fn ricci_commutation_residual(geom: &Geometry, u: &crate::jet::Jet) -> Residual {
    let n = geom.dim();
    let t = geom.third_covariant_derivative(u);
    let r = geom.riemann();
    let grad = geom.metric().sharp(u.d1());
    let swapped = t.permute(&[0, 2, 1]);
    let curv = TensorValue::from_fn(n, t.signature(), |i| {
        let (a, b, c) = (i[0], i[1], i[2]);
        (0..n).map(|d| r.get(&[c, b, a, d]) * grad[d]).sum()
    });
    Residual::new(t.sub(&swapped).sub(&curv), &[&t, &curv])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ScalarExpr;
    use crate::tensor::Variance;
    use crate::zoo;

    fn geom(m: &MetricField, p: &[f64]) -> Geometry {
        Geometry::new(MetricJet::new(m, p).unwrap())
    }

    fn gg(g: &TensorValue) -> TensorValue {
        TensorValue::from_fn(g.dim(), &[Variance::Covariant; 4], |i| {
            g.get(&[i[0], i[2]]) * g.get(&[i[1], i[3]]) - g.get(&[i[0], i[3]]) * g.get(&[i[1], i[2]])
        })
    }

    #[test]
    fn flat_space_has_no_curvature() {
        let m = zoo::euclidean(4).unwrap().metric;
        let g = geom(&m, &[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(g.riemann().max_abs(), 0.0);
        assert_eq!(g.christoffel().max_abs(), 0.0);
        assert_eq!(g.cotton().max_abs(), 0.0);
    }

    #[test]
    fn sphere_of_radius_r() {
        for (n, r) in [(3usize, 1.0), (4, 2.0), (5, 0.7)] {
            let m = zoo::sphere(n, r).unwrap().metric;
            let p: Vec<f64> = (0..n).map(|i| 0.1 * r * (i as f64 - 1.0)).collect();
            let g = geom(&m, &p);
            let model = gg(&g.metric().g).scale(1.0 / (r * r));
            assert!(scaled_residual(&g.riemann().sub(&model), &[&model]) < 1e-13);
            let nf = n as f64;
            assert!((g.scalar() - nf * (nf - 1.0) / (r * r)).abs() < 1e-12);
            let einstein = g.ricci().axpy(-(nf - 1.0) / (r * r), &g.metric().g);
            assert!(einstein.max_abs() < 1e-12);
        }
    }

    #[test]
    fn hyperbolic_space_has_curvature_minus_one() {
        let m = zoo::hyperbolic(4).unwrap().metric;
        let g = geom(&m, &[0.2, -0.3, 0.1, 0.4]);
        let model = gg(&g.metric().g).scale(-1.0);
        assert!(scaled_residual(&g.riemann().sub(&model), &[&model]) < 1e-13);
    }

    #[test]
    fn conformally_flat_weyl_and_einstein_cotton_vanish() {
        let s = zoo::sphere(5, 1.0).unwrap().metric;
        let g = geom(&s, &[0.1, 0.2, -0.1, 0.3, 0.0]);
        assert!(scaled_residual(&g.weyl().unwrap(), &[&g.riemann()]) < 1e-13);
        assert!(g.cotton().max_abs() < 1e-12);
        assert!(g.div_weyl().unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn product_has_weyl_but_no_cotton() {
        let m = zoo::product_flat_sphere(2, 4, 1.0).unwrap().metric;
        let g = geom(&m, &[0.3, 0.1, 0.2, -0.4]);
        assert!(g.weyl().unwrap().max_abs() > 0.1);
        assert!(g.cotton().max_abs() < 1e-13);
    }

    #[test]
    fn weyl_needs_three_dimensions() {
        let m = MetricField::diagonal(vec![ScalarExpr::one(), "exp(x1)".parse().unwrap()], ChartDomain::cube(2, 1.0)).unwrap();
        let g = geom(&m, &[0.0, 0.0]);
        assert!(matches!(g.weyl(), Err(CurvatureError::DimensionTooSmall { min: 3, dim: 2, .. })));
        assert!(matches!(g.div_weyl(), Err(CurvatureError::DimensionTooSmall { .. })));
        // K = −(1/4) for dx² + e^x dy².
        assert!((g.scalar() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn errors_carry_the_point() {
        let domain = ChartDomain::cube(2, 2.0);
        let m = MetricField::diagonal(vec![ScalarExpr::one(), "x1".parse().unwrap()], domain.clone()).unwrap();
        assert!(matches!(MetricJet::new(&m, &[0.0, 0.5]), Err(CurvatureError::Degenerate { ref point, .. }) if point == &vec![0.0, 0.5]));
        let m = MetricField::diagonal(vec![ScalarExpr::one(), "log(x1)".parse().unwrap()], domain).unwrap();
        assert!(matches!(MetricJet::new(&m, &[-1.0, 0.5]), Err(CurvatureError::Eval { ref point, .. }) if point == &vec![-1.0, 0.5]));
        let s = zoo::sphere(3, 1.0).unwrap().metric;
        assert!(matches!(MetricJet::new(&s, &[0.9, 0.9, 0.0]), Err(CurvatureError::OutsideDomain { .. })));
        assert!(MetricJet::new(&s, &[0.1, 0.1]).is_err());
    }

    #[test]
    fn asymmetric_metric_is_rejected() {
        let rows = vec![vec!["1".to_string(), "x1".to_string()], vec!["0".to_string(), "1".to_string()]];
        assert!(matches!(MetricField::parse(2, &rows, ChartDomain::cube(2, 1.0)), Err(CurvatureError::InvalidField(_))));
    }

    #[test]
    fn pack_serializes_every_tensor() {
        let m = zoo::random_metric(4, 2).unwrap();
        let json = serde_json::to_value(geom(&m, &[0.1, 0.0, -0.2, 0.3]).pack()).unwrap();
        for key in ["christoffel", "riemann", "ricci", "scalar", "weyl", "schouten", "cotton"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn commutation_residual_is_small_on_random_data() {
        let m = zoo::random_metric(5, 8).unwrap();
        let u = zoo::random_function(5, 8, 1.0);
        let p = [0.2, -0.1, 0.4, 0.0, 0.3];
        let g = geom(&m, &p);
        assert!(ricci_commutation_residual(&g, &u.eval_jet(&p).unwrap()).scaled < 1e-13);
    }
}
