//! Generalized quasi-Einstein structures: `Ric + ∇²f − μ df⊗df = λ g`.

use serde::{Deserialize, Serialize};

use crate::curvature::{CurvatureError, Geometry, MetricField, MetricJet};
use crate::expr::ScalarExpr;
use crate::jet::Jet;
use crate::tensor::{TensorValue, Variance};

/// Potential `f` and coefficient functions `μ`, `λ` on the metric's chart.
#[derive(Debug, Clone, PartialEq)]
pub struct GqeData {
    pub f: ScalarExpr,
    pub mu: ScalarExpr,
    pub lambda: ScalarExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolitonKind {
    Shrinking,
    Steady,
    Expanding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "tag", content = "kind")]
pub enum GqeTag {
    /// `f` constant; the metric is then Einstein.
    Trivial,
    /// `μ ≡ 0` and `λ` constant.
    GradientSoliton(SolitonKind),
    /// `μ ≡ 0` and `λ` non-constant.
    AlmostSoliton,
    /// `μ` and `λ` both constant, `μ ≠ 0`.
    QuasiEinstein,
    Generic,
    /// The structure equation fails for the supplied data.
    NotGqe,
}

fn eval_scalar(e: &ScalarExpr, p: &[f64]) -> Result<Jet, CurvatureError> {
    e.eval_jet(p).map_err(|source| CurvatureError::Eval {
        point: p.to_vec(),
        source,
    })
}

/// `Ric + ∇²f − μ df⊗df − λ g` from an already computed geometry.
pub fn gqe_residual_in(geom: &Geometry, d: &GqeData) -> Result<TensorValue, CurvatureError> {
    let p = geom.point();
    let f = eval_scalar(&d.f, p)?;
    let mu = d.mu.eval(p);
    let lambda = d.lambda.eval(p);
    let df = geom.gradient(&f);
    Ok(geom
        .ricci()
        .add(&geom.hessian(&f))
        .axpy(-mu, &df.outer(&df))
        .axpy(-lambda, &geom.metric().g))
}

pub fn gqe_residual(m: &MetricField, d: &GqeData, p: &[f64]) -> Result<TensorValue, CurvatureError> {
    let geom = Geometry::new(MetricJet::new(m, p)?);
    gqe_residual_in(&geom, d)
}

/// Pointwise least-squares `(μ, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuLambdaFit {
    /// `None` where `∇f` vanishes and `μ` is undetermined.
    pub mu: Option<f64>,
    pub lambda: f64,
    /// g-norm of the remaining residual.
    pub residual_norm: f64,
}

/// Gradients below this g-norm make `df⊗df` and `g` numerically dependent.
pub const DEGENERATE_GRADIENT: f64 = 1e-6;

pub fn fit_mu_lambda_in(geom: &Geometry, f: &ScalarExpr) -> Result<MuLambdaFit, CurvatureError> {
    let n = geom.dim();
    let fj = eval_scalar(f, geom.point())?;
    let m = geom.metric();
    let df = geom.gradient(&fj);
    let target = geom.ricci().add(&geom.hessian(&fj));
    let a = df.outer(&df);
    let g = &m.g;
    let inner = |x: &TensorValue, y: &TensorValue| {
        let mut acc = 0.0;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        acc += m.g_inv(p, r) * m.g_inv(q, s) * x.get(&[p, q]) * y.get(&[r, s]);
                    }
                }
            }
        }
        acc
    };
    let grad_sq = geom.grad_norm_sq(&fj);
    let (mu, lambda) = if grad_sq.sqrt() <= DEGENERATE_GRADIENT {
        let trace = geom.scalar() + geom.laplacian(&fj);
        (None, trace / n as f64)
    } else {
        // [<A,A> <A,g>; <A,g> <g,g>] [μ λ]^T = [<E,A> <E,g>]^T
        let (aa, ag, gg) = (inner(&a, &a), inner(&a, g), n as f64);
        let (ea, eg) = (inner(&target, &a), inner(&target, g));
        let det = aa * gg - ag * ag;
        (Some((ea * gg - ag * eg) / det), (aa * eg - ag * ea) / det)
    };
    let fitted = target.axpy(-mu.unwrap_or(0.0), &a).axpy(-lambda, g);
    Ok(MuLambdaFit {
        mu,
        lambda,
        residual_norm: fitted.norm(m),
    })
}

pub fn fit_mu_lambda(m: &MetricField, f: &ScalarExpr, p: &[f64]) -> Result<MuLambdaFit, CurvatureError> {
    let geom = Geometry::new(MetricJet::new(m, p)?);
    fit_mu_lambda_in(&geom, f)
}

/// `W_abcd ∇^a f` as a covariant 3-tensor in `(b, c, d)`, with its g-norm.
pub fn radial_weyl_in(geom: &Geometry, f: &ScalarExpr) -> Result<(TensorValue, f64), CurvatureError> {
    let n = geom.dim();
    let m = geom.metric();
    if n == 3 {
        return Ok((TensorValue::zeros(n, &[Variance::Covariant; 3]), 0.0));
    }
    let w = geom.weyl()?;
    let fj = eval_scalar(f, geom.point())?;
    let grad = m.sharp(fj.d1());
    let t = TensorValue::from_fn(n, &[Variance::Covariant; 3], |i| {
        (0..n).map(|a| grad[a] * w.get(&[a, i[0], i[1], i[2]])).sum()
    });
    let norm = t.norm(m);
    Ok((t, norm))
}

pub fn radial_weyl(m: &MetricField, f: &ScalarExpr, p: &[f64]) -> Result<(TensorValue, f64), CurvatureError> {
    let geom = Geometry::new(MetricJet::new(m, p)?);
    radial_weyl_in(&geom, f)
}

/// Tolerances used by [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyTolerances {
    /// Scale-aware bound on the structure-equation residual.
    pub residual: f64,
    /// Relative bound on `max − min` for constancy of `μ` and `λ`.
    pub constancy: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        ClassifyTolerances {
            residual: 1e-8,
            constancy: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GqeEvidence {
    pub samples: usize,
    pub max_residual: f64,
    pub worst_point: Vec<f64>,
    pub max_grad_norm: f64,
    pub mu_range: (f64, f64),
    pub lambda_range: (f64, f64),
    /// Largest scale-aware `|Ric − (R/n) g|` over the samples.
    pub einstein_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GqeClass {
    pub tag: GqeTag,
    pub einstein: bool,
    pub evidence: GqeEvidence,
}

fn is_constant(range: (f64, f64), tol: f64) -> bool {
    range.1 - range.0 <= tol * (1.0 + range.0.abs().max(range.1.abs()))
}

/// Classify `(M, f, μ, λ)` over sample points.
pub fn classify(
    m: &MetricField,
    d: &GqeData,
    samples: &[Vec<f64>],
    tol: ClassifyTolerances,
) -> Result<GqeClass, CurvatureError> {
    assert!(!samples.is_empty(), "classification needs at least one sample");
    let n = m.dim() as f64;
    let mut ev = GqeEvidence {
        samples: samples.len(),
        max_residual: 0.0,
        worst_point: samples[0].clone(),
        max_grad_norm: 0.0,
        mu_range: (f64::INFINITY, f64::NEG_INFINITY),
        lambda_range: (f64::INFINITY, f64::NEG_INFINITY),
        einstein_residual: 0.0,
    };
    for p in samples {
        let geom = Geometry::new(MetricJet::new(m, p)?);
        let fj = eval_scalar(&d.f, p)?;
        let res = gqe_residual_in(&geom, d)?;
        let ric = geom.ricci();
        let r = crate::curvature::scaled_residual(&res, &[&ric, &geom.hessian(&fj), &geom.metric().g]);
        if r > ev.max_residual {
            ev.max_residual = r;
            ev.worst_point = p.clone();
        }
        ev.max_grad_norm = ev.max_grad_norm.max(geom.grad_norm_sq(&fj).sqrt());
        let (mu, lambda) = (d.mu.eval(p), d.lambda.eval(p));
        ev.mu_range = (ev.mu_range.0.min(mu), ev.mu_range.1.max(mu));
        ev.lambda_range = (ev.lambda_range.0.min(lambda), ev.lambda_range.1.max(lambda));
        let trace_free = ric.axpy(-geom.scalar() / n, &geom.metric().g);
        ev.einstein_residual = ev
            .einstein_residual
            .max(crate::curvature::scaled_residual(&trace_free, &[&ric]));
    }
    let einstein = ev.einstein_residual <= tol.residual;
    let tag = if ev.max_residual > tol.residual {
        GqeTag::NotGqe
    } else if ev.max_grad_norm <= tol.constancy {
        GqeTag::Trivial
    } else {
        let mu_zero = ev.mu_range.0.abs().max(ev.mu_range.1.abs()) <= tol.constancy;
        let lambda_const = is_constant(ev.lambda_range, tol.constancy);
        let mu_const = is_constant(ev.mu_range, tol.constancy);
        if mu_zero && lambda_const {
            let lambda = 0.5 * (ev.lambda_range.0 + ev.lambda_range.1);
            GqeTag::GradientSoliton(if lambda > tol.constancy {
                SolitonKind::Shrinking
            } else if lambda < -tol.constancy {
                SolitonKind::Expanding
            } else {
                SolitonKind::Steady
            })
        } else if mu_zero {
            GqeTag::AlmostSoliton
        } else if mu_const && lambda_const {
            GqeTag::QuasiEinstein
        } else {
            GqeTag::Generic
        }
    };
    Ok(GqeClass { tag, einstein, evidence: ev })
}
