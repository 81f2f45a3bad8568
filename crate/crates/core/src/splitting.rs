//! Local splitting machinery for metrics whose Schouten tensor is Codazzi:
//! eigenstructure of the conformal Ricci tensor, leaf geometry of adapted
//! charts, and warp-factor extraction with an Einstein test on the fiber.
//!
//! In an adapted chart the first coordinate is transverse to the leaves
//! `{x1 = const}` and `g_1i = 0` for `i ≥ 2` at the expression level.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

use crate::conformal::ConformalPair;
use crate::curvature::{scaled_residual, ChartDomain, CurvatureError, Geometry, MetricField, MetricJet, Residual};
use crate::expr::ScalarExpr;
use crate::gqe::radial_weyl_in;
use crate::jet::Jet;
use crate::tensor::{MetricAtPoint, TensorValue, Variance};

/// Relative gap separating eigenvalue clusters.
pub const CLUSTER_GAP: f64 = 1e-6;
/// Points where `|∇f|` falls below this are not regular for alignment purposes.
pub const REGULAR_GRADIENT: f64 = 1e-6;
/// Largest tolerated spread of `∂_1 g_ij / g_ij` across entries and leaf points.
pub const WARP_RATIO_SPREAD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplittingError {
    #[error("chart is not adapted: entry g_1{col} is `{entry}`, expected the literal zero")]
    NotAdapted { col: usize, entry: String },
    #[error("metric is not a warped product along x1: ratio spread {spread:e} at x1 = {x1}")]
    NotWarped { x1: f64, spread: f64 },
    #[error("warp grid needs at least two x1 values and one leaf point")]
    EmptyGrid,
    #[error("grid point {point:?} lies outside the chart domain")]
    GridOutsideDomain { point: Vec<f64> },
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
}

fn eval_jet(e: &ScalarExpr, p: &[f64]) -> Result<Jet, CurvatureError> {
    e.eval_jet(p).map_err(|source| CurvatureError::Eval {
        point: p.to_vec(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSplit {
    /// Ascending generalized eigenvalues.
    pub eigenvalues: Vec<f64>,
    pub clusters: Vec<Cluster>,
    /// `|cos|` of the angle between the given direction and the simple
    /// eigenvector; 1 when the spectrum is a single cluster.
    pub radial_alignment: Option<f64>,
}

impl EigenSplit {
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut m: Vec<usize> = self.clusters.iter().map(|c| c.multiplicity).collect();
        m.sort_unstable();
        m
    }

    /// Either one cluster, or one simple eigenvalue and one of multiplicity `n − 1`.
    pub fn is_one_and_rest(&self) -> bool {
        let n = self.eigenvalues.len();
        let m = self.multiplicities();
        m == [n] || m == [1, n - 1]
    }
}

/// Eigenvalues and eigenvectors of `A` relative to `g`, i.e. `A x = η g x`.
/// Eigenvectors are contravariant and g-orthonormal, ordered with the values.
pub fn generalized_eigen(a: &TensorValue, metric: &MetricAtPoint) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = metric.dim();
    let am = DMatrix::from_fn(n, n, |i, j| a.get(&[i, j]));
    let gm = DMatrix::from_fn(n, n, |i, j| metric.g(i, j));
    let l = gm.cholesky().expect("metric is positive definite").l();
    let b = l.solve_lower_triangular(&am).expect("triangular factor is invertible");
    let c = l.solve_lower_triangular(&b.transpose()).expect("triangular factor is invertible");
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let y: DVector<f64> = eig.eigenvectors.column(i).into_owned();
            lt.solve_upper_triangular(&y).expect("triangular factor is invertible").iter().copied().collect()
        })
        .collect();
    (values, vectors)
}

fn clusters_of(values: &[f64]) -> Vec<Cluster> {
    let scale = 1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &v in values {
        match out.last_mut() {
            Some((sum, count)) if v - last <= CLUSTER_GAP * scale => {
                *sum += v;
                *count += 1;
            }
            _ => out.push((v, 1)),
        }
        last = v;
    }
    out.into_iter()
        .map(|(sum, count)| Cluster {
            value: sum / count as f64,
            multiplicity: count,
        })
        .collect()
}

/// Cluster the spectrum of `A` relative to `g`; `direction` is a covector
/// whose alignment with the simple eigenvector is reported.
pub fn eigen_split(a: &TensorValue, metric: &MetricAtPoint, direction: Option<&[f64]>) -> EigenSplit {
    let (values, vectors) = generalized_eigen(a, metric);
    let clusters = clusters_of(&values);
    let radial_alignment = direction.and_then(|w| {
        let norm = metric.inner(&metric.sharp(w), &metric.sharp(w)).sqrt();
        if norm <= REGULAR_GRADIENT {
            return None;
        }
        if clusters.len() == 1 {
            return Some(1.0);
        }
        let simple: Vec<usize> = clusters
            .iter()
            .enumerate()
            .filter(|(_, c)| c.multiplicity == 1)
            .map(|(k, _)| k)
            .collect();
        let [k] = simple[..] else { return None };
        let start: usize = clusters[..k].iter().map(|c| c.multiplicity).sum();
        let x = &vectors[start];
        let dot: f64 = x.iter().zip(w).map(|(xi, wi)| xi * wi).sum();
        Some(dot.abs() / norm)
    });
    EigenSplit {
        eigenvalues: values,
        clusters,
        radial_alignment,
    }
}

/// Spectrum of `Ric_g̃` for `g̃ = e^{−2f/(n−2)} g`, with the alignment of `∇f`.
pub fn ricci_eigenstructure(m: &MetricField, f: &ScalarExpr, p: &[f64]) -> Result<EigenSplit, SplittingError> {
    let pair = ConformalPair::from_potential(m.clone(), f)?;
    let rescaled = Geometry::new(MetricJet::new(&pair.rescaled, p)?);
    let df = eval_jet(f, p)?;
    Ok(eigen_split(&rescaled.ricci(), rescaled.metric(), Some(df.d1())))
}

/// `∇_c S_ab − ∇_b S_ac`, stored as `[a][b][c]`.
pub fn codazzi_residual(m: &MetricField, p: &[f64]) -> Result<Residual, SplittingError> {
    let geom = Geometry::new(MetricJet::new(m, p)?);
    codazzi_residual_in(&geom)
}

pub fn codazzi_residual_in(geom: &Geometry) -> Result<Residual, SplittingError> {
    let ns = geom.nabla_schouten()?;
    let diff = ns.sub(&ns.permute(&[0, 2, 1]));
    Ok(Residual::new(diff, &[&ns]))
}

/// A metric whose chart is adapted to the leaves `{x1 = const}`.
#[derive(Debug, Clone)]
pub struct AdaptedMetric {
    field: MetricField,
}

impl AdaptedMetric {
    pub fn new(field: MetricField) -> Result<Self, SplittingError> {
        for col in 1..field.dim() {
            let e = field.entry(0, col);
            if !e.is_zero() {
                return Err(SplittingError::NotAdapted {
                    col: col + 1,
                    entry: e.to_string(),
                });
            }
        }
        Ok(AdaptedMetric { field })
    }

    pub fn field(&self) -> &MetricField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn geometry(&self, p: &[f64]) -> Result<Geometry, SplittingError> {
        Ok(Geometry::new(MetricJet::new(&self.field, p)?))
    }
}

/// `h_ij = −Γ¹_ij g_11` over the leaf block, row-major `(n−1)²`, as jets.
fn second_fundamental_jets(geom: &Geometry) -> Vec<Jet> {
    let n = geom.dim();
    let g11 = geom.metric_jet().g_jet(0, 0);
    let mut h = Vec::with_capacity((n - 1) * (n - 1));
    for i in 1..n {
        for j in 1..n {
            h.push((geom.gamma_jet().get(&[0, i, j]) * g11).scale(-1.0));
        }
    }
    h
}

/// Trace of `h` over the leaf block. The chart is block diagonal, so the leaf
/// block of `g^{-1}` is the inverse of the induced metric.
fn mean_curvature_jet(geom: &Geometry, h: &[Jet]) -> Jet {
    let n = geom.dim();
    let mut acc = Jet::constant_with_order(n, 0.0, 2);
    for i in 1..n {
        for j in 1..n {
            acc.add_scaled(1.0, &(geom.metric_jet().g_inv_jet(i, j) * &h[(i - 1) * (n - 1) + (j - 1)]));
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondFundamentalForm {
    /// `h_ij` on the leaf, indices shifted so that leaf slot 0 is chart `x2`.
    pub h: TensorValue,
    /// Trace `g^{ij} h_ij`.
    pub mean_curvature: f64,
    /// Scale-aware `|h − (H/(n−1)) g_leaf|`.
    pub umbilicity: f64,
}

pub fn second_fundamental_form(a: &AdaptedMetric, p: &[f64]) -> Result<SecondFundamentalForm, SplittingError> {
    second_fundamental_form_in(&a.geometry(p)?)
}

fn second_fundamental_form_in(geom: &Geometry) -> Result<SecondFundamentalForm, SplittingError> {
    let n = geom.dim();
    let m = n - 1;
    let hj = second_fundamental_jets(geom);
    let h = TensorValue::from_fn(m, &[Variance::Covariant; 2], |i| hj[i[0] * m + i[1]].value());
    let big_h = mean_curvature_jet(geom, &hj).value();
    let g_leaf = TensorValue::from_fn(m, &[Variance::Covariant; 2], |i| geom.metric_jet().g(i[0] + 1, i[1] + 1));
    let diff = h.axpy(-big_h / m as f64, &g_leaf);
    Ok(SecondFundamentalForm {
        umbilicity: scaled_residual(&diff, &[&h, &g_leaf]),
        h,
        mean_curvature: big_h,
    })
}

/// `(∇_i h)(j,k) − (∇_j h)(i,k) − ⟨Rm(∂i,∂j)∂k, ∂1⟩` for chart indices
/// `i, j, k ≥ 1` (0-based), with the leaf connection of the induced metric.
pub fn codazzi_mainardi_residual(a: &AdaptedMetric, p: &[f64], i: usize, j: usize, k: usize) -> Result<f64, SplittingError> {
    let geom = a.geometry(p)?;
    let hj = second_fundamental_jets(&geom);
    Ok(codazzi_mainardi_at(&geom, &hj, i, j, k))
}

fn codazzi_mainardi_at(geom: &Geometry, hj: &[Jet], i: usize, j: usize, k: usize) -> f64 {
    let n = geom.dim();
    let gamma = geom.christoffel();
    let h = |a: usize, b: usize| hj[(a - 1) * (n - 1) + (b - 1)].value();
    let dh = |c: usize, a: usize, b: usize| hj[(a - 1) * (n - 1) + (b - 1)].grad(c);
    // Leaf Christoffel symbols coincide with the ambient ones on the leaf block.
    let nabla_h = |c: usize, a: usize, b: usize| {
        let mut acc = dh(c, a, b);
        for l in 1..n {
            acc -= gamma.get(&[l, c, a]) * h(l, b) + gamma.get(&[l, c, b]) * h(a, l);
        }
        acc
    };
    let lhs = nabla_h(i, j, k) - nabla_h(j, i, k);
    lhs - geom.riemann().get(&[i, j, k, 0])
}

/// Largest scale-aware Codazzi–Mainardi residual over all leaf triples.
pub fn codazzi_mainardi_max(a: &AdaptedMetric, p: &[f64]) -> Result<f64, SplittingError> {
    let geom = a.geometry(p)?;
    Ok(codazzi_mainardi_max_in(&geom))
}

fn codazzi_mainardi_max_in(geom: &Geometry) -> f64 {
    let n = geom.dim();
    let hj = second_fundamental_jets(geom);
    let scale = 1.0 + geom.riemann().max_abs() + hj.iter().fold(0.0f64, |m, j| m.max(j.max_abs()));
    let mut worst = 0.0f64;
    for i in 1..n {
        for j in 1..n {
            for k in 1..n {
                worst = worst.max(codazzi_mainardi_at(geom, &hj, i, j, k).abs());
            }
        }
    }
    worst / scale
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafPoint {
    pub point: Vec<f64>,
    pub mean_curvature: f64,
    /// `max_j |∂_j H|` over leaf directions.
    pub leaf_gradient_of_h: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub d1_sigma2: f64,
    /// `|H/(n−1) − ∂_1σ2/(σ1−σ2)| / (1 + |H/(n−1)|)`; `None` when σ1 ≈ σ2.
    pub mean_curvature_law: Option<f64>,
    /// Same comparison with the unnormalized trace `H`.
    pub mean_curvature_law_trace: Option<f64>,
    /// `max_j |∂_j g_11|`.
    pub leaf_gradient_of_g11: f64,
    /// `max_i |S_1i|`: whether `∂_1` is a Schouten eigenvector.
    pub off_block_schouten: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafDiagnostics {
    pub points: Vec<LeafPoint>,
    pub max_leaf_gradient_of_h: f64,
    pub max_mean_curvature_law: f64,
    pub max_mean_curvature_law_trace: f64,
    pub max_leaf_gradient_of_g11: f64,
    pub max_off_block_schouten: f64,
    /// Points where `σ1` and `σ2` could not be separated.
    pub inconclusive: usize,
}

fn leaf_point(geom: &Geometry) -> Result<LeafPoint, SplittingError> {
    let n = geom.dim();
    let nf = n as f64;
    let mj = geom.metric_jet();
    let hj = second_fundamental_jets(geom);
    let hh = mean_curvature_jet(geom, &hj);
    let s = geom.schouten_jet()?;
    let sigma1 = s.get(&[0, 0]).div_jet(mj.g_jet(0, 0));
    let mut trace = Jet::constant_with_order(n, 0.0, 1);
    for a in 0..n {
        for b in 0..n {
            trace.add_scaled(1.0, &(mj.g_inv_jet(a, b) * s.get(&[a, b])));
        }
    }
    let sigma2 = (&trace - &sigma1).scale(1.0 / (nf - 1.0));
    let (s1, s2, ds2) = (sigma1.value(), sigma2.value(), sigma2.grad(0));
    let separated = (s1 - s2).abs() > CLUSTER_GAP * (1.0 + s1.abs().max(s2.abs()));
    let law = |h: f64| separated.then(|| (h - ds2 / (s1 - s2)).abs() / (1.0 + h.abs()));
    Ok(LeafPoint {
        point: geom.point().to_vec(),
        mean_curvature: hh.value(),
        leaf_gradient_of_h: (1..n).map(|j| hh.grad(j).abs()).fold(0.0, f64::max),
        sigma1: s1,
        sigma2: s2,
        d1_sigma2: ds2,
        mean_curvature_law: law(hh.value() / (nf - 1.0)),
        mean_curvature_law_trace: law(hh.value()),
        leaf_gradient_of_g11: (1..n).map(|j| mj.dg(0, 0, j).abs()).fold(0.0, f64::max),
        off_block_schouten: (1..n).map(|i| s.get(&[0, i]).value().abs()).fold(0.0, f64::max),
    })
}

fn summarize(points: Vec<LeafPoint>) -> LeafDiagnostics {
    let max = |f: &dyn Fn(&LeafPoint) -> f64| points.iter().map(f).fold(0.0, f64::max);
    LeafDiagnostics {
        max_leaf_gradient_of_h: max(&|p| p.leaf_gradient_of_h),
        max_mean_curvature_law: max(&|p| p.mean_curvature_law.unwrap_or(0.0)),
        max_mean_curvature_law_trace: max(&|p| p.mean_curvature_law_trace.unwrap_or(0.0)),
        max_leaf_gradient_of_g11: max(&|p| p.leaf_gradient_of_g11),
        max_off_block_schouten: max(&|p| p.off_block_schouten),
        inconclusive: points.iter().filter(|p| p.mean_curvature_law.is_none()).count(),
        points,
    }
}

pub fn leaf_mean_curvature_diagnostics(a: &AdaptedMetric, samples: &[Vec<f64>]) -> Result<LeafDiagnostics, SplittingError> {
    let points = samples
        .iter()
        .map(|p| leaf_point(&a.geometry(p)?))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(summarize(points))
}

/// Restriction of the leaf block to `{x1 = x1_0}` as an `(n−1)`-dimensional
/// metric in the variables `x2..xn` (renumbered from the first).
pub fn leaf_metric(field: &MetricField, x1_0: f64) -> Result<MetricField, CurvatureError> {
    let n = field.dim();
    let shift = |e: &ScalarExpr| e.substitute_value(0, x1_0).map_vars(&|v| ScalarExpr::var(v - 1));
    let domain = ChartDomain {
        bounds: field.domain().bounds[1..].to_vec(),
        constraints: field.domain().constraints.iter().map(shift).collect(),
    };
    MetricField::from_upper(n - 1, domain, |i, j| shift(field.entry(i + 1, j + 1)))
}

/// Sampling grid for [`warp_split`].
#[derive(Debug, Clone, PartialEq)]
pub struct WarpGrid {
    /// Increasing `x1` values; the first one is the base leaf.
    pub x1: Vec<f64>,
    /// Leaf coordinates `(x2, …, xn)`.
    pub leaf_points: Vec<Vec<f64>>,
}

impl WarpGrid {
    pub fn uniform(lo: f64, hi: f64, count: usize, leaf_points: Vec<Vec<f64>>) -> Self {
        let step = (hi - lo) / (count.max(2) - 1) as f64;
        WarpGrid {
            x1: (0..count).map(|k| lo + step * k as f64).collect(),
            leaf_points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarpSplit {
    pub x1: Vec<f64>,
    /// `φ = ∂_1 g_ij / g_ij` at each grid value.
    pub phi: Vec<f64>,
    /// Largest spread of that ratio over entries and leaf points.
    pub phi_spread: f64,
    /// `ψ` with `ψ(x1_0) = 0`.
    pub psi: Vec<f64>,
    /// `G = e^{−ψ} g_leaf` on the base leaf.
    #[serde(skip)]
    pub fiber: MetricField,
    /// Scale-aware `max |g_ij − e^ψ G_ij|` over the grid.
    pub residual: f64,
}

/// Extract `g_ij = e^{ψ(x1)} G_ij` from an adapted metric sampled on a grid.
///
/// `ψ` integrates `φ` by the trapezoid rule with its first Euler–Maclaurin
/// endpoint correction, which uses `φ'` from the same jets.
pub fn warp_split(a: &AdaptedMetric, grid: &WarpGrid) -> Result<WarpSplit, SplittingError> {
    let field = a.field();
    let n = field.dim();
    if grid.x1.len() < 2 || grid.leaf_points.is_empty() {
        return Err(SplittingError::EmptyGrid);
    }
    let point = |x1: f64, y: &[f64]| {
        let mut p = Vec::with_capacity(n);
        p.push(x1);
        p.extend_from_slice(y);
        p
    };
    let mut phi = Vec::with_capacity(grid.x1.len());
    let mut dphi = Vec::with_capacity(grid.x1.len());
    let mut phi_spread = 0.0f64;
    for &x1 in &grid.x1 {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut sum, mut dsum, mut count) = (0.0, 0.0, 0usize);
        for y in &grid.leaf_points {
            let p = point(x1, y);
            if !field.domain().contains(&p) {
                return Err(SplittingError::GridOutsideDomain { point: p });
            }
            let jets: Vec<Jet> = (1..n)
                .flat_map(|i| (i..n).map(move |j| (i, j)))
                .map(|(i, j)| eval_jet(field.entry(i, j), &p))
                .collect::<Result<_, _>>()?;
            let scale = jets.iter().fold(0.0f64, |m, j| m.max(j.value().abs()));
            for j in jets.iter().filter(|j| j.value().abs() > 1e-12 * scale) {
                let r = j.grad(0) / j.value();
                lo = lo.min(r);
                hi = hi.max(r);
                sum += r;
                dsum += j.hess(0, 0) / j.value() - r * r;
                count += 1;
            }
        }
        let mean = sum / count as f64;
        let spread = hi - lo;
        if spread > WARP_RATIO_SPREAD * (1.0 + mean.abs()) {
            return Err(SplittingError::NotWarped { x1, spread });
        }
        phi_spread = phi_spread.max(spread);
        phi.push(mean);
        dphi.push(dsum / count as f64);
    }
    let mut psi = vec![0.0; grid.x1.len()];
    for k in 1..grid.x1.len() {
        let h = grid.x1[k] - grid.x1[k - 1];
        psi[k] = psi[k - 1] + 0.5 * h * (phi[k - 1] + phi[k]) - h * h / 12.0 * (dphi[k] - dphi[k - 1]);
    }
    let fiber = leaf_metric(field, grid.x1[0])?;
    let mut residual = 0.0f64;
    for (k, &x1) in grid.x1.iter().enumerate() {
        for y in &grid.leaf_points {
            let p = point(x1, y);
            let mut diff: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for i in 1..n {
                for j in i..n {
                    let g = field.entry(i, j).eval(&p);
                    let model = psi[k].exp() * fiber.entry(i - 1, j - 1).eval(y);
                    diff = diff.max((g - model).abs());
                    scale = scale.max(g.abs());
                }
            }
            residual = residual.max(diff / (1.0 + scale));
        }
    }
    Ok(WarpSplit {
        x1: grid.x1.clone(),
        phi,
        phi_spread,
        psi,
        fiber,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberEinstein {
    pub dim: usize,
    /// Scale-aware `max |Ric_G − (R_G/m) G|`.
    pub trace_free_residual: f64,
    pub einstein_constant: (f64, f64),
    /// `(max − min) / (1 + |constant|)` of `R_G/m` over the points.
    pub spread: f64,
    /// For three-dimensional fibers: `|R_abcd − κ(G_ac G_bd − G_ad G_bc)|`, scale-aware.
    pub constant_curvature_residual: Option<f64>,
    /// The fiber is one-dimensional and the condition is vacuous.
    pub vacuous: bool,
}

impl FiberEinstein {
    pub fn is_einstein(&self, tol: f64) -> bool {
        self.vacuous || (self.trace_free_residual <= tol && self.spread <= tol)
    }
}

/// Einstein test of a fiber metric at the given fiber points.
pub fn fiber_einstein_check(fiber: &MetricField, points: &[Vec<f64>]) -> Result<FiberEinstein, SplittingError> {
    let m = fiber.dim();
    if m < 2 {
        return Ok(FiberEinstein {
            dim: m,
            trace_free_residual: 0.0,
            einstein_constant: (0.0, 0.0),
            spread: 0.0,
            constant_curvature_residual: None,
            vacuous: true,
        });
    }
    let mf = m as f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut trace_free = 0.0f64;
    let mut csc: Option<f64> = (m == 3).then_some(0.0);
    for p in points {
        let geom = Geometry::new(MetricJet::new(fiber, p)?);
        let ric = geom.ricci();
        let g = &geom.metric().g;
        let c = geom.scalar() / mf;
        lo = lo.min(c);
        hi = hi.max(c);
        trace_free = trace_free.max(scaled_residual(&ric.axpy(-c, g), &[&ric]));
        if let Some(worst) = csc.as_mut() {
            let kappa = geom.scalar() / (mf * (mf - 1.0));
            let r = geom.riemann();
            let model = TensorValue::from_fn(m, &[Variance::Covariant; 4], |i| {
                kappa * (g.get(&[i[0], i[2]]) * g.get(&[i[1], i[3]]) - g.get(&[i[0], i[3]]) * g.get(&[i[1], i[2]]))
            });
            *worst = worst.max(scaled_residual(&r.sub(&model), &[&r]));
        }
    }
    Ok(FiberEinstein {
        dim: m,
        trace_free_residual: trace_free,
        einstein_constant: (lo, hi),
        spread: (hi - lo) / (1.0 + lo.abs().max(hi.abs())),
        constant_curvature_residual: csc,
        vacuous: false,
    })
}

/// Why [`theorem_pipeline`] stopped before the splitting steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "reason", content = "detail")]
pub enum StopReason {
    /// Harmonic Weyl or radial Weyl fails at some sample.
    HypothesesFail(String),
    /// `∇f` vanishes at every sample; the statement is vacuous there.
    NoRegularPoints,
    /// The chart is not adapted to `g̃` or `f` depends on leaf coordinates.
    ChartNotAdapted(String),
    /// The warp factor could not be extracted.
    NotWarped(String),
}

/// End-to-end splitting diagnostics for `(g, f)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    /// Scale-aware `max |C|` of `g` over the samples.
    pub cotton: f64,
    /// `max |W(∇f, ·, ·, ·)|` of `g` over the samples.
    pub radial_weyl: f64,
    pub hypotheses_hold: bool,
    pub stopped: Option<StopReason>,
    /// Regular points where the multiplicities were not `(1, n−1)` or `(n)`.
    pub multiplicity_failures: usize,
    pub min_radial_alignment: Option<f64>,
    pub umbilicity: Option<f64>,
    pub codazzi_mainardi: Option<f64>,
    pub codazzi_schouten: Option<f64>,
    pub leaf: Option<LeafDiagnostics>,
    pub warp: Option<WarpSplit>,
    pub fiber: Option<FiberEinstein>,
}

/// Tolerance used to decide whether the harmonic-Weyl and radial-Weyl
/// hypotheses hold before the splitting steps run.
pub const HYPOTHESIS_TOL: f64 = 1e-8;

/// Run every splitting step on `g̃ = e^{−2f/(n−2)} g` at `samples`, then split
/// off the warp factor on a `grid_size`-point `x1` grid through the leaves of
/// the first few samples.
pub fn theorem_pipeline(
    m: &MetricField,
    f: &ScalarExpr,
    samples: &[Vec<f64>],
    grid_size: usize,
) -> Result<PipelineReport, SplittingError> {
    let n = m.dim();
    let mut report = PipelineReport {
        cotton: 0.0,
        radial_weyl: 0.0,
        hypotheses_hold: false,
        stopped: None,
        multiplicity_failures: 0,
        min_radial_alignment: None,
        umbilicity: None,
        codazzi_mainardi: None,
        codazzi_schouten: None,
        leaf: None,
        warp: None,
        fiber: None,
    };
    for p in samples {
        let geom = Geometry::new(MetricJet::new(m, p)?);
        let c = geom.cotton();
        report.cotton = report.cotton.max(scaled_residual(&c, &[&geom.nabla_ricci()]));
        if n >= 4 {
            report.radial_weyl = report.radial_weyl.max(radial_weyl_in(&geom, f)?.1);
        }
    }
    report.hypotheses_hold = report.cotton <= HYPOTHESIS_TOL && report.radial_weyl <= HYPOTHESIS_TOL;
    if !report.hypotheses_hold {
        report.stopped = Some(StopReason::HypothesesFail(format!(
            "cotton {:e}, radial Weyl {:e}",
            report.cotton, report.radial_weyl
        )));
        return Ok(report);
    }
    let mut regular = false;
    for p in samples {
        let geom = Geometry::new(MetricJet::new(m, p)?);
        regular |= geom.grad_norm_sq(&eval_jet(f, p)?).sqrt() > REGULAR_GRADIENT;
    }
    if !regular {
        report.stopped = Some(StopReason::NoRegularPoints);
        return Ok(report);
    }
    if let Some(v) = (1..n).find(|&v| f.depends_on(v)) {
        report.stopped = Some(StopReason::ChartNotAdapted(format!("f depends on the leaf coordinate x{}", v + 1)));
        return Ok(report);
    }
    let pair = ConformalPair::from_potential(m.clone(), f)?;
    let adapted = match AdaptedMetric::new(pair.rescaled.clone()) {
        Ok(a) => a,
        Err(e) => {
            report.stopped = Some(StopReason::ChartNotAdapted(e.to_string()));
            return Ok(report);
        }
    };
    let mut leaf_points = Vec::with_capacity(samples.len());
    let (mut umb, mut cm, mut cod) = (0.0f64, 0.0f64, 0.0f64);
    for p in samples {
        let geom = adapted.geometry(p)?;
        let df = eval_jet(f, p)?;
        let split = eigen_split(&geom.ricci(), geom.metric(), Some(df.d1()));
        if split.radial_alignment.is_some() {
            if !split.is_one_and_rest() {
                report.multiplicity_failures += 1;
            }
            let a = split.radial_alignment.unwrap_or(1.0);
            report.min_radial_alignment = Some(report.min_radial_alignment.map_or(a, |m: f64| m.min(a)));
        }
        umb = umb.max(second_fundamental_form_in(&geom)?.umbilicity);
        cm = cm.max(codazzi_mainardi_max_in(&geom));
        cod = cod.max(codazzi_residual_in(&geom)?.scaled);
        leaf_points.push(leaf_point(&geom)?);
    }
    report.umbilicity = Some(umb);
    report.codazzi_mainardi = Some(cm);
    report.codazzi_schouten = Some(cod);
    report.leaf = Some(summarize(leaf_points));

    let (lo, hi) = adapted.field().domain().bounds[0];
    let fiber_points: Vec<Vec<f64>> = samples
        .iter()
        .map(|p| p[1..].to_vec())
        .filter(|y| {
            [lo, hi].iter().all(|&x1| {
                let mut p = vec![x1];
                p.extend_from_slice(y);
                adapted.field().domain().contains(&p)
            })
        })
        .take(5)
        .collect();
    let grid = WarpGrid::uniform(lo, hi, grid_size, fiber_points.clone());
    match warp_split(&adapted, &grid) {
        Ok(w) => {
            report.fiber = Some(fiber_einstein_check(&w.fiber, &fiber_points)?);
            report.warp = Some(w);
        }
        Err(e) => report.stopped = Some(StopReason::NotWarped(e.to_string())),
    }
    Ok(report)
}
