use serde::{Deserialize, Serialize};

use super::CurvatureError;
use crate::expr::{parse, ScalarExpr};
use crate::jet::Jet;
use crate::tensor::MetricAtPoint;

/// Chart validity: an axis-aligned box (also used as the sampling box) and a
/// list of expressions that must be strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartDomain {
    pub bounds: Vec<(f64, f64)>,
    pub constraints: Vec<ScalarExpr>,
}

/// Serializable form of a [`ChartDomain`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    #[serde(default)]
    pub constraints: Vec<String>,
}

impl ChartDomain {
    pub fn boxed(bounds: Vec<(f64, f64)>) -> Self {
        ChartDomain {
            bounds,
            constraints: Vec::new(),
        }
    }

    pub fn cube(dim: usize, half_width: f64) -> Self {
        Self::boxed(vec![(-half_width, half_width); dim])
    }

    pub fn with_constraint(mut self, positive: ScalarExpr) -> Self {
        self.constraints.push(positive);
        self
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.bounds.len()
            && p.iter().zip(&self.bounds).all(|(x, (lo, hi))| x >= lo && x <= hi)
            && self.constraints.iter().all(|c| c.eval(p) > 0.0)
    }

    pub fn to_spec(&self) -> DomainSpec {
        DomainSpec {
            bounds: self.bounds.iter().map(|&(a, b)| [a, b]).collect(),
            constraints: self.constraints.iter().map(|c| c.to_string()).collect(),
        }
    }

    pub fn from_spec(spec: &DomainSpec) -> Result<Self, CurvatureError> {
        let dim = spec.bounds.len();
        let constraints = spec
            .constraints
            .iter()
            .map(|c| parse(c, dim))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ChartDomain {
            bounds: spec.bounds.iter().map(|b| (b[0], b[1])).collect(),
            constraints,
        })
    }
}

/// A Riemannian metric on one chart, given entry-wise as expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    dim: usize,
    entries: Vec<ScalarExpr>,
    domain: ChartDomain,
}

impl MetricField {
    /// `entries` is the full row-major `dim × dim` array; `(i,j)` and `(j,i)`
    /// must be the same tree.
    pub fn new(dim: usize, entries: Vec<ScalarExpr>, domain: ChartDomain) -> Result<Self, CurvatureError> {
        if entries.len() != dim * dim {
            return Err(CurvatureError::InvalidField(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if domain.dim() != dim {
            return Err(CurvatureError::InvalidField(format!(
                "domain has dimension {}, metric {dim}",
                domain.dim()
            )));
        }
        for i in 0..dim {
            for j in 0..i {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return Err(CurvatureError::InvalidField(format!(
                        "entry ({},{}) differs from ({},{})",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        if let Some(v) = entries.iter().filter_map(|e| e.max_var()).max() {
            if v >= dim {
                return Err(CurvatureError::InvalidField(format!(
                    "entry references x{} in dimension {dim}",
                    v + 1
                )));
            }
        }
        Ok(MetricField { dim, entries, domain })
    }

    /// Build from the upper triangle given by `f(i, j)` with `i <= j`.
    pub fn from_upper(dim: usize, domain: ChartDomain, f: impl Fn(usize, usize) -> ScalarExpr) -> Result<Self, CurvatureError> {
        let mut entries = vec![ScalarExpr::zero(); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let e = f(i, j);
                entries[i * dim + j] = e.clone();
                entries[j * dim + i] = e;
            }
        }
        Self::new(dim, entries, domain)
    }

    /// Diagonal metric.
    pub fn diagonal(diag: Vec<ScalarExpr>, domain: ChartDomain) -> Result<Self, CurvatureError> {
        let n = diag.len();
        Self::from_upper(n, domain, |i, j| if i == j { diag[i].clone() } else { ScalarExpr::zero() })
    }

    /// `e^{2φ} δ_ab`-type metric with the given conformal factor expression.
    pub fn conformally_flat(dim: usize, factor: ScalarExpr, domain: ChartDomain) -> Result<Self, CurvatureError> {
        Self::diagonal(vec![factor; dim], domain)
    }

    /// Parse a row-major array of entry strings.
    pub fn parse(dim: usize, rows: &[Vec<String>], domain: ChartDomain) -> Result<Self, CurvatureError> {
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(CurvatureError::InvalidField(format!("metric must be {dim}×{dim}")));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            for src in row {
                entries.push(parse(src, dim)?);
            }
        }
        Self::new(dim, entries, domain)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[ScalarExpr] {
        &self.entries
    }

    pub fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    pub fn with_domain(&self, domain: ChartDomain) -> Result<Self, CurvatureError> {
        Self::new(self.dim, self.entries.clone(), domain)
    }

    /// Metric values at `p` (no derivatives).
    pub fn at(&self, p: &[f64]) -> Result<MetricAtPoint, CurvatureError> {
        let vals: Vec<f64> = self.entries.iter().map(|e| e.eval(p)).collect();
        MetricAtPoint::new(self.dim, &vals).map_err(|source| CurvatureError::Degenerate {
            point: p.to_vec(),
            source,
        })
    }
}

/// Metric and inverse metric with coordinate partials to third order at a point.
#[derive(Debug, Clone)]
pub struct MetricJet {
    dim: usize,
    point: Vec<f64>,
    g: Vec<Jet>,
    g_inv: Vec<Jet>,
    at: MetricAtPoint,
}

impl MetricJet {
    pub fn new(field: &MetricField, p: &[f64]) -> Result<Self, CurvatureError> {
        let n = field.dim();
        if p.len() != n || !field.domain().contains(p) {
            return Err(CurvatureError::OutsideDomain { point: p.to_vec() });
        }
        let mut g = vec![Jet::constant(n, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let jet = field.entry(i, j).eval_jet(p).map_err(|source| CurvatureError::Eval {
                    point: p.to_vec(),
                    source,
                })?;
                g[j * n + i] = jet.clone();
                g[i * n + j] = jet;
            }
        }
        Self::from_jets(n, p.to_vec(), g)
    }

    /// Build from explicit entry jets (row-major, symmetric).
    pub fn from_jets(n: usize, point: Vec<f64>, g: Vec<Jet>) -> Result<Self, CurvatureError> {
        let vals: Vec<f64> = g.iter().map(Jet::value).collect();
        let at = MetricAtPoint::new(n, &vals).map_err(|source| CurvatureError::Degenerate {
            point: point.clone(),
            source,
        })?;
        let g_inv = inverse_jets(n, &g, &at);
        Ok(MetricJet {
            dim: n,
            point,
            g,
            g_inv,
            at,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn at(&self) -> &MetricAtPoint {
        &self.at
    }

    pub fn g_jet(&self, a: usize, b: usize) -> &Jet {
        &self.g[a * self.dim + b]
    }

    pub fn g_inv_jet(&self, a: usize, b: usize) -> &Jet {
        &self.g_inv[a * self.dim + b]
    }

    pub fn g(&self, a: usize, b: usize) -> f64 {
        self.g_jet(a, b).value()
    }

    pub fn g_inv(&self, a: usize, b: usize) -> f64 {
        self.g_inv_jet(a, b).value()
    }

    /// `∂_c g_ab`
    pub fn dg(&self, a: usize, b: usize, c: usize) -> f64 {
        self.g_jet(a, b).grad(c)
    }

    /// `∂_c ∂_d g_ab`
    pub fn d2g(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.g_jet(a, b).hess(c, d)
    }

    /// `∂_c ∂_d ∂_e g_ab`
    pub fn d3g(&self, a: usize, b: usize, c: usize, d: usize, e: usize) -> f64 {
        self.g_jet(a, b).third(c, d, e)
    }

    /// `∂_c g^{ab}`
    pub fn dg_inv(&self, a: usize, b: usize, c: usize) -> f64 {
        self.g_inv_jet(a, b).grad(c)
    }
}

// g^{-1} as a jet: with g = g0 + δ (δ vanishing at the point) the truncated
// Neumann series g0^{-1} Σ_k (−δ g0^{-1})^k is exact through third order.
fn inverse_jets(n: usize, g: &[Jet], at: &MetricAtPoint) -> Vec<Jet> {
    let g0 = |a: usize, b: usize| at.g_inv(a, b);
    let delta: Vec<Jet> = g.iter().map(|j| j.add_scalar(-j.value())).collect();
    // x = −δ g0^{-1}
    let mut x = vec![Jet::constant(n, 0.0); n * n];
    for a in 0..n {
        for c in 0..n {
            let mut acc = Jet::constant(n, 0.0);
            for b in 0..n {
                acc.add_scaled(-g0(b, c), &delta[a * n + b]);
            }
            x[a * n + c] = acc;
        }
    }
    let matmul = |l: &[Jet], r: &[Jet]| -> Vec<Jet> {
        let mut out = vec![Jet::constant(n, 0.0); n * n];
        for a in 0..n {
            for c in 0..n {
                let mut acc = Jet::constant(n, 0.0);
                for b in 0..n {
                    acc = &acc + &(&l[a * n + b] * &r[b * n + c]);
                }
                out[a * n + c] = acc;
            }
        }
        out
    };
    let x2 = matmul(&x, &x);
    let x3 = matmul(&x2, &x);
    let mut series = vec![Jet::constant(n, 0.0); n * n];
    for k in 0..n * n {
        let mut s = Jet::constant(n, if k % (n + 1) == 0 { 1.0 } else { 0.0 });
        s.add_scaled(1.0, &x[k]);
        s.add_scaled(1.0, &x2[k]);
        s.add_scaled(1.0, &x3[k]);
        series[k] = s;
    }
    let mut inv = vec![Jet::constant(n, 0.0); n * n];
    for a in 0..n {
        for c in 0..n {
            let mut acc = Jet::constant(n, 0.0);
            for b in 0..n {
                acc.add_scaled(g0(a, b), &series[b * n + c]);
            }
            inv[a * n + c] = acc;
        }
    }
    // symmetrize against roundoff
    for a in 0..n {
        for c in 0..a {
            let avg = (&inv[a * n + c] + &inv[c * n + a]).scale(0.5);
            inv[a * n + c] = avg.clone();
            inv[c * n + a] = avg;
        }
    }
    inv
}
