//! Dense tensors at a point with variance-aware algebra.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Covariant,
    Contravariant,
}

impl Variance {
    pub fn flip(self) -> Self {
        match self {
            Variance::Covariant => Variance::Contravariant,
            Variance::Contravariant => Variance::Covariant,
        }
    }
}

use Variance::{Contravariant as Up, Covariant as Down};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("slot {slot} out of range for rank {rank}")]
    SlotOutOfRange { slot: usize, rank: usize },
    #[error("contraction slots must be distinct")]
    SameSlot,
    #[error("contracting two {0:?} slots needs a metric")]
    MissingMetric(Variance),
    #[error("slot {slot} is {found:?}, expected {expected:?}")]
    VarianceMismatch {
        slot: usize,
        expected: Variance,
        found: Variance,
    },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("metric is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("metric is not positive definite (eigenvalues {min:e} .. {max:e})")]
    NotPositiveDefinite { min: f64, max: f64 },
}

/// Dense multi-index array with one variance per slot, row-major in slot order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorValue {
    dim: usize,
    signature: Vec<Variance>,
    components: Vec<f64>,
}

impl TensorValue {
    pub fn zeros(dim: usize, signature: &[Variance]) -> Self {
        TensorValue {
            dim,
            signature: signature.to_vec(),
            components: vec![0.0; dim.pow(signature.len() as u32)],
        }
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        TensorValue {
            dim,
            signature: Vec::new(),
            components: vec![value],
        }
    }

    pub fn from_fn(dim: usize, signature: &[Variance], mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(dim, signature);
        let mut idx = vec![0; signature.len()];
        for flat in 0..t.components.len() {
            t.unflatten(flat, &mut idx);
            t.components[flat] = f(&idx);
        }
        t
    }

    pub fn from_components(dim: usize, signature: &[Variance], components: Vec<f64>) -> Self {
        assert_eq!(components.len(), dim.pow(signature.len() as u32), "component count");
        TensorValue {
            dim,
            signature: signature.to_vec(),
            components,
        }
    }

    /// Mixed identity `δ^a_b` (first slot contravariant).
    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, &[Up, Down], |i| if i[0] == i[1] { 1.0 } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.signature.len()
    }

    pub fn signature(&self) -> &[Variance] {
        &self.signature
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [f64] {
        &mut self.components
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    fn unflatten(&self, mut flat: usize, idx: &mut [usize]) {
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.dim;
            flat /= self.dim;
        }
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let k = self.flat_index(idx);
        self.components[k] = value;
    }

    pub fn value(&self) -> f64 {
        assert_eq!(self.rank(), 0, "value() on a non-scalar tensor");
        self.components[0]
    }

    fn check_slot(&self, slot: usize) -> Result<(), TensorError> {
        if slot >= self.rank() {
            return Err(TensorError::SlotOutOfRange {
                slot,
                rank: self.rank(),
            });
        }
        Ok(())
    }

    fn same_shape(&self, other: &TensorValue) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        assert_eq!(self.signature, other.signature, "signature mismatch");
    }

    pub fn add(&self, other: &TensorValue) -> TensorValue {
        self.same_shape(other);
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &TensorValue) -> TensorValue {
        self.same_shape(other);
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> TensorValue {
        TensorValue {
            dim: self.dim,
            signature: self.signature.clone(),
            components: self.components.iter().map(|x| c * x).collect(),
        }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &TensorValue) -> TensorValue {
        self.same_shape(other);
        self.zip(other, |a, b| a + c * b)
    }

    fn zip(&self, other: &TensorValue, f: impl Fn(f64, f64) -> f64) -> TensorValue {
        TensorValue {
            dim: self.dim,
            signature: self.signature.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Reorder slots: slot `k` of the result is slot `perm[k]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> TensorValue {
        assert_eq!(perm.len(), self.rank());
        let sig: Vec<_> = perm.iter().map(|&p| self.signature[p]).collect();
        let mut src = vec![0; self.rank()];
        TensorValue::from_fn(self.dim, &sig, |idx| {
            for (k, &p) in perm.iter().enumerate() {
                src[p] = idx[k];
            }
            self.get(&src)
        })
    }

    pub fn outer(&self, other: &TensorValue) -> TensorValue {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut sig = self.signature.clone();
        sig.extend_from_slice(&other.signature);
        let mut components = Vec::with_capacity(self.components.len() * other.components.len());
        for a in &self.components {
            for b in &other.components {
                components.push(a * b);
            }
        }
        TensorValue {
            dim: self.dim,
            signature: sig,
            components,
        }
    }

    /// Trace over slots `i` and `j`. Slots of opposite variance are traced
    /// directly; like slots are traced through `g^{-1}` or `g`.
    pub fn contract(&self, i: usize, j: usize, metric: Option<&MetricAtPoint>) -> Result<TensorValue, TensorError> {
        self.check_slot(i)?;
        self.check_slot(j)?;
        if i == j {
            return Err(TensorError::SameSlot);
        }
        let (vi, vj) = (self.signature[i], self.signature[j]);
        let weight: Option<&TensorValue> = if vi != vj {
            None
        } else {
            let m = metric.ok_or(TensorError::MissingMetric(vi))?;
            if m.dim() != self.dim {
                return Err(TensorError::DimensionMismatch(m.dim(), self.dim));
            }
            Some(if vi == Down { &m.g_inv } else { &m.g })
        };
        let sig: Vec<_> = (0..self.rank())
            .filter(|&s| s != i && s != j)
            .map(|s| self.signature[s])
            .collect();
        let n = self.dim;
        let mut full = vec![0; self.rank()];
        Ok(TensorValue::from_fn(n, &sig, |idx| {
            let mut rest = idx.iter();
            for (s, slot) in full.iter_mut().enumerate() {
                if s != i && s != j {
                    *slot = *rest.next().unwrap();
                }
            }
            let mut acc = 0.0;
            for p in 0..n {
                for q in 0..n {
                    let w = match weight {
                        None => {
                            if p != q {
                                continue;
                            }
                            1.0
                        }
                        Some(w) => w.get(&[p, q]),
                    };
                    full[i] = p;
                    full[j] = q;
                    acc += w * self.get(&full);
                }
            }
            acc
        }))
    }

    fn transform_slot(&self, slot: usize, by: &TensorValue, to: Variance) -> TensorValue {
        let mut sig = self.signature.clone();
        sig[slot] = to;
        let n = self.dim;
        let mut src = vec![0; self.rank()];
        TensorValue::from_fn(n, &sig, |idx| {
            src.copy_from_slice(idx);
            let mut acc = 0.0;
            for q in 0..n {
                src[slot] = q;
                acc += by.get(&[idx[slot], q]) * self.get(&src);
            }
            acc
        })
    }

    pub fn raise(&self, slot: usize, metric: &MetricAtPoint) -> Result<TensorValue, TensorError> {
        self.check_slot(slot)?;
        if self.signature[slot] != Down {
            return Err(TensorError::VarianceMismatch {
                slot,
                expected: Down,
                found: self.signature[slot],
            });
        }
        Ok(self.transform_slot(slot, &metric.g_inv, Up))
    }

    pub fn lower(&self, slot: usize, metric: &MetricAtPoint) -> Result<TensorValue, TensorError> {
        self.check_slot(slot)?;
        if self.signature[slot] != Up {
            return Err(TensorError::VarianceMismatch {
                slot,
                expected: Up,
                found: self.signature[slot],
            });
        }
        Ok(self.transform_slot(slot, &metric.g, Down))
    }

    /// Average over all permutations of the listed slots.
    pub fn symmetrize(&self, slots: &[usize]) -> Result<TensorValue, TensorError> {
        for &s in slots {
            self.check_slot(s)?;
        }
        let perms = permutations(slots.len());
        let mut acc = TensorValue::zeros(self.dim, &self.signature);
        for perm in &perms {
            let mut full: Vec<usize> = (0..self.rank()).collect();
            for (k, &p) in perm.iter().enumerate() {
                full[slots[k]] = slots[p];
            }
            acc = acc.add(&self.permute(&full));
        }
        Ok(acc.scale(1.0 / perms.len() as f64))
    }

    /// `sqrt(T . T)` with every index pair contracted through the metric.
    pub fn norm(&self, metric: &MetricAtPoint) -> f64 {
        let mut dual = self.clone();
        for slot in 0..self.rank() {
            dual = match dual.signature[slot] {
                Down => dual.transform_slot(slot, &metric.g_inv, Up),
                Up => dual.transform_slot(slot, &metric.g, Down),
            };
        }
        let sq: f64 = self.components.iter().zip(&dual.components).map(|(a, b)| a * b).sum();
        sq.max(0.0).sqrt()
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Metric and inverse metric at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAtPoint {
    pub g: TensorValue,
    pub g_inv: TensorValue,
}

impl MetricAtPoint {
    /// Validate symmetry and positive definiteness (smallest eigenvalue above
    /// `1e-10` times the largest) and invert.
    pub fn new(dim: usize, entries: &[f64]) -> Result<Self, TensorError> {
        assert_eq!(entries.len(), dim * dim);
        let m = DMatrix::from_row_slice(dim, dim, entries);
        let asym = (&m - m.transpose()).abs().max();
        let scale = m.abs().max().max(1.0);
        if asym > 1e-12 * scale {
            return Err(TensorError::NotSymmetric(asym));
        }
        let sym = (&m + m.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone()).eigenvalues;
        let (min, max) = eig.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if !(min > 1e-10 * max) || max <= 0.0 {
            return Err(TensorError::NotPositiveDefinite { min, max });
        }
        let inv = sym
            .clone()
            .cholesky()
            .ok_or(TensorError::NotPositiveDefinite { min, max })?
            .inverse();
        let inv = (&inv + inv.transpose()) * 0.5;
        Ok(MetricAtPoint {
            g: TensorValue::from_fn(dim, &[Down, Down], |i| sym[(i[0], i[1])]),
            g_inv: TensorValue::from_fn(dim, &[Up, Up], |i| inv[(i[0], i[1])]),
        })
    }

    pub fn euclidean(dim: usize) -> Self {
        let id: Vec<f64> = (0..dim * dim).map(|k| if k % (dim + 1) == 0 { 1.0 } else { 0.0 }).collect();
        Self::new(dim, &id).expect("identity is SPD")
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn g(&self, a: usize, b: usize) -> f64 {
        self.g.get(&[a, b])
    }

    pub fn g_inv(&self, a: usize, b: usize) -> f64 {
        self.g_inv.get(&[a, b])
    }

    /// `g(u, v)` for contravariant vectors.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                acc += self.g(a, b) * u[a] * v[b];
            }
        }
        acc
    }

    /// Raise a covector: `v^a = g^{ab} w_b`.
    pub fn sharp(&self, w: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|a| (0..n).map(|b| self.g_inv(a, b) * w[b]).sum()).collect()
    }

    /// Covariant `g_ab` as a tensor.
    pub fn as_tensor(&self) -> &TensorValue {
        &self.g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> MetricAtPoint {
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let m = &a * a.transpose() + DMatrix::identity(n, n) * 0.5;
        MetricAtPoint::new(n, m.as_slice()).unwrap()
    }

    fn random_tensor(n: usize, sig: &[Variance], rng: &mut ChaCha8Rng) -> TensorValue {
        TensorValue::from_fn(n, sig, |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn trace_of_identity() {
        let t = TensorValue::identity(3).contract(0, 1, None).unwrap();
        assert_eq!(t.value(), 3.0);
    }

    #[test]
    fn metric_trace_is_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_spd(4, &mut rng);
        let t = m.g.contract(0, 1, Some(&m)).unwrap();
        assert!((t.value() - 4.0).abs() < 1e-12);
        assert!((m.g.norm(&m) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn contraction_errors() {
        let t = TensorValue::zeros(3, &[Down, Down]);
        assert_eq!(t.contract(0, 1, None), Err(TensorError::MissingMetric(Down)));
        assert_eq!(t.contract(0, 0, None), Err(TensorError::SameSlot));
        assert!(matches!(t.contract(0, 2, None), Err(TensorError::SlotOutOfRange { .. })));
        let m = MetricAtPoint::euclidean(3);
        assert!(matches!(t.lower(0, &m), Err(TensorError::VarianceMismatch { .. })));
    }

    #[test]
    fn outer_of_coordinate_differential() {
        let df = TensorValue::from_components(3, &[Down], vec![1.0, 0.0, 0.0]);
        let t = df.outer(&df);
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(t.get(&[a, b]), if (a, b) == (0, 0) { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(TensorValue::zeros(3, &[Down, Up]).norm(&MetricAtPoint::euclidean(3)), 0.0);
    }

    #[test]
    fn rejects_indefinite_metric() {
        assert!(matches!(
            MetricAtPoint::new(2, &[1.0, 0.0, 0.0, -1.0]),
            Err(TensorError::NotPositiveDefinite { .. })
        ));
        assert!(matches!(MetricAtPoint::new(2, &[1.0, 0.5, 0.0, 1.0]), Err(TensorError::NotSymmetric(_))));
    }

    #[test]
    fn symmetrize_averages_permutations() {
        let t = TensorValue::from_components(2, &[Down, Down], vec![1.0, 2.0, 4.0, 3.0]);
        let s = t.symmetrize(&[0, 1]).unwrap();
        assert_eq!(s.components(), &[1.0, 3.0, 3.0, 3.0]);
    }

    #[test]
    fn algebra_properties_on_random_metrics() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..20 {
            let n = 3 + case % 3;
            let m = random_spd(n, &mut rng);
            let sig = [Down, Up, Down];
            let a = random_tensor(n, &sig, &mut rng);
            let b = random_tensor(n, &sig, &mut rng);
            let c = rng.gen_range(-2.0..2.0);

            // linearity of contraction
            let lhs = a.axpy(c, &b).contract(0, 2, Some(&m)).unwrap();
            let rhs = a
                .contract(0, 2, Some(&m))
                .unwrap()
                .axpy(c, &b.contract(0, 2, Some(&m)).unwrap());
            assert!(lhs.sub(&rhs).max_abs() < 1e-12);

            // raise/lower are inverse
            let back = a.raise(0, &m).unwrap().lower(0, &m).unwrap();
            assert!(back.sub(&a).max_abs() < 1e-12 * (1.0 + a.max_abs()));
            let back = a.lower(1, &m).unwrap().raise(1, &m).unwrap();
            assert!(back.sub(&a).max_abs() < 1e-12 * (1.0 + a.max_abs()));

            // norm does not depend on index placement
            let raised = a.raise(2, &m).unwrap();
            assert!((raised.norm(&m) - a.norm(&m)).abs() < 1e-10 * (1.0 + a.norm(&m)));
        }
    }
}
