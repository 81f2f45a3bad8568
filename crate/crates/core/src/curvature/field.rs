use crate::jet::Jet;
use crate::tensor::{TensorValue, Variance};

/// A tensor field known through the jets of its components at one point.
#[derive(Debug, Clone)]
pub struct TensorJet {
    dim: usize,
    signature: Vec<Variance>,
    comps: Vec<Jet>,
}

impl TensorJet {
    pub fn from_fn(dim: usize, signature: &[Variance], mut f: impl FnMut(&[usize]) -> Jet) -> Self {
        let rank = signature.len();
        let len = dim.pow(rank as u32);
        let mut idx = vec![0; rank];
        let mut comps = Vec::with_capacity(len);
        for mut flat in 0..len {
            for slot in idx.iter_mut().rev() {
                *slot = flat % dim;
                flat /= dim;
            }
            comps.push(f(&idx));
        }
        TensorJet {
            dim,
            signature: signature.to_vec(),
            comps,
        }
    }

    pub fn scalar(jet: Jet) -> Self {
        TensorJet {
            dim: jet.dim(),
            signature: Vec::new(),
            comps: vec![jet],
        }
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

    /// Lowest derivative order available across components.
    pub fn order(&self) -> u8 {
        self.comps.iter().map(Jet::order).min().unwrap_or(0)
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.comps[self.flat(idx)]
    }

    /// Component values at the point.
    pub fn values(&self) -> TensorValue {
        TensorValue::from_components(self.dim, &self.signature, self.comps.iter().map(Jet::value).collect())
    }

    /// Coordinate partial `∂_c T`, appended as the last slot.
    pub fn partial_values(&self) -> TensorValue {
        let mut sig = self.signature.clone();
        sig.push(Variance::Covariant);
        TensorValue::from_fn(self.dim, &sig, |idx| {
            let (head, c) = idx.split_at(idx.len() - 1);
            self.get(head).grad(c[0])
        })
    }

    /// Covariant derivative `∇_c T`, with the derivative index appended as the
    /// last (covariant) slot. `gamma` holds `Γ^e_ab` (upper index first) and
    /// must carry at least the order of `self` minus one.
    ///
    /// `∇_c T = ∂_c T − Σ_cov Γ^e_{c i} T_{..e..} + Σ_contra Γ^i_{c e} T^{..e..}`.
    pub fn covariant_derivative(&self, gamma: &TensorJet) -> TensorJet {
        assert!(self.order() >= 1, "covariant derivative needs first partials");
        assert_eq!(gamma.rank(), 3);
        let n = self.dim;
        let mut sig = self.signature.clone();
        sig.push(Variance::Covariant);
        let rank = self.rank();
        let mut src = vec![0; rank];
        TensorJet::from_fn(n, &sig, |idx| {
            let (head, c) = idx.split_at(rank);
            let c = c[0];
            let mut acc = self.get(head).partial(c);
            for (s, &variance) in self.signature.iter().enumerate() {
                src.copy_from_slice(head);
                for e in 0..n {
                    src[s] = e;
                    let t = self.get(&src);
                    match variance {
                        Variance::Covariant => {
                            acc.add_scaled(-1.0, &(gamma.get(&[e, c, head[s]]) * t));
                        }
                        Variance::Contravariant => {
                            acc.add_scaled(1.0, &(gamma.get(&[head[s], c, e]) * t));
                        }
                    }
                }
            }
            acc
        })
    }
}
