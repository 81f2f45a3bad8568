//! Deterministic rejection sampling of chart points.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::curvature::ChartDomain;

/// Below this acceptance rate the predicate is considered degenerate.
pub const MIN_ACCEPTANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("acceptance rate {accepted}/{attempts} fell below {MIN_ACCEPTANCE}; the domain predicate rejects almost every point of its box")]
    LowAcceptance { accepted: usize, attempts: usize },
    #[error("sampling box has an empty or non-finite side on axis {axis}")]
    BadBox { axis: usize },
}

/// Uniform double in `[0, 1)` from the top 53 bits of the integer stream.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `count` points of `domain`, drawn uniformly from its box and filtered by its
/// constraints. The same seed yields bitwise identical points everywhere.
pub fn sample_points(domain: &ChartDomain, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, SamplingError> {
    for (axis, &(lo, hi)) in domain.bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(SamplingError::BadBox { axis });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_attempts = (count as f64 / MIN_ACCEPTANCE).ceil() as usize + 100;
    let mut points = Vec::with_capacity(count);
    let mut attempts = 0;
    while points.len() < count {
        if attempts >= max_attempts {
            return Err(SamplingError::LowAcceptance {
                accepted: points.len(),
                attempts,
            });
        }
        attempts += 1;
        let p: Vec<f64> = domain.bounds.iter().map(|&(lo, hi)| lo + unit(&mut rng) * (hi - lo)).collect();
        if domain.contains(&p) {
            points.push(p);
        }
    }
    Ok(points)
}
