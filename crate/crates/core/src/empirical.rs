//! Empirical distributions on the real line.
//!
//! An [`EmpiricalDistribution`] keeps its sample sorted and answers CDF and
//! quantile queries by binary search / direct indexing. The quantile is the
//! left-continuous generalized inverse `Q(v) = inf{u : F(u) >= v}` with no
//! interpolation between order statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FairError, Result};

/// Uniform tie-breaking noise added to raw scores before building a distribution.
///
/// `magnitude == 0` disables jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterSpec {
    pub magnitude: f64,
    pub seed: u64,
}

impl JitterSpec {
    pub const fn disabled() -> Self {
        Self { magnitude: 0.0, seed: 0 }
    }

    pub fn new(magnitude: f64, seed: u64) -> Result<Self> {
        if !magnitude.is_finite() || magnitude < 0.0 {
            return Err(FairError::InvalidParameter(format!(
                "jitter magnitude must be finite and non-negative, got {magnitude}"
            )));
        }
        Ok(Self { magnitude, seed })
    }

    pub fn is_enabled(&self) -> bool {
        self.magnitude > 0.0
    }

    /// Same magnitude, seed shifted by `offset` (used to decorrelate groups).
    pub fn with_seed_offset(&self, offset: u64) -> Self {
        Self {
            magnitude: self.magnitude,
            seed: self.seed.wrapping_add(offset),
        }
    }

    /// Suggested magnitude for integer-like scores: 1e-6 of the score range.
    pub fn suggested_magnitude(values: &[f64]) -> f64 {
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if lo.is_finite() && hi > lo {
            1e-6 * (hi - lo)
        } else {
            0.0
        }
    }
}

impl Default for JitterSpec {
    fn default() -> Self {
        Self::disabled()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Builds the empirical measure of `raw`, optionally jittered, sorted ascending.
    pub fn from_values(raw: &[f64], jitter: JitterSpec) -> Result<Self> {
        if raw.is_empty() {
            return Err(FairError::EmptySample);
        }
        if let Some((index, &value)) = raw.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(FairError::InvalidScore { index, value });
        }
        let mut values = raw.to_vec();
        if jitter.is_enabled() {
            let mut rng = ChaCha8Rng::seed_from_u64(jitter.seed);
            let half = jitter.magnitude / 2.0;
            for v in values.iter_mut() {
                *v += rng.random_range(-half..half);
            }
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    /// Wraps values that are already sorted and finite.
    pub fn from_sorted(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(FairError::EmptySample);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(FairError::InvalidScore { index, value });
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(FairError::Parse("values are not sorted".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    pub fn std(&self) -> f64 {
        let m = self.mean();
        (self.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / self.len() as f64).sqrt()
    }

    /// Number of sample points `<= x`.
    pub fn rank(&self, x: f64) -> usize {
        self.values.partition_point(|&v| v <= x)
    }

    /// Right-continuous CDF: `#{values <= x} / n`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.rank(x) as f64 / self.len() as f64
    }

    /// Generalized inverse of the CDF. `v = 0` is clamped to `1/n`.
    pub fn quantile(&self, v: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&v) {
            return Err(FairError::InvalidProbability(v));
        }
        Ok(self.values[self.quantile_index(v)])
    }

    /// Zero-based index of the order statistic returned by [`Self::quantile`].
    ///
    /// Callers must pass `v` in `[0, 1]`.
    pub(crate) fn quantile_index(&self, v: f64) -> usize {
        let n = self.len();
        // v = k/n computed in floating point may land a few ulps above k/n;
        // that must still select order statistic k.
        let scaled = v * n as f64 - 4.0 * n as f64 * f64::EPSILON;
        let k = scaled.ceil().clamp(1.0, n as f64) as usize;
        k - 1
    }
}
