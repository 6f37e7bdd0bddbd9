use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Flavor;

/// Event counts `n_ij` of one subensemble, indexed by [`Flavor::index`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlavorCounts {
    pub n: [[u64; 2]; 2],
}

impl FlavorCounts {
    /// From `(n_{+1,+1}, n_{+1,-1}, n_{-1,+1}, n_{-1,-1})`.
    pub fn from_counts(pp: u64, pm: u64, mp: u64, mm: u64) -> Self {
        Self { n: [[pp, pm], [mp, mm]] }
    }

    pub fn add(&mut self, left: Flavor, right: Flavor) {
        self.n[left.index()][right.index()] += 1;
    }

    pub fn get(&self, left: Flavor, right: Flavor) -> u64 {
        self.n[left.index()][right.index()]
    }

    pub fn total(&self) -> u64 {
        self.n.iter().flatten().sum()
    }

    /// Events with the left meson tagged `B0`.
    pub fn left_plus(&self) -> u64 {
        self.n[0][0] + self.n[0][1]
    }

    /// Events with the right meson tagged `B0`.
    pub fn right_plus(&self) -> u64 {
        self.n[0][0] + self.n[1][0]
    }

    pub fn merge(&mut self, other: &FlavorCounts) {
        for i in 0..2 {
            for j in 0..2 {
                self.n[i][j] += other.n[i][j];
            }
        }
    }

    pub fn estimate(&self) -> Result<CorrelationEstimate> {
        estimate_correlation(self)
    }
}

/// A correlation estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
}

impl CorrelationEstimate {
    /// Standard error `sqrt((1 - c^2) / n)` of a mean of `n` products `+-1`.
    pub fn from_mean(value: f64, n: u64) -> Self {
        let stderr = ((1.0 - value * value).max(0.0) / n as f64).sqrt();
        Self { value, stderr, n }
    }
}

/// `C = sum ij n_ij / sum n_ij` with standard error `sqrt((1 - C^2) / n)`.
pub fn estimate_correlation(counts: &FlavorCounts) -> Result<CorrelationEstimate> {
    let n = counts.total();
    if n == 0 {
        return Err(Error::EmptySubensemble("no events in subensemble".into()));
    }
    let same = counts.n[0][0] + counts.n[1][1];
    let opposite = counts.n[0][1] + counts.n[1][0];
    let value = (same as f64 - opposite as f64) / n as f64;
    Ok(CorrelationEstimate::from_mean(value, n))
}
