//! Discretization of unit-interval scores into equal-width bins.
//!
//! Bins are half-open `[i/n, (i+1)/n)` with the last bin closed at 1.0, so
//! the whole of [0, 1] is covered with deterministic boundary handling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of bins for latent well-being and trust states.
pub const DEFAULT_N_BINS: usize = 6;

/// One bin of an `n_bins`-way split of [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bin {
    pub index: usize,
    pub n_bins: usize,
}

impl Bin {
    pub fn new(index: usize, n_bins: usize) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::domain(format!("n_bins must be >= 2, got {n_bins}")));
        }
        if index >= n_bins {
            return Err(Error::domain(format!(
                "bin index {index} out of range for {n_bins} bins"
            )));
        }
        Ok(Bin { index, n_bins })
    }

    /// Center of the bin interval: `(index + 0.5) / n_bins`.
    pub fn midpoint(self) -> f64 {
        (self.index as f64 + 0.5) / self.n_bins as f64
    }
}

/// Bin configuration shared by a dataset and the models learned from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinConfig {
    pub n_bins: usize,
}

impl Default for BinConfig {
    fn default() -> Self {
        BinConfig {
            n_bins: DEFAULT_N_BINS,
        }
    }
}

impl BinConfig {
    pub fn new(n_bins: usize) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::domain(format!("n_bins must be >= 2, got {n_bins}")));
        }
        Ok(BinConfig { n_bins })
    }

    pub fn discretize(self, x: f64) -> Result<Bin> {
        discretize(x, self.n_bins)
    }
}

/// Map a score in [0, 1] to its bin: `floor(x * n_bins)` clamped so that
/// x = 1.0 lands in the last bin.
pub fn discretize(x: f64, n_bins: usize) -> Result<Bin> {
    if n_bins < 2 {
        return Err(Error::domain(format!("n_bins must be >= 2, got {n_bins}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("value {x} outside [0, 1]")));
    }
    let index = ((x * n_bins as f64).floor() as usize).min(n_bins - 1);
    Ok(Bin { index, n_bins })
}

/// Continuous readout of a bin, used for expected-value trajectories and
/// utilities.
pub fn bin_midpoint(b: Bin) -> f64 {
    b.midpoint()
}
