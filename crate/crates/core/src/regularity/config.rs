use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Knobs shared by the three condition suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    /// Points per axis of the finest check grid; must be `2^m + 1`.
    pub grid_n: usize,
    /// Seeded random unit probes added to the `d` canonical basis vectors.
    pub random_probes: usize,
    /// Quotient indices `k`, strictly increasing.
    pub k_ladder: Vec<usize>,
    /// Absolute tolerance relative to `scale = sup_t ‖A(t)‖`.
    pub tol_abs: f64,
    /// Relative growth allowed between variation sums of consecutive refinements.
    pub tol_rel: f64,
    /// Minimal empirical convergence rate (log₂ of the error ratio per ladder doubling).
    pub rate_min: f64,
    /// Base step `h` of the central differences (the second estimate uses `h/2`).
    pub fd_step: f64,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            grid_n: 129,
            random_probes: 8,
            k_ladder: geometric_ladder(8, 1024),
            tol_abs: 1e-6,
            tol_rel: 1e-3,
            rate_min: 0.8,
            fd_step: 1.0 / 1024.0,
            seed: 0x5eed,
        }
    }
}

/// `first, 2·first, …` up to and including `last`.
pub fn geometric_ladder(first: usize, last: usize) -> Vec<usize> {
    let mut k = first.max(1);
    let mut out = Vec::new();
    while k <= last {
        out.push(k);
        k *= 2;
    }
    out
}

impl CheckConfig {
    pub fn with_k_max(mut self, k_max: usize) -> Self {
        self.k_ladder = geometric_ladder(8.min(k_max), k_max);
        self
    }

    pub fn k_max(&self) -> usize {
        *self.k_ladder.last().expect("validated ladder is nonempty")
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 5 || !(self.grid_n - 1).is_power_of_two() {
            return Err(Error::input(format!(
                "grid_n must be 2^m + 1 with m >= 2, got {}",
                self.grid_n
            )));
        }
        if self.k_ladder.len() < 3 {
            return Err(Error::input("k_ladder needs at least three rungs"));
        }
        if self.k_ladder.windows(2).any(|w| w[1] <= w[0]) || self.k_ladder[0] == 0 {
            return Err(Error::input(
                "k_ladder must be positive and strictly increasing",
            ));
        }
        if !self.k_max().is_power_of_two() {
            return Err(Error::input("k_max must be a power of two"));
        }
        if !(self.tol_abs > 0.0 && self.tol_rel > 0.0 && self.rate_min > 0.0) {
            return Err(Error::input("tolerances and rate_min must be positive"));
        }
        if !(self.fd_step > 0.0 && self.fd_step <= 1.0 / (self.grid_n - 1) as f64) {
            return Err(Error::input(
                "fd_step must be positive and at most the grid step",
            ));
        }
        Ok(())
    }
}
