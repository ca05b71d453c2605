//! Decision rules shared by the suites: convergence of quotient ladders,
//! vanishing moduli of continuity, probe vectors.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::report::{Convergence, Verdict};

/// Classification of an error sequence along a refinement ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decay {
    /// Tail below tolerance, or decaying at least at `rate_min`.
    Converging,
    /// Errors no longer decrease in any meaningful way.
    Stagnating,
    /// Decreasing, but too slowly to decide on this ladder.
    Undecided,
}

impl Decay {
    pub fn verdict(self) -> Verdict {
        match self {
            Decay::Converging => Verdict::Pass,
            Decay::Stagnating => Verdict::Fail,
            Decay::Undecided => Verdict::Inconclusive,
        }
    }
}

/// Empirical rate between consecutive rungs: `log(e₀/e₁) / log(k₁/k₀)`.
pub fn pairwise_rates(entries: &[(f64, f64)]) -> Vec<f64> {
    entries
        .windows(2)
        .map(|w| {
            let (k0, e0) = w[0];
            let (k1, e1) = w[1];
            if e0 == 0.0 && e1 == 0.0 {
                f64::INFINITY
            } else {
                (e0 / e1).ln() / (k1 / k0).ln()
            }
        })
        .collect()
}

/// Three-rung rule on an error sequence indexed by a growing refinement
/// parameter (`k`, or `1/δ`).
///
/// Converging if the last error is below `tol` or both rates over the last
/// three rungs reach `rate_min`; stagnating if the total decay over those
/// three rungs is less than a single rung at `rate_min`.
pub fn classify_decay(entries: &[(f64, f64)], tol: f64, rate_min: f64) -> Decay {
    let n = entries.len();
    assert!(n >= 3, "decay rule needs three rungs");
    let last = entries[n - 1].1;
    if last <= tol {
        return Decay::Converging;
    }
    let tail = &entries[n - 3..];
    let rates = pairwise_rates(tail);
    if rates.iter().all(|&r| r >= rate_min) {
        return Decay::Converging;
    }
    let span = (tail[2].0 / tail[0].0).ln();
    let total = (tail[0].1 / tail[2].1).ln() / span;
    if total < rate_min / 2.0 {
        Decay::Stagnating
    } else {
        Decay::Undecided
    }
}

pub fn convergence_summary(entries: &[(usize, f64)]) -> Convergence {
    let as_f: Vec<(f64, f64)> = entries.iter().map(|&(k, e)| (k as f64, e)).collect();
    let n = entries.len();
    let stagnation_ratio = (n >= 3 && entries[n - 3].1 > 0.0 && entries[n - 2].1 > 0.0)
        .then(|| (entries[n - 1].1 / entries[n - 2].1).min(entries[n - 2].1 / entries[n - 3].1));
    Convergence {
        entries: entries.to_vec(),
        rates: pairwise_rates(&as_f),
        stagnation_ratio,
    }
}

/// Continuity decision from `(δ, ω(δ))` with `δ` halving along the table.
pub fn classify_modulus(table: &[(f64, f64)], tol: f64, rate_min: f64) -> Decay {
    let as_refinement: Vec<(f64, f64)> = table.iter().map(|&(d, w)| (1.0 / d, w)).collect();
    classify_decay(&as_refinement, tol, rate_min)
}

/// `d` canonical basis vectors followed by `extra` seeded random unit vectors,
/// as the columns of a `d × (d + extra)` matrix.
pub fn probe_matrix(d: usize, extra: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<DVector<f64>> = (0..d)
        .map(|i| {
            let mut e = DVector::zeros(d);
            e[i] = 1.0;
            e
        })
        .collect();
    for _ in 0..extra {
        let v = loop {
            let v = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
            let n = v.norm();
            if n > 1e-3 {
                break v / n;
            }
        };
        cols.push(v);
    }
    DMatrix::from_columns(&cols)
}

/// Largest Euclidean norm among the columns; `sup_x ‖M x‖` over the probes.
pub fn column_max_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ladder(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        [8.0, 16.0, 32.0, 64.0].iter().map(|&k| (k, f(k))).collect()
    }

    #[test]
    fn first_order_decay_converges() {
        assert_eq!(
            classify_decay(&ladder(|k| 3.0 / k), 1e-9, 0.8),
            Decay::Converging
        );
    }

    #[test]
    fn flat_errors_stagnate() {
        assert_eq!(
            classify_decay(&ladder(|_| 0.7), 1e-9, 0.8),
            Decay::Stagnating
        );
        assert_eq!(
            classify_decay(&ladder(|k| 1.0 + 1.0 / k), 1e-9, 0.8),
            Decay::Stagnating
        );
    }

    #[test]
    fn slow_decay_is_undecided() {
        assert_eq!(
            classify_decay(&ladder(|k| k.powf(-0.5)), 1e-9, 0.8),
            Decay::Undecided
        );
    }

    #[test]
    fn tiny_tail_converges_regardless_of_rate() {
        assert_eq!(
            classify_decay(&ladder(|_| 1e-12), 1e-9, 0.8),
            Decay::Converging
        );
    }

    #[test]
    fn modulus_of_lipschitz_path_vanishes() {
        let table = [(0.25, 0.5), (0.125, 0.25), (0.0625, 0.125)];
        assert_eq!(classify_modulus(&table, 1e-6, 0.8), Decay::Converging);
        let jump = [(0.25, 2.0), (0.125, 2.0), (0.0625, 2.0)];
        assert_eq!(classify_modulus(&jump, 1e-6, 0.8), Decay::Stagnating);
    }

    #[test]
    fn probes_are_unit_and_seeded() {
        let p = probe_matrix(3, 5, 7);
        assert_eq!(p.ncols(), 8);
        for c in p.column_iter() {
            assert!((c.norm() - 1.0).abs() < 1e-14);
        }
        assert_eq!(p, probe_matrix(3, 5, 7));
        assert_ne!(p, probe_matrix(3, 5, 8));
    }
}
