//! Richardson-checked derivative estimates of a matrix-valued path sampled
//! on a dyadic grid, with the sampled modulus of continuity of the result.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::rules::column_max_norm;
use crate::error::Result;

pub(crate) struct DerivativeAnalysis {
    pub times: Vec<f64>,
    /// Extrapolated derivative at each grid time.
    pub derivative: Vec<DMatrix<f64>>,
    /// Richardson error estimate `‖D_{h/2} − D_h‖/3` at each grid time.
    pub error: Vec<f64>,
    /// `(δ, ω(δ))` for `δ = 4, 2, 1` grid steps.
    pub modulus: Vec<(f64, f64)>,
    /// Midpoint of the pair realizing `ω` at the finest `δ`.
    pub modulus_worst_at: f64,
}

impl DerivativeAnalysis {
    pub fn max_error(&self) -> (f64, f64) {
        self.error.iter().zip(&self.times).fold(
            (0.0, 0.0),
            |(e, at), (&ei, &ti)| if ei > e { (ei, ti) } else { (e, at) },
        )
    }
}

/// Second-order difference quotient of `f` at `t` with step `h`, switching to
/// a one-sided stencil near the ends of `[0, 1]`.
pub(crate) fn difference<F>(f: &F, t: f64, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(f64) -> Result<DMatrix<f64>>,
{
    if t - h >= 0.0 && t + h <= 1.0 {
        Ok((f(t + h)? - f(t - h)?) / (2.0 * h))
    } else if t + 2.0 * h <= 1.0 {
        Ok((f(t)? * -3.0 + f(t + h)? * 4.0 - f(t + 2.0 * h)?) / (2.0 * h))
    } else {
        Ok((f(t)? * 3.0 - f(t - h)? * 4.0 + f(t - 2.0 * h)?) / (2.0 * h))
    }
}

pub(crate) fn analyze<F>(f: F, grid_n: usize, h: f64) -> Result<DerivativeAnalysis>
where
    F: Fn(f64) -> Result<DMatrix<f64>> + Sync,
{
    let intervals = grid_n - 1;
    let times: Vec<f64> = (0..grid_n).map(|i| i as f64 / intervals as f64).collect();
    let per_point: Vec<(DMatrix<f64>, f64)> = times
        .par_iter()
        .map(|&t| {
            let coarse = difference(&f, t, h)?;
            let fine = difference(&f, t, h / 2.0)?;
            let err = column_max_norm(&(&fine - &coarse)) / 3.0;
            Ok(((fine * 4.0 - coarse) / 3.0, err))
        })
        .collect::<Result<_>>()?;
    let (derivative, error): (Vec<_>, Vec<_>) = per_point.into_iter().unzip();

    let step = 1.0 / intervals as f64;
    let mut modulus = Vec::new();
    let mut modulus_worst_at = 0.0;
    for stride in [4usize, 2, 1] {
        let mut omega: f64 = 0.0;
        let mut at = 0.0;
        let mut i = 0;
        while i + stride < grid_n {
            let w = column_max_norm(&(&derivative[i + stride] - &derivative[i]));
            if w > omega {
                omega = w;
                at = 0.5 * (times[i] + times[i + stride]);
            }
            i += stride;
        }
        modulus.push((stride as f64 * step, omega));
        modulus_worst_at = at;
    }

    Ok(DerivativeAnalysis {
        times,
        derivative,
        error,
        modulus,
        modulus_worst_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Result<DMatrix<f64>> {
        move |t| Ok(DMatrix::from_element(1, 1, f(t)))
    }

    #[test]
    fn cubic_derivative_is_recovered_including_endpoints() {
        let a = analyze(scalar(|t| t * t * t), 17, 1.0 / 256.0).unwrap();
        for (t, d) in a.times.iter().zip(&a.derivative) {
            assert!((d[(0, 0)] - 3.0 * t * t).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn kink_shows_in_the_modulus_not_the_error() {
        let a = analyze(scalar(|t| (t - 0.5).abs()), 33, 1.0 / 1024.0).unwrap();
        assert!(a.max_error().0 < 1e-12);
        for &(_, w) in &a.modulus {
            assert!((w - 1.0).abs() < 1e-9);
        }
        assert!((a.modulus_worst_at - 0.5).abs() <= 1.0 / 32.0);
    }
}
