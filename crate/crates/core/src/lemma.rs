//! Discrete mean-value estimate for paths `f: [0, 1] → ℝᵈ` whose left
//! difference quotients `k(f(t) − f(t − 1/k))` converge uniformly, with the
//! telescoping identity behind it and the reconstruction `f′ = g`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::catalog::builtin;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::regularity::report::Verdict;
use crate::regularity::rules::{classify_decay, convergence_summary, probe_matrix, Decay};
use crate::regularity::{geometric_ladder, CheckConfig};
use crate::SCHEMA_VERSION;

type PathFn = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;

#[derive(Clone)]
enum Source {
    Sampled {
        times: Vec<f64>,
        values: Vec<DVector<f64>>,
    },
    ClosedForm {
        f: PathFn,
        resolution: usize,
    },
}

/// A path given by samples with piecewise-linear interpolation, or by a
/// closed-form function together with the resolution at which it is sampled.
#[derive(Clone)]
pub struct SampledPath {
    source: Source,
    dim: usize,
}

impl fmt::Debug for SampledPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Source::Sampled { times, .. } => {
                write!(
                    f,
                    "SampledPath(sampled, {} points, dim {})",
                    times.len(),
                    self.dim
                )
            }
            Source::ClosedForm { resolution, .. } => {
                write!(
                    f,
                    "SampledPath(closed form, resolution {resolution}, dim {})",
                    self.dim
                )
            }
        }
    }
}

impl SampledPath {
    pub fn from_grid(grid: &Grid, values: Vec<DVector<f64>>) -> Result<Self> {
        Self::from_samples(grid.points().to_vec(), values)
    }

    /// Samples at strictly increasing times (not necessarily covering `[0, 1]`).
    pub fn from_samples(times: Vec<f64>, values: Vec<DVector<f64>>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::input(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.is_empty() {
            return Err(Error::input("path needs at least one sample"));
        }
        if times
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::input("sample times must be strictly increasing"));
        }
        let dim = values[0].len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::Shape("path samples differ in dimension".into()));
        }
        if values.iter().any(|v| v.iter().any(|x| !x.is_finite()))
            || times.iter().any(|t| !t.is_finite())
        {
            return Err(Error::input("path samples contain NaN or infinite values"));
        }
        Ok(SampledPath {
            source: Source::Sampled { times, values },
            dim,
        })
    }

    /// Closed-form path sampled on the uniform grid with `resolution` intervals.
    pub fn closed_form<F>(dim: usize, resolution: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> DVector<f64> + Send + Sync + 'static,
    {
        if resolution == 0 {
            return Err(Error::input("resolution must be positive"));
        }
        Ok(SampledPath {
            source: Source::ClosedForm {
                f: Arc::new(f),
                resolution,
            },
            dim,
        })
    }

    /// Scalar closed-form path.
    pub fn scalar<F>(resolution: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::closed_form(1, resolution, move |t| DVector::from_element(1, f(t)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.source, Source::ClosedForm { .. })
    }

    pub fn times(&self) -> Vec<f64> {
        match &self.source {
            Source::Sampled { times, .. } => times.clone(),
            Source::ClosedForm { resolution, .. } => uniform_times(*resolution),
        }
    }

    /// Value at `t`; sampled paths interpolate linearly and hold their end values.
    pub fn value_at(&self, t: f64) -> DVector<f64> {
        match &self.source {
            Source::ClosedForm { f, .. } => f(t),
            Source::Sampled { times, values } => {
                if t <= times[0] {
                    return values[0].clone();
                }
                let last = times.len() - 1;
                if t >= times[last] {
                    return values[last].clone();
                }
                let i = times.partition_point(|&s| s <= t);
                let (t0, t1) = (times[i - 1], times[i]);
                let w = (t - t0) / (t1 - t0);
                &values[i - 1] * (1.0 - w) + &values[i] * w
            }
        }
    }

    /// Values on the uniform grid `j/N`, `j = 0..=N`, with `N` the number of
    /// intervals. Sampled paths must already live on such a grid.
    fn uniform_values(&self) -> Result<(usize, Vec<DVector<f64>>)> {
        match &self.source {
            Source::ClosedForm { f, resolution } => Ok((
                *resolution,
                uniform_times(*resolution)
                    .into_iter()
                    .map(|t| f(t))
                    .collect(),
            )),
            Source::Sampled { times, values } => {
                let n = times.len() - 1;
                let uniform = n > 0
                    && times
                        .iter()
                        .enumerate()
                        .all(|(i, &t)| (t - i as f64 / n as f64).abs() <= 4.0 * f64::EPSILON);
                if !uniform {
                    return Err(Error::input(
                        "operation needs a path sampled on a uniform grid of [0, 1]",
                    ));
                }
                Ok((n, values.clone()))
            }
        }
    }

    fn halved(&self) -> Result<SampledPath> {
        match &self.source {
            Source::ClosedForm { f, resolution } if resolution % 2 == 0 => Ok(SampledPath {
                source: Source::ClosedForm {
                    f: f.clone(),
                    resolution: resolution / 2,
                },
                dim: self.dim,
            }),
            Source::Sampled { times, values } if times.len() % 2 == 1 => SampledPath::from_samples(
                times.iter().step_by(2).copied().collect(),
                values.iter().step_by(2).cloned().collect(),
            ),
            _ => Err(Error::input("path resolution is odd; cannot halve")),
        }
    }

    /// `f` at `1 − j/m` for `j = 0..=count`; sampled paths need `m | N`.
    fn at_fractions(&self, m: usize, count: usize) -> Result<Vec<DVector<f64>>> {
        match &self.source {
            Source::ClosedForm { f, .. } => {
                Ok((0..=count).map(|j| f(1.0 - j as f64 / m as f64)).collect())
            }
            Source::Sampled { .. } => {
                let (n, values) = self.uniform_values()?;
                if n % m != 0 {
                    return Err(Error::input(format!(
                        "step 1/{m} is not resolved by a path with {n} intervals"
                    )));
                }
                let stride = n / m;
                Ok((0..=count)
                    .map(|j| values[n - j * stride].clone())
                    .collect())
            }
        }
    }
}

fn uniform_times(n: usize) -> Vec<f64> {
    (0..=n).map(|j| j as f64 / n as f64).collect()
}

/// `t ↦ k(f(t) − f(t − 1/k))` on `t ∈ [1/k, 1]`.
pub fn left_quotients(f: &SampledPath, k: usize) -> Result<SampledPath> {
    if k == 0 {
        return Err(Error::input("k must be positive"));
    }
    let kf = k as f64;
    match &f.source {
        Source::ClosedForm {
            f: func,
            resolution,
        } => {
            let back = 1.0 / kf;
            let (times, values): (Vec<f64>, Vec<DVector<f64>>) = uniform_times(*resolution)
                .into_iter()
                .filter(|&t| t >= back)
                .map(|t| (t, (func(t) - func(t - back)) * kf))
                .unzip();
            if times.is_empty() {
                return Err(Error::input(format!("no sample time in [1/{k}, 1]")));
            }
            SampledPath::from_samples(times, values)
        }
        Source::Sampled { .. } => {
            let (n, values) = f.uniform_values()?;
            if n % k != 0 {
                return Err(Error::input(format!(
                    "1/{k} is not a multiple of the sample step 1/{n}"
                )));
            }
            let back = n / k;
            let times = (back..=n).map(|j| j as f64 / n as f64).collect();
            let q = (back..=n)
                .map(|j| (&values[j] - &values[j - back]) * kf)
                .collect();
            SampledPath::from_samples(times, q)
        }
    }
}

fn sup_norm_from(g: &SampledPath, t: f64) -> f64 {
    let mut sup = g.value_at(t).norm().max(g.value_at(1.0).norm());
    for s in g.times() {
        if s >= t && s <= 1.0 {
            sup = sup.max(g.value_at(s).norm());
        }
    }
    sup
}

/// `(1 − t)·sup_{τ∈[t,1]}‖g(τ)‖ − ‖f(1) − f(t)‖`; nonnegative under the
/// hypotheses of the mean-value estimate.
pub fn verify_mve(f: &SampledPath, g: &SampledPath, t: f64) -> f64 {
    (1.0 - t) * sup_norm_from(g, t) - (f.value_at(1.0) - f.value_at(t)).norm()
}

/// `‖(f(1) − f(1 − r/s)) − Σ_{j<nr} [f(1 − j/(ns)) − f(1 − (j+1)/(ns))]‖`.
pub fn telescope_check(f: &SampledPath, r: usize, s: usize, n: usize) -> Result<f64> {
    if r == 0 || s == 0 || n == 0 || r >= s {
        return Err(Error::input(format!(
            "need 0 < r < s and n > 0, got r={r}, s={s}, n={n}"
        )));
    }
    let m = n * s;
    let count = n * r;
    let points = f.at_fractions(m, count)?;
    let lhs = match &f.source {
        Source::ClosedForm { f: func, .. } => func(1.0) - func(1.0 - r as f64 / s as f64),
        Source::Sampled { .. } => &points[0] - &points[count],
    };
    let mut sum = DVector::zeros(f.dim());
    for j in 0..count {
        sum += &points[j] - &points[j + 1];
    }
    Ok((lhs - sum).norm())
}

/// A rational `num/den` in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: usize,
    pub den: usize,
}

impl Fraction {
    pub fn new(num: usize, den: usize) -> Result<Self> {
        if num == 0 || num >= den {
            return Err(Error::input(format!("{num}/{den} is not in (0, 1)")));
        }
        Ok(Fraction { num, den })
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepBound {
    pub holds: bool,
    /// `sup ‖f(t) − f(t − 1/(ns))‖` over the telescoping points `t ∈ [q, 1]`.
    pub sup_step: f64,
    /// `M_q = sup_{τ∈[q,1]} ‖g(τ)‖`.
    pub m_q: f64,
    /// `(M_q + ε)/(ns)`.
    pub bound: f64,
}

/// Per-step bound `‖f(t) − f(t − 1/(ns))‖ ≤ (M_q + ε)/(ns)` on the
/// telescoping points of `[q, 1]`, with `q = 1 − r/s` and `s = q.den`.
pub fn step_bound(
    f: &SampledPath,
    g: &SampledPath,
    q: Fraction,
    n: usize,
    eps: f64,
) -> Result<StepBound> {
    if n == 0 {
        return Err(Error::input("n must be positive"));
    }
    let s = q.den;
    let r = q.den - q.num;
    let m = n * s;
    let count = n * r;
    // Points 1 − j/m for j ≤ count + 1; the last one is q − 1/m ≥ 0.
    let points = f.at_fractions(m, count + 1)?;
    let sup_step = points
        .windows(2)
        .map(|w| (&w[0] - &w[1]).norm())
        .fold(0.0, f64::max);
    let m_q = sup_norm_from(g, q.value());
    let bound = (m_q + eps) / m as f64;
    Ok(StepBound {
        holds: sup_step <= bound,
        sup_step,
        m_q,
        bound,
    })
}

pub fn uniform_step_bound(
    f: &SampledPath,
    g: &SampledPath,
    q: Fraction,
    n: usize,
    eps: f64,
) -> Result<bool> {
    Ok(step_bound(f, g, q, n, eps)?.holds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaConfig {
    /// Absolute tolerance relative to `sup ‖g‖` (or 1 when `g ≡ 0`).
    pub tol_abs: f64,
    pub rate_min: f64,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig {
            tol_abs: 1e-6,
            rate_min: CheckConfig::default().rate_min,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub schema_version: String,
    /// `min_t` of the mean-value margin over the sample grid.
    pub mve_margin: f64,
    pub mve_margin_at_zero: f64,
    /// `(k, sup_{t∈[1/k,1]} ‖k(f(t) − f(t − 1/k)) − g(t)‖)`.
    pub uniform_errors: Vec<(usize, f64)>,
    pub rates: Vec<f64>,
    pub stagnation_ratio: Option<f64>,
    /// Largest telescoping residual over the admissible `(r, s, n)` probed.
    pub telescope_residual: f64,
    /// `max_t ‖h(t) − h(0)‖` with `h(t) = f(t) − ∫₀ᵗ g`.
    pub h_constancy: f64,
    pub h_constancy_coarse: f64,
    /// `h_constancy / step²` on the finest and the halved grid.
    pub c_fine: f64,
    pub c_coarse: f64,
    /// Summation roundoff level of `h`; below it the fitted `C` carries no information.
    pub h_floor: f64,
    /// `1.5·c_coarse·step² + h_floor`.
    pub tol_quad: f64,
    /// `max_t ‖g(t) − central difference of f‖` on interior grid points.
    pub derivative_agreement: f64,
    pub tol: f64,
    pub verdict: Verdict,
    pub config: LemmaConfig,
}

impl LemmaReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Uniform-grid reconstruction of `g`, extrapolated from the two finest
/// quotients `N/2` and `N`; the first two points are linear extrapolations.
fn reference_derivative(n: usize, values: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
    if n < 8 {
        return Err(Error::input("path needs at least 8 intervals"));
    }
    let nf = n as f64;
    let mut g: Vec<DVector<f64>> = Vec::with_capacity(n + 1);
    for j in 0..=n {
        if j < 2 {
            g.push(DVector::zeros(values[0].len()));
            continue;
        }
        let fine = (&values[j] - &values[j - 1]) * nf;
        let half = (&values[j] - &values[j - 2]) * (nf / 2.0);
        g.push(fine * 2.0 - half);
    }
    g[1] = &g[2] * 2.0 - &g[3];
    g[0] = &g[2] * 3.0 - &g[3] * 2.0;
    Ok(g)
}

fn h_constancy(n: usize, values: &[DVector<f64>], g: &[DVector<f64>]) -> f64 {
    let step = 1.0 / n as f64;
    let mut integral = DVector::zeros(values[0].len());
    let mut worst: f64 = 0.0;
    for j in 1..=n {
        integral += (&g[j - 1] + &g[j]) * (0.5 * step);
        worst = worst.max((&values[j] - &values[0] - &integral).norm());
    }
    worst
}

/// Default ladder for a path with `n` intervals: `8, 16, …, n/8`.
pub fn default_ladder(n: usize) -> Vec<usize> {
    geometric_ladder(8, (n / 8).max(8))
}

pub fn reconstruct_and_verify(f: &SampledPath, k_ladder: &[usize]) -> Result<LemmaReport> {
    reconstruct_with(f, k_ladder, &LemmaConfig::default())
}

pub fn reconstruct_with(
    f: &SampledPath,
    k_ladder: &[usize],
    cfg: &LemmaConfig,
) -> Result<LemmaReport> {
    let (n, values) = f.uniform_values()?;
    if k_ladder.len() < 3 || k_ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input(
            "k_ladder needs three strictly increasing rungs",
        ));
    }
    if let Some(k) = k_ladder.iter().find(|&&k| k == 0 || n % k != 0) {
        return Err(Error::input(format!(
            "rung {k} does not divide the path resolution {n}"
        )));
    }
    let g = reference_derivative(n, &values)?;
    let nf = n as f64;
    let sup_g = g.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tol = cfg.tol_abs * if sup_g > 0.0 { sup_g } else { 1.0 };

    let mut uniform_errors = Vec::new();
    for &k in k_ladder {
        let back = n / k;
        let kf = k as f64;
        let e = (back.max(2)..=n)
            .map(|j| ((&values[j] - &values[j - back]) * kf - &g[j]).norm())
            .fold(0.0, f64::max);
        uniform_errors.push((k, e));
    }
    let summary = convergence_summary(&uniform_errors);
    let as_f: Vec<(f64, f64)> = uniform_errors.iter().map(|&(k, e)| (k as f64, e)).collect();
    let decay = classify_decay(&as_f, tol, cfg.rate_min);

    // Mean-value margins via suffix maxima of ‖g‖.
    let mut suffix = vec![0.0; n + 1];
    let mut run: f64 = 0.0;
    for j in (0..=n).rev() {
        run = run.max(g[j].norm());
        suffix[j] = run;
    }
    let margins: Vec<f64> = (0..=n)
        .map(|j| (1.0 - j as f64 / nf) * suffix[j] - (&values[n] - &values[j]).norm())
        .collect();
    let mve_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);

    let mut telescope_residual: f64 = 0.0;
    for (r, s) in [(1, 2), (1, 4), (3, 4), (1, 8), (5, 8)] {
        if n % s == 0 {
            let reps = (n / s).min(64);
            telescope_residual = telescope_residual.max(telescope_check(f, r, s, reps)?);
        }
    }

    let hc = h_constancy(n, &values, &g);
    let coarse = f.halved()?;
    let (nc, coarse_values) = coarse.uniform_values()?;
    let hc_coarse = h_constancy(
        nc,
        &coarse_values,
        &reference_derivative(nc, &coarse_values)?,
    );
    let step = 1.0 / nf;
    let c_fine = hc / (step * step);
    let c_coarse = hc_coarse / (4.0 * step * step);
    let scale_f = values.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let h_floor = 1e3 * f64::EPSILON * scale_f;
    let tol_quad = 1.5 * c_coarse * step * step + h_floor;

    let derivative_agreement = (1..n)
        .map(|j| (&g[j] - (&values[j + 1] - &values[j - 1]) * (nf / 2.0)).norm())
        .fold(0.0, f64::max);

    let verdict = if decay == Decay::Converging && hc <= tol_quad && mve_margin >= -tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(LemmaReport {
        schema_version: SCHEMA_VERSION.to_string(),
        mve_margin,
        mve_margin_at_zero: margins[0],
        uniform_errors,
        rates: summary.rates,
        stagnation_ratio: summary.stagnation_ratio,
        telescope_residual,
        h_constancy: hc,
        h_constancy_coarse: hc_coarse,
        c_fine,
        c_coarse,
        h_floor,
        tol_quad,
        derivative_agreement,
        tol,
        verdict,
        config: cfg.clone(),
    })
}

/// Default sampling resolution for named closed-form paths.
pub const DEFAULT_RESOLUTION: usize = 4096;

/// Closed-form test paths: `square`, `linear`, `constant`, `kink`, and
/// `family:<name>:<probe-index>` for `t ↦ A(t)x` with a catalog family.
pub fn named_path(
    name: &str,
    resolution: usize,
    dim: Option<usize>,
    seed: u64,
) -> Result<SampledPath> {
    match name {
        "square" => SampledPath::scalar(resolution, |t| t * t),
        "linear" => SampledPath::scalar(resolution, |t| t),
        "constant" => SampledPath::scalar(resolution, |_| 1.0),
        "kink" => SampledPath::scalar(resolution, |t| (t - 0.5).abs()),
        other => {
            let mut parts = other.split(':');
            match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some("family"), Some(family), Some(index), None) => {
                    let d = dim.unwrap_or_else(|| crate::catalog::default_dim(family));
                    let entry = builtin(family, d)?;
                    let index: usize = index
                        .parse()
                        .map_err(|_| Error::input(format!("bad probe index `{index}`")))?;
                    let probes = probe_matrix(d, CheckConfig::default().random_probes, seed);
                    if index >= probes.ncols() {
                        return Err(Error::input(format!(
                            "probe index {index} out of range (0..{})",
                            probes.ncols()
                        )));
                    }
                    let x = probes.column(index).into_owned();
                    let family = entry.family;
                    SampledPath::closed_form(d, resolution, move |t| {
                        family.apply(t, &x).expect("t in [0, 1]")
                    })
                }
                _ => Err(Error::input(format!(
                    "unknown path `{other}`; expected square, linear, constant, kink or family:<name>:<probe>"
                ))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn left_quotient_examples() {
        let sq = SampledPath::scalar(16, |t| t * t).unwrap();
        let q = left_quotients(&sq, 4).unwrap();
        assert_relative_eq!(q.value_at(1.0)[0], 1.75, epsilon = 1e-15);
        let c = SampledPath::scalar(16, |_| 3.0).unwrap();
        let q = left_quotients(&c, 4).unwrap();
        assert!(q.times().iter().all(|&t| q.value_at(t)[0] == 0.0));
        let lin = SampledPath::scalar(16, |t| t).unwrap();
        let q = left_quotients(&lin, 8).unwrap();
        for t in q.times() {
            assert_relative_eq!(q.value_at(t)[0], 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn misaligned_quotient_on_sampled_path_is_rejected() {
        let grid = Grid::uniform(12).unwrap();
        let values = grid
            .points()
            .iter()
            .map(|&t| DVector::from_element(1, t))
            .collect();
        let p = SampledPath::from_grid(&grid, values).unwrap();
        assert!(left_quotients(&p, 4).is_ok());
        assert!(matches!(left_quotients(&p, 5), Err(Error::Input(_))));
    }

    #[test]
    fn mve_examples() {
        let f = SampledPath::scalar(64, |t| t * t).unwrap();
        let g = SampledPath::scalar(64, |t| 2.0 * t).unwrap();
        assert_relative_eq!(verify_mve(&f, &g, 0.0), 1.0, epsilon = 1e-15);
        let c = SampledPath::scalar(64, |_| 2.0).unwrap();
        let zero = SampledPath::scalar(64, |_| 0.0).unwrap();
        assert_eq!(verify_mve(&c, &zero, 0.3), 0.0);
        let lin = SampledPath::scalar(64, |t| t).unwrap();
        let one = SampledPath::scalar(64, |_| 1.0).unwrap();
        for t in [0.0, 0.1, 0.5, 0.77, 1.0] {
            assert_eq!(verify_mve(&lin, &one, t), 0.0);
        }
    }

    #[test]
    fn telescope_examples() {
        let f = SampledPath::scalar(64, |t| t * t).unwrap();
        assert!(telescope_check(&f, 1, 2, 3).unwrap() <= 1e-14);
        assert!(telescope_check(&f, 3, 7, 1).unwrap() <= 4.0 * f64::EPSILON);
        assert!(telescope_check(&f, 2, 2, 1).is_err());
    }

    #[test]
    fn telescope_on_sampled_path_needs_resolution() {
        let grid = Grid::uniform(16).unwrap();
        let values = grid
            .points()
            .iter()
            .map(|&t| DVector::from_element(1, t * t))
            .collect();
        let p = SampledPath::from_grid(&grid, values).unwrap();
        assert!(telescope_check(&p, 1, 4, 4).unwrap() <= 1e-15);
        assert!(matches!(telescope_check(&p, 1, 3, 1), Err(Error::Input(_))));
    }

    #[test]
    fn step_bound_examples() {
        let f = SampledPath::scalar(1024, |t| t * t).unwrap();
        let g = SampledPath::scalar(1024, |t| 2.0 * t).unwrap();
        let b = step_bound(&f, &g, Fraction::new(1, 2).unwrap(), 32, 1e-9).unwrap();
        assert!(b.holds);
        assert_relative_eq!(b.sup_step, (2.0 - 1.0 / 64.0) / 64.0, epsilon = 1e-15);
        assert_relative_eq!(b.m_q, 2.0);
        let c = SampledPath::scalar(1024, |_| 1.0).unwrap();
        let zero = SampledPath::scalar(1024, |_| 0.0).unwrap();
        let b = step_bound(&c, &zero, Fraction::new(1, 2).unwrap(), 32, 0.0).unwrap();
        assert!(b.holds);
        assert_eq!(b.sup_step, 0.0);
    }

    #[test]
    fn kink_step_bound_holds_pointwise() {
        // ‖f(t) − f(t − δ)‖ ≤ δ for a 1-Lipschitz kink with |g| = 1.
        let f = SampledPath::scalar(4096, |t| (t - 0.5).abs()).unwrap();
        let g = SampledPath::scalar(4096, |t| if t > 0.5 { 1.0 } else { -1.0 }).unwrap();
        assert!(uniform_step_bound(&f, &g, Fraction::new(1, 4).unwrap(), 64, 1e-12).unwrap());
    }

    #[test]
    fn square_path_reconstructs() {
        let f = named_path("square", 1024, None, 0).unwrap();
        let r = reconstruct_and_verify(&f, &default_ladder(1024)).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_relative_eq!(r.mve_margin_at_zero, 1.0, epsilon = 1e-9);
        assert!(r.h_constancy < 1e-12, "{}", r.h_constancy);
        for &(k, e) in &r.uniform_errors {
            assert_relative_eq!(e, 1.0 / k as f64, max_relative = 1e-9);
        }
    }

    #[test]
    fn kink_path_fails() {
        let f = named_path("kink", 4096, None, 0).unwrap();
        let r = reconstruct_and_verify(&f, &default_ladder(4096)).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.stagnation_ratio.unwrap() >= 0.9, "{:?}", r.uniform_errors);
    }

    #[test]
    fn constant_path_is_all_zero() {
        let f = named_path("constant", 1024, None, 0).unwrap();
        let r = reconstruct_and_verify(&f, &default_ladder(1024)).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.h_constancy, 0.0);
        assert_eq!(r.mve_margin, 0.0);
        assert!(r.uniform_errors.iter().all(|e| e.1 == 0.0));
    }

    #[test]
    fn nan_samples_are_rejected() {
        let r = SampledPath::from_samples(
            vec![0.0, 1.0],
            vec![DVector::from_element(1, f64::NAN), DVector::zeros(1)],
        );
        assert!(matches!(r, Err(Error::Input(_))));
    }

    #[test]
    fn unknown_path_name() {
        assert!(named_path("spiral", 64, None, 0).is_err());
        assert!(named_path("family:smooth_sin:99", 64, None, 0).is_err());
        assert!(named_path("family:smooth_sin:2", 64, None, 0).is_ok());
    }
}
