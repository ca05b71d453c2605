use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::c1::continuity_decision;
use super::config::CheckConfig;
use super::report::{ConditionReport, Suite, Verdict};
use super::rules::{classify_decay, column_max_norm, convergence_summary, probe_matrix, Decay};
use super::{tolerances, Context};
use crate::error::{Error, Result};
use crate::family::OperatorFamily;
use crate::linalg::spectral_norm;

/// The ladder `k ↦ k·C(t, t − 1/k)x` at one time and probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientSeries {
    pub t: f64,
    pub x: DVector<f64>,
    /// Only rungs with `t − 1/k ≥ 0`.
    pub entries: Vec<(usize, DVector<f64>)>,
    /// Richardson extrapolation of the last two entries.
    pub limit_estimate: Option<DVector<f64>>,
}

/// Extrapolates a first-order sequence from rungs `k₀ < k₁`.
fn richardson(k0: usize, q0: &DMatrix<f64>, k1: usize, q1: &DMatrix<f64>) -> DMatrix<f64> {
    let rho = k1 as f64 / k0 as f64;
    (q1 * rho - q0) / (rho - 1.0)
}

fn quotient(family: &OperatorFamily, t: f64, k: usize, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let s = t - 1.0 / k as f64;
    let y = family.resolvent_at(s)? * x;
    Ok((family.eval(t)? * y - x) * k as f64)
}

pub fn quotient_series(
    family: &OperatorFamily,
    t: f64,
    x: &DVector<f64>,
    ladder: &[usize],
) -> Result<QuotientSeries> {
    let xm = DMatrix::from_column_slice(x.len(), 1, x.as_slice());
    let mut entries = Vec::new();
    for &k in ladder {
        if t - 1.0 / k as f64 >= 0.0 {
            let q = quotient(family, t, k, &xm)?;
            entries.push((k, q.column(0).into_owned()));
        }
    }
    let limit_estimate = (entries.len() >= 2).then(|| {
        let n = entries.len();
        let (k0, q0) = &entries[n - 2];
        let (k1, q1) = &entries[n - 1];
        let as_mat = |v: &DVector<f64>| DMatrix::from_column_slice(v.len(), 1, v.as_slice());
        richardson(*k0, &as_mat(q0), *k1, &as_mat(q1))
            .column(0)
            .into_owned()
    });
    Ok(QuotientSeries {
        t,
        x: x.clone(),
        entries,
        limit_estimate,
    })
}

/// Sample points per unit time relative to `k_max`; every rung's window
/// `(t − 1/k, t]` then holds at least this many sample points.
pub const SAMPLES_PER_RUNG: usize = 32;

/// Extrapolated limit `C(t)x` on the fine sample set `t = j/(32 k_max)`.
#[derive(Debug, Clone)]
pub struct LimitPath {
    pub times: Vec<f64>,
    /// `None` near `t = 0` where the reference rungs do not fit.
    pub values: Vec<Option<DMatrix<f64>>>,
}

/// Quotients on the fine sample set. The reference limit is extrapolated from
/// the rungs `4 k_max` and `8 k_max`, beyond the ladder being assessed.
struct Sampler<'a> {
    family: &'a OperatorFamily,
    probes: &'a DMatrix<f64>,
    ladder: &'a [usize],
    per_unit: usize,
}

struct PointData {
    limit: Option<DMatrix<f64>>,
    /// Error against the limit per ladder rung, where defined.
    errors: Vec<Option<f64>>,
}

impl<'a> Sampler<'a> {
    fn new(family: &'a OperatorFamily, probes: &'a DMatrix<f64>, cfg: &'a CheckConfig) -> Self {
        Sampler {
            family,
            probes,
            ladder: &cfg.k_ladder,
            per_unit: SAMPLES_PER_RUNG * cfg.k_max(),
        }
    }

    fn len(&self) -> usize {
        self.per_unit + 1
    }

    fn time(&self, i: usize) -> f64 {
        i as f64 / self.per_unit as f64
    }

    fn reference_rungs(&self) -> (usize, usize) {
        let k_max = *self.ladder.last().unwrap();
        (4 * k_max, 8 * k_max)
    }

    fn quotient(&self, a_t: &DMatrix<f64>, i: usize, k: usize) -> Result<Option<DMatrix<f64>>> {
        let back = self.per_unit / k;
        if i < back {
            return Ok(None);
        }
        let y = self.family.resolvent_at(self.time(i - back))? * self.probes;
        Ok(Some((a_t * y - self.probes) * k as f64))
    }

    fn point(&self, i: usize, with_errors: bool) -> Result<PointData> {
        let a_t = self.family.eval(self.time(i))?;
        let (r0, r1) = self.reference_rungs();
        let limit = match (self.quotient(&a_t, i, r0)?, self.quotient(&a_t, i, r1)?) {
            (Some(q0), Some(q1)) => Some(richardson(r0, &q0, r1, &q1)),
            _ => None,
        };
        let mut errors = Vec::new();
        if with_errors {
            for &k in self.ladder {
                let e = match (&limit, self.quotient(&a_t, i, k)?) {
                    (Some(l), Some(q)) => Some(column_max_norm(&(q - l))),
                    _ => None,
                };
                errors.push(e);
            }
        }
        Ok(PointData { limit, errors })
    }
}

/// Per-chunk maxima, merged in chunk order so ties resolve deterministically.
struct ChunkSummary {
    errors: Vec<(f64, f64)>,
    moduli: Vec<(f64, f64)>,
}

const CHUNK: usize = 512;
const STRIDES: [usize; 3] = [4, 2, 1];

fn keep_max(slot: &mut (f64, f64), value: f64, at: f64) {
    if value > slot.0 {
        *slot = (value, at);
    }
}

fn summarize(sampler: &Sampler) -> Result<ChunkSummary> {
    let n = sampler.len();
    let (r0, _) = sampler.reference_rungs();
    let first = sampler.per_unit / r0;
    let chunks: Vec<ChunkSummary> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = ((c + 1) * CHUNK).min(n);
            let halo_end = (end + STRIDES[0]).min(n);
            let points: Vec<PointData> = (start..halo_end)
                .map(|i| sampler.point(i, i < end))
                .collect::<Result<_>>()?;
            let mut errors = vec![(0.0, 0.0); sampler.ladder.len()];
            let mut moduli = vec![(0.0, 0.0); STRIDES.len()];
            for i in start..end {
                let p = &points[i - start];
                for (slot, e) in errors.iter_mut().zip(&p.errors) {
                    if let Some(e) = e {
                        keep_max(slot, *e, sampler.time(i));
                    }
                }
                if i < first {
                    continue;
                }
                for (slot, &stride) in moduli.iter_mut().zip(STRIDES.iter()) {
                    if !(i - first).is_multiple_of(stride) || i + stride >= n {
                        continue;
                    }
                    if let (Some(a), Some(b)) = (&p.limit, &points[i + stride - start].limit) {
                        let mid = 0.5 * (sampler.time(i) + sampler.time(i + stride));
                        keep_max(slot, column_max_norm(&(b - a)), mid);
                    }
                }
            }
            Ok(ChunkSummary { errors, moduli })
        })
        .collect::<Result<_>>()?;
    let mut total = ChunkSummary {
        errors: vec![(0.0, 0.0); sampler.ladder.len()],
        moduli: vec![(0.0, 0.0); STRIDES.len()],
    };
    for c in chunks {
        for (slot, v) in total.errors.iter_mut().zip(c.errors) {
            keep_max(slot, v.0, v.1);
        }
        for (slot, v) in total.moduli.iter_mut().zip(c.moduli) {
            keep_max(slot, v.0, v.1);
        }
    }
    Ok(total)
}

/// Extrapolated limit path of the Yosida quotients for the configured probes.
pub fn limit_path(family: &OperatorFamily, cfg: &CheckConfig) -> Result<LimitPath> {
    cfg.validate()?;
    let probes = probe_matrix(family.dim(), cfg.random_probes, cfg.seed);
    let sampler = Sampler::new(family, &probes, cfg);
    let values = (0..sampler.len())
        .into_par_iter()
        .map(|i| sampler.point(i, false).map(|p| p.limit))
        .collect::<Result<_>>()?;
    let times = (0..sampler.len()).map(|i| sampler.time(i)).collect();
    Ok(LimitPath { times, values })
}

/// Yosida's conditions on `C(t,s) = A(t)A(s)⁻¹ − 1`:
/// (i) `(t − s)⁻¹C(t,s)x` bounded and uniformly continuous off the diagonal,
/// (ii) `k·C(t, t − 1/k)x` converges uniformly in `t`,
/// (iii) the limit `C(t)x` is continuous.
pub fn check_yosida(family: &OperatorFamily, cfg: &CheckConfig) -> Result<ConditionReport> {
    cfg.validate()?;
    let ctx = Context::new(family, cfg)?;
    let mut report = ConditionReport::new(Suite::Yosida, tolerances(cfg, ctx.scale));
    let probes = probe_matrix(family.dim(), cfg.random_probes, cfg.seed);

    match part_one(family, cfg, &ctx, &probes, &mut report) {
        Ok(()) => {}
        Err(Error::Breakdown { t, cond }) => {
            report.push_part(
                "i",
                Verdict::Inconclusive,
                format!("A(s) breaks down at s = {t} (condition {cond:.3e})"),
            );
            report.diagnostics.insert("breakdown_at".into(), t);
            return Ok(report.finish());
        }
        Err(e) => return Err(e),
    }

    let sampler = Sampler::new(family, &probes, cfg);
    let summary = match summarize(&sampler) {
        Ok(s) => s,
        Err(Error::Breakdown { t, cond }) => {
            report.push_part(
                "ii",
                Verdict::Inconclusive,
                format!("A(s) breaks down at s = {t} (condition {cond:.3e})"),
            );
            report.diagnostics.insert("breakdown_at".into(), t);
            return Ok(report.finish());
        }
        Err(e) => return Err(e),
    };

    // (ii) sup over t ∈ [1/k, 1] of the distance to the extrapolated limit.
    let entries: Vec<(usize, f64)> = cfg
        .k_ladder
        .iter()
        .zip(&summary.errors)
        .map(|(&k, &(e, _))| (k, e))
        .collect();
    let last_worst_at = summary.errors.last().map_or(0.0, |e| e.1);
    report.convergence = convergence_summary(&entries);
    let as_f: Vec<(f64, f64)> = entries.iter().map(|&(k, e)| (k as f64, e)).collect();
    let tail = entries.last().map_or(0.0, |e| e.1);
    match classify_decay(&as_f, ctx.tol, cfg.rate_min) {
        Decay::Converging => report.push_part(
            "ii",
            Verdict::Pass,
            format!(
                "quotients converge uniformly; sup error {tail:.3e} at k = {}",
                cfg.k_max()
            ),
        ),
        Decay::Stagnating => {
            report.add_locus(last_worst_at);
            report.push_part(
                "ii",
                Verdict::Fail,
                format!("sup error stagnates at {tail:.3e}; convergence is not uniform near t = {last_worst_at}"),
            )
        }
        Decay::Undecided => report.push_part(
            "ii",
            Verdict::Inconclusive,
            format!("sup error {tail:.3e} still decreasing slowly; increase k_ladder"),
        ),
    }

    // (iii) continuity of the limit.
    let step = 1.0 / sampler.per_unit as f64;
    let modulus: Vec<(f64, f64)> = STRIDES
        .iter()
        .zip(&summary.moduli)
        .map(|(&s, &(w, _))| (s as f64 * step, w))
        .collect();
    let worst_at = summary.moduli.last().map_or(0.0, |m| m.1);
    let (verdict, detail) =
        continuity_decision(&mut report, "limit C(t)x", &modulus, worst_at, &ctx, cfg);
    report.push_part("iii", verdict, detail);

    let at_one = sampler.point(sampler.len() - 1, false)?;
    if let Some(c1) = at_one.limit {
        report
            .diagnostics
            .insert("limit_norm_at_1".into(), column_max_norm(&c1));
    }
    Ok(report.finish())
}

fn part_one(
    family: &OperatorFamily,
    cfg: &CheckConfig,
    ctx: &Context,
    probes: &DMatrix<f64>,
    report: &mut ConditionReport,
) -> Result<()> {
    let times = &ctx.times;
    let n = times.len();
    let d = family.dim();
    let ops: Vec<DMatrix<f64>> = times
        .iter()
        .map(|&t| family.eval(t))
        .collect::<Result<_>>()?;
    let inverses: Vec<DMatrix<f64>> = times
        .par_iter()
        .map(|&s| family.resolvent_at(s))
        .collect::<Result<_>>()?;
    let preimages: Vec<DMatrix<f64>> = inverses.iter().map(|inv| inv * probes).collect();
    let eye = DMatrix::<f64>::identity(d, d);

    let (quotient_m, mt, ms) = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let c = &ops[i] * &inverses[j] - &eye;
                    (spectral_norm(&c) / (times[i] - times[j]).abs(), i, j)
                })
                .fold((0.0, 0, 0), |a, b| if b.0 > a.0 { b } else { a })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0, 0), |a, b| if b.0 > a.0 { b } else { a });
    report.bounds.quotient_m = Some(quotient_m);
    report
        .diagnostics
        .insert("quotient_m_at_t".into(), times[mt]);
    report
        .diagnostics
        .insert("quotient_m_at_s".into(), times[ms]);

    let q = |i: usize, j: usize| -> DMatrix<f64> {
        (&ops[i] * &preimages[j] - probes) / (times[i] - times[j])
    };
    let mut modulus = Vec::new();
    let mut worst_at = 0.0;
    for stride in [4usize, 2, 1] {
        let (omega, at) = (0..n)
            .into_par_iter()
            .filter(|i| i % stride == 0)
            .map(|i| {
                let mut best = (0.0f64, 0.0f64);
                let mut consider = |w: f64, t: f64| {
                    if w > best.0 {
                        best = (w, t);
                    }
                };
                let mut j = 0;
                while j < n {
                    if i != j {
                        let here = q(i, j);
                        if i + stride < n && i + stride != j {
                            consider(column_max_norm(&(q(i + stride, j) - &here)), times[i]);
                        }
                        if j + stride < n && j + stride != i {
                            consider(column_max_norm(&(q(i, j + stride) - &here)), times[i]);
                        }
                        if i == j + stride {
                            // across the diagonal: (t_j + δ, t_j) against (t_j, t_j + δ)
                            consider(column_max_norm(&(q(j, i) - &here)), times[j]);
                        }
                    }
                    j += stride;
                }
                best
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
        modulus.push((stride as f64 / (n - 1) as f64, omega));
        worst_at = at;
    }
    let (verdict, mut detail) =
        continuity_decision(report, "(t-s)^-1 C(t,s)x", &modulus, worst_at, ctx, cfg);
    let verdict = if quotient_m.is_finite() {
        verdict
    } else {
        detail = "(t-s)^-1 C(t,s) is unbounded on the grid".into();
        Verdict::Fail
    };
    report.push_part("i", verdict, format!("M = {quotient_m:.6e}; {detail}"));
    Ok(())
}

/// Whether the limit `C(t)x` extends to `t = 0`: requires part (ii) to have
/// passed and the boundary values at `t = 1/k_max, 2/k_max, 4/k_max` to form
/// a Cauchy sequence (below `tol` or contracting geometrically).
pub fn yosida_modified_flag(
    family: &OperatorFamily,
    cfg: &CheckConfig,
    report: &ConditionReport,
) -> bool {
    let passed_ii = report
        .part("ii")
        .is_some_and(|p| p.verdict == Verdict::Pass);
    if !passed_ii {
        return false;
    }
    boundary_limit_cauchy(family, cfg, report.tolerances_used.tol).unwrap_or(false)
}

fn boundary_limit_cauchy(family: &OperatorFamily, cfg: &CheckConfig, tol: f64) -> Result<bool> {
    let probes = probe_matrix(family.dim(), cfg.random_probes, cfg.seed);
    let k_max = cfg.k_max();
    // Rungs beyond the ladder so that t − 1/K stays inside [0, 1] at t = 1/k_max.
    let (k0, k1) = (16 * k_max, 32 * k_max);
    let mut values = Vec::new();
    for m in [1usize, 2, 4] {
        let t = m as f64 / k_max as f64;
        let q0 = quotient(family, t, k0, &probes)?;
        let q1 = quotient(family, t, k1, &probes)?;
        values.push(richardson(k0, &q0, k1, &q1));
    }
    let near = column_max_norm(&(&values[1] - &values[0]));
    let far = column_max_norm(&(&values[2] - &values[1]));
    Ok(near <= tol || near <= 0.75 * far)
}
