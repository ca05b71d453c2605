use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::c1::continuity_decision;
use super::config::CheckConfig;
use super::derivative::analyze;
use super::report::{ConditionReport, Suite, Verdict};
use super::rules::probe_matrix;
use super::{tolerances, Context};
use crate::error::{Error, Result};
use crate::family::OperatorFamily;
use crate::linalg::{simpson, spectral_norm};

/// Base point `s*` for the variation and differentiability items.
pub const BASE_POINT: f64 = 0.0;

/// Kato's 1953 conditions on `B(t,s) = (1 − A(t))(1 − A(s))⁻¹`:
/// (i) uniform boundedness on the grid square, (ii) bounded variation in `t`
/// (stabilization of dyadic variation sums), (iii) differentiability in `t`
/// with a continuous derivative.
pub fn check_kato53(family: &OperatorFamily, cfg: &CheckConfig) -> Result<ConditionReport> {
    cfg.validate()?;
    let ctx = Context::new(family, cfg)?;
    let mut report = ConditionReport::new(Suite::Kato53, tolerances(cfg, ctx.scale));
    report.notes.push(
        "weak differentiability in t is tested as strong differentiability; the two coincide in finite dimension".into(),
    );
    report.notes.push(
        "bounded variation over all partitions is decided by stabilization of variation sums over three dyadic refinements".into(),
    );
    report.notes.push(format!("base point s* = {BASE_POINT}"));

    let times = &ctx.times;
    let inverses: Vec<DMatrix<f64>> = match times
        .par_iter()
        .map(|&s| family.one_minus_inverse(s).map(|inv| inv.matrix))
        .collect::<Result<Vec<_>>>()
    {
        Ok(v) => v,
        Err(Error::Breakdown { t, cond }) => {
            report.push_part(
                "i",
                Verdict::Inconclusive,
                format!("(1 - A(s)) breaks down at s = {t} (condition {cond:.3e})"),
            );
            report.diagnostics.insert("breakdown_at".into(), t);
            return Ok(report.finish());
        }
        Err(e) => return Err(e),
    };
    let one_minus: Vec<DMatrix<f64>> = times
        .iter()
        .map(|&t| family.one_minus(t))
        .collect::<Result<_>>()?;

    // (i)
    let row_max: Vec<(f64, usize)> = one_minus
        .par_iter()
        .map(|m| {
            inverses
                .iter()
                .enumerate()
                .map(|(j, inv)| (spectral_norm(&(m * inv)), j))
                .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a })
        })
        .collect();
    let (sup_b, ti, sj) =
        row_max.iter().enumerate().fold(
            (0.0, 0, 0),
            |a, (i, &(v, j))| if v > a.0 { (v, i, j) } else { a },
        );
    report.bounds.sup_b = Some(sup_b);
    report.diagnostics.insert("sup_b_at_t".into(), times[ti]);
    report.diagnostics.insert("sup_b_at_s".into(), times[sj]);
    if sup_b.is_finite() {
        report.push_part(
            "i",
            Verdict::Pass,
            format!("sup ||B(t,s)|| = {sup_b:.6e} on the grid square"),
        );
    } else {
        report.push_part("i", Verdict::Fail, "B(t,s) is unbounded on the grid square");
    }

    // (ii) variation sums of t ↦ B(t, s*) on three nested dyadic grids.
    let base = family.one_minus_inverse(BASE_POINT)?.matrix;
    let b_path: Vec<DMatrix<f64>> = one_minus.iter().map(|m| m * &base).collect();
    let mut sums = Vec::new();
    for stride in [4usize, 2, 1] {
        let mut v = 0.0;
        let mut i = 0;
        while i + stride < b_path.len() {
            v += spectral_norm(&(&b_path[i + stride] - &b_path[i]));
            i += stride;
        }
        sums.push(v);
    }
    for (level, v) in sums.iter().enumerate() {
        report
            .diagnostics
            .insert(format!("variation_sum_level_{level}"), *v);
    }
    let variation = sums[2];
    report.bounds.variation_n = Some(variation);
    let (verdict, detail) = variation_decision(&sums, cfg.tol_rel);
    report.push_part("ii", verdict, detail);

    // (iii) derivative of t ↦ B(t, s*)x.
    let probes = probe_matrix(family.dim(), cfg.random_probes, cfg.seed);
    let start = &base * &probes;
    let analysis = analyze(
        |t| Ok(family.one_minus(t)? * &start),
        cfg.grid_n,
        cfg.fd_step,
    )?;
    let d = family.dim();
    let sup_db = analysis
        .derivative
        .iter()
        .map(|m| spectral_norm(&m.columns(0, d).into_owned()))
        .fold(0.0, f64::max);
    report.bounds.sup_db = Some(sup_db);

    let (err, err_at) = analysis.max_error();
    report
        .diagnostics
        .insert("richardson_error_max".into(), err);
    let (cont_verdict, cont_detail) = continuity_decision(
        &mut report,
        "derivative of B(t, s*)x",
        &analysis.modulus,
        analysis.modulus_worst_at,
        &ctx,
        cfg,
    );
    let (verdict, detail) = if err >= ctx.tol {
        report.add_locus(err_at);
        (
            Verdict::Fail,
            format!("difference quotients of B(t, s*)x do not settle at t = {err_at} (Richardson error {err:.3e})"),
        )
    } else {
        (cont_verdict, cont_detail)
    };
    report.push_part("iii", verdict, detail);

    report
        .diagnostics
        .insert("identity_residual".into(), b_identity_residual(family, 17)?);
    Ok(report.finish())
}

/// Cauchy-in-refinement rule for variation sums over nested dyadic grids.
fn variation_decision(sums: &[f64], tol_rel: f64) -> (Verdict, String) {
    let [v0, v1, v2] = [sums[0], sums[1], sums[2]];
    let growth = v2 - v1;
    if v2 <= f64::EPSILON || growth <= tol_rel * v1.max(f64::MIN_POSITIVE) {
        (
            Verdict::Pass,
            format!("variation sums stabilize: {v0:.6e}, {v1:.6e}, {v2:.6e}"),
        )
    } else if growth >= v1 - v0 {
        (
            Verdict::Fail,
            format!("variation sums grow without bound: {v0:.6e}, {v1:.6e}, {v2:.6e}"),
        )
    } else {
        (
            Verdict::Inconclusive,
            format!("variation sums still growing with shrinking increments: {v0:.6e}, {v1:.6e}, {v2:.6e}"),
        )
    }
}

/// `max ‖B(t,s) − B(t,s₀)B(s₀,s)‖` over `n × n` grid pairs and `s₀ ∈ {0, ½, 1}`.
pub fn b_identity_residual(family: &OperatorFamily, n: usize) -> Result<f64> {
    let times: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let mut worst: f64 = 0.0;
    for &s0 in &[0.0, 0.5, 1.0] {
        for &t in &times {
            let b_t_s0 = family.b_operator(t, s0)?;
            for &s in &times {
                let direct = family.b_operator(t, s)?;
                let composed = &b_t_s0 * family.b_operator(s0, s)?;
                worst = worst.max(spectral_norm(&(direct - composed)));
            }
        }
    }
    Ok(worst)
}

/// `‖B(t,s)x − B(t′,s)x − ∫_{t′}^{t} ∂_τB(τ,s)x dτ‖` with the closed-form
/// derivative `∂_τB(τ,s) = −Ȧ(τ)(1 − A(s))⁻¹` and composite Simpson.
pub fn b_integral_residual(
    family: &OperatorFamily,
    t: f64,
    t_prime: f64,
    s: f64,
    x: &DVector<f64>,
    panels: usize,
) -> Result<f64> {
    let y = family.one_minus_inverse(s)?.matrix * x;
    let lhs = (family.one_minus(t)? - family.one_minus(t_prime)?) * &y;
    let mut failure = None;
    let integral = simpson(t_prime, t, panels, |tau| match family.derivative_at(tau) {
        Ok(d) => -(d * &y),
        Err(e) => {
            failure.get_or_insert(e);
            DVector::zeros(y.len())
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((lhs - integral).norm())
}
