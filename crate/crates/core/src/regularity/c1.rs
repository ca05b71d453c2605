use nalgebra::DMatrix;

use super::config::CheckConfig;
use super::derivative::analyze;
use super::report::{ConditionReport, ModulusTable, Suite, Verdict};
use super::rules::{classify_modulus, column_max_norm, probe_matrix, Decay};
use super::{tolerances, Context};
use crate::error::Result;
use crate::family::OperatorFamily;

/// Continuous differentiability of `t ↦ A(t)x` for every probe `x`.
///
/// (a) the Richardson error of the central-difference derivative stays below
/// `tol` on the grid; (b) the sampled modulus of continuity of the derivative
/// vanishes under grid halving.
pub fn check_c1(family: &OperatorFamily, cfg: &CheckConfig) -> Result<ConditionReport> {
    cfg.validate()?;
    let ctx = Context::new(family, cfg)?;
    let mut report = ConditionReport::new(Suite::C1, tolerances(cfg, ctx.scale));
    let probes = probe_matrix(family.dim(), cfg.random_probes, cfg.seed);

    let path = |t: f64| -> Result<DMatrix<f64>> { Ok(family.eval(t)? * &probes) };
    let analysis = analyze(path, cfg.grid_n, cfg.fd_step)?;

    let (err, err_at) = analysis.max_error();
    report
        .diagnostics
        .insert("richardson_error_max".into(), err);
    if err < ctx.tol {
        report.push_part(
            "a",
            Verdict::Pass,
            format!("Richardson error {err:.3e} below {:.3e}", ctx.tol),
        );
    } else {
        report.add_locus(err_at);
        report.push_part(
            "a",
            Verdict::Fail,
            format!(
                "Richardson error {err:.3e} at t = {err_at} exceeds {:.3e}",
                ctx.tol
            ),
        );
    }

    let (verdict, detail) = continuity_decision(
        &mut report,
        "derivative of A(t)x",
        &analysis.modulus,
        analysis.modulus_worst_at,
        &ctx,
        cfg,
    );
    report.push_part("b", verdict, detail);

    if family.derivative_available() {
        let mut residual: f64 = 0.0;
        for (t, d) in analysis.times.iter().zip(&analysis.derivative) {
            let exact = family.derivative_at(*t)? * &probes;
            residual = residual.max(column_max_norm(&(d - exact)));
        }
        report
            .diagnostics
            .insert("oracle_residual".into(), residual);
    }
    Ok(report.finish())
}

/// Vanishing-modulus decision; records the table and returns the part outcome.
pub(crate) fn continuity_decision(
    report: &mut ConditionReport,
    quantity: &str,
    modulus: &[(f64, f64)],
    worst_at: f64,
    ctx: &Context,
    cfg: &CheckConfig,
) -> (Verdict, String) {
    let decay = classify_modulus(modulus, 10.0 * ctx.tol, cfg.rate_min);
    let omega = modulus.last().map_or(0.0, |m| m.1);
    report.moduli.push(ModulusTable {
        quantity: quantity.to_string(),
        entries: modulus.to_vec(),
        worst_at: Some(worst_at),
    });
    match decay {
        Decay::Converging => (
            Verdict::Pass,
            format!("modulus of continuity of {quantity} vanishes (omega = {omega:.3e})"),
        ),
        Decay::Stagnating => {
            report.add_locus(worst_at);
            (
                Verdict::Fail,
                format!("{quantity} jumps by {omega:.3e} near t = {worst_at}"),
            )
        }
        Decay::Undecided => (
            Verdict::Inconclusive,
            format!(
                "modulus of continuity of {quantity} decays too slowly to decide; refine grid_n"
            ),
        ),
    }
}
