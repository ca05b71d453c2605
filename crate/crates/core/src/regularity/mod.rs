//! The three executable condition suites and the equivalence harness.

mod c1;
pub mod config;
mod derivative;
mod equivalence;
mod kato;
pub mod report;
pub mod rules;
mod yosida;

pub use c1::check_c1;
pub use config::{geometric_ladder, CheckConfig};
pub use equivalence::{equivalence_for, equivalence_matrix, Agreement, EquivalenceReport};
pub use kato::{b_identity_residual, b_integral_residual, check_kato53, BASE_POINT};
pub use report::{ConditionReport, Suite, Verdict};
pub use yosida::{
    check_yosida, limit_path, quotient_series, yosida_modified_flag, LimitPath, QuotientSeries,
};

use crate::error::Result;
use crate::family::OperatorFamily;
use report::TolerancesUsed;

/// Grid and tolerance shared by the parts of one suite run.
pub(crate) struct Context {
    pub times: Vec<f64>,
    pub scale: f64,
    pub tol: f64,
}

impl Context {
    pub fn new(family: &OperatorFamily, cfg: &CheckConfig) -> Result<Self> {
        let n = cfg.grid_n;
        let times: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let mut scale = family.scale_on(&times)?;
        if scale == 0.0 {
            scale = 1.0;
        }
        Ok(Context {
            times,
            scale,
            tol: cfg.tol_abs * scale,
        })
    }
}

pub(crate) fn tolerances(cfg: &CheckConfig, scale: f64) -> TolerancesUsed {
    TolerancesUsed {
        config: cfg.clone(),
        scale,
        tol: cfg.tol_abs * scale,
    }
}
