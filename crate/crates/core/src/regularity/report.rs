use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::CheckConfig;
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Kato53,
    Yosida,
    C1,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Kato53 => "kato53",
            Suite::Yosida => "yosida",
            Suite::C1 => "c1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Conjunction where any failure dominates and inconclusive parts taint a pass.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

/// Outcome of one numbered item of a condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartResult {
    pub part: String,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variation_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quotient_m: Option<f64>,
}

/// `(k, sup_error)` pairs with the rates fitted between consecutive rungs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub entries: Vec<(usize, f64)>,
    pub rates: Vec<f64>,
    /// Smallest ratio `e(2k)/e(k)` over the last three rungs; near 1 when the
    /// errors stagnate and near ½ for first-order decay.
    pub stagnation_ratio: Option<f64>,
}

/// Sampled modulus of continuity `ω(δ)` at successively halved `δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusTable {
    pub quantity: String,
    pub entries: Vec<(f64, f64)>,
    /// Location of the largest increment at the smallest `δ`.
    pub worst_at: Option<f64>,
}

/// Tolerances actually applied, echoed so that every verdict is auditable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TolerancesUsed {
    pub config: CheckConfig,
    /// `sup_t ‖A(t)‖` on the check grid.
    pub scale: f64,
    /// `tol_abs · scale`.
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub schema_version: String,
    pub suite: Suite,
    pub verdict: Verdict,
    pub parts: Vec<PartResult>,
    pub bounds: Bounds,
    pub convergence: Convergence,
    pub moduli: Vec<ModulusTable>,
    pub failure_loci: Vec<f64>,
    pub diagnostics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub tolerances_used: TolerancesUsed,
}

impl ConditionReport {
    pub(crate) fn new(suite: Suite, tolerances_used: TolerancesUsed) -> Self {
        ConditionReport {
            schema_version: SCHEMA_VERSION.to_string(),
            suite,
            verdict: Verdict::Inconclusive,
            parts: Vec::new(),
            bounds: Bounds::default(),
            convergence: Convergence::default(),
            moduli: Vec::new(),
            failure_loci: Vec::new(),
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
            tolerances_used,
        }
    }

    pub(crate) fn push_part(&mut self, part: &str, verdict: Verdict, detail: impl Into<String>) {
        self.parts.push(PartResult {
            part: part.to_string(),
            verdict,
            detail: detail.into(),
        });
    }

    pub(crate) fn add_locus(&mut self, t: f64) {
        if !self.failure_loci.contains(&t) {
            self.failure_loci.push(t);
        }
    }

    /// Combines part verdicts; loci are kept only when the verdict is fail.
    pub(crate) fn finish(mut self) -> Self {
        self.verdict = self
            .parts
            .iter()
            .fold(Verdict::Pass, |acc, p| acc.and(p.verdict));
        if self.verdict != Verdict::Fail {
            self.failure_loci.clear();
        }
        self.failure_loci.sort_by(f64::total_cmp);
        self
    }

    pub fn part(&self, name: &str) -> Option<&PartResult> {
        self.parts.iter().find(|p| p.part == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
