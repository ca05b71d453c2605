use serde::{Deserialize, Serialize};

use super::config::CheckConfig;
use super::report::{ConditionReport, Verdict};
use super::{check_c1, check_kato53, check_yosida};
use crate::catalog::{CatalogEntry, Expected, Truth};
use crate::error::Result;
use crate::family::OperatorFamily;
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    Agree,
    Disagree,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub schema_version: String,
    pub family: String,
    /// Verdicts in the order kato53, yosida, c1.
    pub verdicts: [Verdict; 3],
    pub agreement: Agreement,
    /// `None` when there is no ground truth or the run was inconclusive.
    pub matches_truth: Option<bool>,
    pub mismatches: Vec<String>,
    pub reports: Vec<ConditionReport>,
}

impl EquivalenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn expected_verdict(e: Expected) -> Verdict {
    match e {
        Expected::Pass => Verdict::Pass,
        Expected::Fail => Verdict::Fail,
    }
}

/// Runs the three suites on one family and compares their verdicts.
pub fn equivalence_for(
    name: &str,
    family: &OperatorFamily,
    truth: Option<Truth>,
    cfg: &CheckConfig,
) -> Result<EquivalenceReport> {
    let reports = vec![
        check_kato53(family, cfg)?,
        check_yosida(family, cfg)?,
        check_c1(family, cfg)?,
    ];
    let verdicts = [reports[0].verdict, reports[1].verdict, reports[2].verdict];
    let agreement = if verdicts.contains(&Verdict::Inconclusive) {
        Agreement::Inconclusive
    } else if verdicts.iter().all(|v| *v == verdicts[0]) {
        Agreement::Agree
    } else {
        Agreement::Disagree
    };

    let mut mismatches = Vec::new();
    if agreement == Agreement::Disagree {
        for r in &reports {
            mismatches.push(format!("{}: {:?}", r.suite.name(), r.verdict));
        }
    }
    let matches_truth = match (truth, agreement) {
        (Some(truth), Agreement::Agree | Agreement::Disagree) => {
            let expected = [truth.kato53, truth.yosida, truth.c1].map(expected_verdict);
            let mut ok = true;
            for (r, e) in reports.iter().zip(expected) {
                if r.verdict != e {
                    ok = false;
                    mismatches.push(format!(
                        "{}: expected {:?}, got {:?}",
                        r.suite.name(),
                        e,
                        r.verdict
                    ));
                }
            }
            Some(ok)
        }
        _ => None,
    };
    Ok(EquivalenceReport {
        schema_version: SCHEMA_VERSION.to_string(),
        family: name.to_string(),
        verdicts,
        agreement,
        matches_truth,
        mismatches,
        reports,
    })
}

pub fn equivalence_matrix(entry: &CatalogEntry, cfg: &CheckConfig) -> Result<EquivalenceReport> {
    equivalence_for(&entry.name, &entry.family, Some(entry.truth), cfg)
}
