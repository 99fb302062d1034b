//! Cohort-level aggregation of per-patient concordance metrics.
//!
//! Patients are partitioned by the string value of a clinical feature
//! (`outcome`, `post_op_progress`, `engel_or_ilae`, or any key of
//! `extra_features`); each group reports mean ± sample standard deviation
//! (divide by n−1) of the six precision/recall/F1 metrics. Missing feature
//! values group under the literal string `na`; single-patient groups report
//! the mean only.

use std::collections::{BTreeMap, BTreeSet};

use crate::concordance::ConcordanceReport;
use crate::error::{Error, Result};
use crate::ingest::ClinicalRecord;
use crate::scalar::Scalar;
use crate::table::{fmt_fixed, Table};

/// Mean and optional deviation of one metric within one group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricStats<F> {
    pub mean: F,
    /// Absent when the group has a single patient.
    pub std_dev: Option<F>,
}

/// One row of a grouped cohort summary.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary<F> {
    pub clinical_feature: String,
    pub feature_value: String,
    pub patient_count: usize,
    pub exact_precision: MetricStats<F>,
    pub exact_recall: MetricStats<F>,
    pub exact_f1: MetricStats<F>,
    pub index_precision: MetricStats<F>,
    pub index_recall: MetricStats<F>,
    pub index_f1: MetricStats<F>,
}

const BUILTIN_FEATURES: [&str; 3] = ["outcome", "post_op_progress", "engel_or_ilae"];

/// Feature names usable with [`group_metrics`] for these records.
pub fn available_features(clinical: &[ClinicalRecord]) -> Vec<String> {
    let mut names: BTreeSet<String> = BUILTIN_FEATURES.iter().map(|s| s.to_string()).collect();
    for record in clinical {
        names.extend(record.extra_features.keys().cloned());
    }
    names.into_iter().collect()
}

/// String value of a clinical feature; empty or missing values become `na`.
fn feature_value(record: &ClinicalRecord, feature: &str) -> String {
    let raw = match feature {
        "outcome" => Some(record.outcome.as_str().to_string()),
        "post_op_progress" => Some(record.post_op_progress.clone()),
        "engel_or_ilae" => record.engel_or_ilae.clone(),
        other => record.extra_features.get(other).cloned(),
    };
    match raw {
        Some(v) if !v.trim().is_empty() => v,
        _ => "na".to_string(),
    }
}

fn stats<F: Scalar>(values: &[F]) -> MetricStats<F> {
    let n = values.len();
    debug_assert!(n >= 1);
    let count = F::from_count(n);
    let mut sum = F::zero();
    for &v in values {
        sum = sum + v;
    }
    let mean = sum / count;
    let std_dev = if n == 1 {
        None
    } else {
        let mut sq = F::zero();
        for &v in values {
            let d = v - mean;
            sq = sq + d * d;
        }
        Some((sq / F::from_count(n - 1)).sqrt())
    };
    MetricStats { mean, std_dev }
}

/// Partition reports by a clinical feature and summarize each group.
///
/// Groups are sorted by feature value. Every report's patient must appear in
/// `clinical`; an unknown feature name errors and lists what is available.
pub fn group_metrics<F: Scalar>(
    reports: &[ConcordanceReport<F>],
    clinical: &[ClinicalRecord],
    feature: &str,
) -> Result<Vec<GroupSummary<F>>> {
    let available = available_features(clinical);
    if !available.iter().any(|f| f == feature) {
        return Err(Error::UnknownFeature {
            requested: feature.to_string(),
            available,
        });
    }
    let by_id: BTreeMap<&str, &ClinicalRecord> = clinical
        .iter()
        .map(|c| (c.patient_id.as_str(), c))
        .collect();

    let mut groups: BTreeMap<String, Vec<&ConcordanceReport<F>>> = BTreeMap::new();
    for report in reports {
        let record = by_id
            .get(report.patient_id.as_str())
            .ok_or_else(|| Error::UnknownPatient(report.patient_id.clone()))?;
        groups
            .entry(feature_value(record, feature))
            .or_default()
            .push(report);
    }

    Ok(groups
        .into_iter()
        .map(|(value, members)| {
            let collect = |get: fn(&ConcordanceReport<F>) -> F| -> MetricStats<F> {
                let values: Vec<F> = members.iter().map(|r| get(r)).collect();
                stats(&values)
            };
            GroupSummary {
                clinical_feature: feature.to_string(),
                feature_value: value,
                patient_count: members.len(),
                exact_precision: collect(|r| r.exact_precision),
                exact_recall: collect(|r| r.exact_recall),
                exact_f1: collect(|r| r.exact_f1),
                index_precision: collect(|r| r.index_precision),
                index_recall: collect(|r| r.index_recall),
                index_f1: collect(|r| r.index_f1),
            }
        })
        .collect())
}

/// Build the `cohort_<feature>.csv` table; std cells are empty for n = 1.
pub fn summary_table<F: Scalar>(groups: &[GroupSummary<F>]) -> Table {
    let mut table = Table::new([
        "feature_value",
        "patient_count",
        "exact_precision_mean",
        "exact_precision_std",
        "exact_recall_mean",
        "exact_recall_std",
        "exact_f1_mean",
        "exact_f1_std",
        "index_precision_mean",
        "index_precision_std",
        "index_recall_mean",
        "index_recall_std",
        "index_f1_mean",
        "index_f1_std",
    ]);
    for g in groups {
        let mut row = vec![g.feature_value.clone(), g.patient_count.to_string()];
        for m in [
            &g.exact_precision,
            &g.exact_recall,
            &g.exact_f1,
            &g.index_precision,
            &g.index_recall,
            &g.index_f1,
        ] {
            row.push(fmt_fixed(m.mean));
            row.push(m.std_dev.map(fmt_fixed).unwrap_or_default());
        }
        table.push_row(row);
    }
    table
}
