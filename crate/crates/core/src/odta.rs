//! Operational decision threshold assignment: thresholds fixed on one
//! group's scores and applied to every group.

use serde::{Deserialize, Serialize};

use crate::data::{check_membership, GroupPartition, ScoreSet};
use crate::error::{Error, Result};
use crate::rates::{ClassScores, RatePair, ThresholdSource};

/// APCER operating points used for BPCER-at-APCER plots.
pub const DEFAULT_TARGETS: [f64; 6] = [0.005, 0.01, 0.05, 0.10, 0.15, 0.20];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdtaRow {
    pub threshold_source: ThresholdSource,
    pub eval_group: String,
    pub target_apcer: f64,
    pub tau: f64,
    pub rates: RatePair,
    pub one_minus_bpcer: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OdtaReport {
    pub rows: Vec<OdtaRow>,
}

/// Rows in `sources x targets x partition groups` order.
pub fn odta_report(
    scores: &ScoreSet,
    partition: &GroupPartition,
    sources: &[ThresholdSource],
    targets: &[f64],
) -> Result<OdtaReport> {
    check_membership(scores.records(), partition)?;
    let groups: Vec<ClassScores> = partition
        .groups()
        .iter()
        .map(|g| ClassScores::from_records(g.clone(), scores.group_records(partition, g)))
        .collect();
    // Every evaluated group needs both classes, whatever the source.
    for g in &groups {
        g.rates(0.0)?;
    }
    let mut rows = Vec::with_capacity(sources.len() * targets.len() * groups.len());
    for source in sources {
        let source_scores = match source {
            ThresholdSource::Fused => ClassScores::from_records("fused", scores.records()),
            ThresholdSource::Group(g) => groups
                .iter()
                .find(|c| c.name() == g)
                .cloned()
                .ok_or_else(|| Error::InvalidArgument(format!("unknown threshold source group {g:?}")))?,
        };
        for &x in targets {
            let tau = source_scores.threshold_at_apcer(x)?;
            for g in &groups {
                let rates = g.rates(tau)?;
                rows.push(OdtaRow {
                    threshold_source: source.clone(),
                    eval_group: g.name().to_string(),
                    target_apcer: x,
                    tau,
                    rates,
                    one_minus_bpcer: 1.0 - rates.bpcer,
                });
            }
        }
    }
    Ok(OdtaReport { rows })
}

/// `fused` followed by each group of the partition.
pub fn default_sources(partition: &GroupPartition) -> Vec<ThresholdSource> {
    std::iter::once(ThresholdSource::Fused)
        .chain(partition.groups().iter().cloned().map(ThresholdSource::Group))
        .collect()
}
