//! Group fairness of PAD error rates at a shared decision threshold.
//!
//! Both metrics take the largest pairwise APCER gap `A` and BPCER gap `B`
//! over the groups of a partition and report `1 - (alpha*A + (1-alpha)*B)`.
//! FDR uses the raw gaps. ABF divides each gap by one minus the worst
//! group's rate, so poor absolute performance lowers the score as well;
//! it can go below zero.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::{check_membership, GroupPartition, ScoreSet};
use crate::error::{Error, RateKind, Result};
use crate::rates::{ClassScores, DecisionThreshold, RatePair};

pub const DEFAULT_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Fdr,
    Abf,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Fdr => f.write_str("FDR"),
            Metric::Abf => f.write_str("ABF"),
        }
    }
}

/// Strictly increasing APCER targets in (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SweepGrid {
    targets: Vec<f64>,
}

impl SweepGrid {
    pub fn new(targets: Vec<f64>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidArgument("empty sweep grid".into()));
        }
        if let Some(x) = targets.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::InvalidArgument(format!("sweep target {x} outside (0, 1)")));
        }
        if targets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "sweep targets must be strictly increasing".into(),
            ));
        }
        Ok(SweepGrid { targets })
    }

    /// `start, start+step, ...` up to and including `end`, each point
    /// computed as `start + k*step` to avoid accumulated drift.
    pub fn range(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && end >= start) {
            return Err(Error::InvalidArgument(format!(
                "bad grid range {start}..{end} step {step}"
            )));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        let targets = (0..count)
            .map(|k| {
                let x = start + k as f64 * step;
                // snap to 12 decimals so 0.005*k prints and compares as typed
                (x * 1e12).round() / 1e12
            })
            .collect();
        SweepGrid::new(targets)
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
}

/// 0.005 to 0.2 in steps of 0.005 (40 points).
impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid::range(0.005, 0.2, 0.005).expect("default grid is valid")
    }
}

impl TryFrom<Vec<f64>> for SweepGrid {
    type Error = Error;

    fn try_from(targets: Vec<f64>) -> Result<Self> {
        SweepGrid::new(targets)
    }
}

impl From<SweepGrid> for Vec<f64> {
    fn from(grid: SweepGrid) -> Self {
        grid.targets
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub alpha: f64,
    pub sweep: SweepGrid,
}

impl MetricConfig {
    pub fn new(alpha: f64, sweep: SweepGrid) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(MetricConfig { alpha, sweep })
    }
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            alpha: DEFAULT_ALPHA,
            sweep: SweepGrid::default(),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("alpha {alpha} outside [0, 1]")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessValue {
    pub value: f64,
    pub a_term: f64,
    pub b_term: f64,
    pub tau: DecisionThreshold,
    pub per_group_rates: BTreeMap<String, RatePair>,
}

impl FairnessValue {
    /// Set for ABF values below zero.
    pub fn large_discrepancy(&self) -> bool {
        self.value < 0.0
    }
}

/// Discrepancy terms and value computed from per-group rates alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTerms {
    pub value: f64,
    pub a_term: f64,
    pub b_term: f64,
}

fn spread(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Largest pairwise gap equals max minus min.
fn max_gap_and_worst(rates: &[RatePair], pick: impl Fn(&RatePair) -> f64) -> (f64, f64) {
    let (lo, hi) = spread(rates.iter().map(pick));
    (hi - lo, hi)
}

fn combine(alpha: f64, a_term: f64, b_term: f64) -> MetricTerms {
    MetricTerms {
        value: 1.0 - (alpha * a_term + (1.0 - alpha) * b_term),
        a_term,
        b_term,
    }
}

pub fn fdr_from_rates(rates: &[RatePair], alpha: f64) -> Result<MetricTerms> {
    check_alpha(alpha)?;
    if rates.len() < 2 {
        return Err(Error::InvalidArgument("need rates for at least two groups".into()));
    }
    let (a, _) = max_gap_and_worst(rates, |r| r.apcer);
    let (b, _) = max_gap_and_worst(rates, |r| r.bpcer);
    Ok(combine(alpha, a, b))
}

pub fn abf_from_rates(rates: &[RatePair], alpha: f64) -> Result<MetricTerms> {
    check_alpha(alpha)?;
    if rates.len() < 2 {
        return Err(Error::InvalidArgument("need rates for at least two groups".into()));
    }
    let (a_gap, worst_apcer) = max_gap_and_worst(rates, |r| r.apcer);
    let (b_gap, worst_bpcer) = max_gap_and_worst(rates, |r| r.bpcer);
    if worst_apcer >= 1.0 {
        return Err(Error::SingularDenominator(RateKind::Apcer));
    }
    if worst_bpcer >= 1.0 {
        return Err(Error::SingularDenominator(RateKind::Bpcer));
    }
    Ok(combine(alpha, a_gap / (1.0 - worst_apcer), b_gap / (1.0 - worst_bpcer)))
}

pub fn metric_from_rates(metric: Metric, rates: &[RatePair], alpha: f64) -> Result<MetricTerms> {
    match metric {
        Metric::Fdr => fdr_from_rates(rates, alpha),
        Metric::Abf => abf_from_rates(rates, alpha),
    }
}

/// Per-group sorted scores for one partition, built once and reused across
/// thresholds.
#[derive(Debug, Clone)]
pub struct GroupedScores {
    groups: Vec<ClassScores>,
}

impl GroupedScores {
    pub fn new(scores: &ScoreSet, partition: &GroupPartition) -> Result<Self> {
        check_membership(scores.records(), partition)?;
        let groups = partition
            .groups()
            .iter()
            .map(|g| ClassScores::from_records(g.clone(), scores.group_records(partition, g)))
            .collect();
        Ok(GroupedScores { groups })
    }

    pub fn groups(&self) -> &[ClassScores] {
        &self.groups
    }

    pub fn rates(&self, tau: f64) -> Result<Vec<RatePair>> {
        self.groups.iter().map(|g| g.rates(tau)).collect()
    }

    pub fn evaluate(&self, metric: Metric, tau: &DecisionThreshold, alpha: f64) -> Result<FairnessValue> {
        let rates = self.rates(tau.tau)?;
        let terms = metric_from_rates(metric, &rates, alpha)?;
        Ok(self.value(terms, tau.clone(), &rates))
    }

    fn value(&self, terms: MetricTerms, tau: DecisionThreshold, rates: &[RatePair]) -> FairnessValue {
        FairnessValue {
            value: terms.value,
            a_term: terms.a_term,
            b_term: terms.b_term,
            tau,
            per_group_rates: self
                .groups
                .iter()
                .map(|g| g.name().to_string())
                .zip(rates.iter().copied())
                .collect(),
        }
    }
}

pub fn fdr(
    scores: &ScoreSet,
    partition: &GroupPartition,
    tau: &DecisionThreshold,
    alpha: f64,
) -> Result<FairnessValue> {
    GroupedScores::new(scores, partition)?.evaluate(Metric::Fdr, tau, alpha)
}

pub fn abf(
    scores: &ScoreSet,
    partition: &GroupPartition,
    tau: &DecisionThreshold,
    alpha: f64,
) -> Result<FairnessValue> {
    GroupedScores::new(scores, partition)?.evaluate(Metric::Abf, tau, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    /// `None` when the metric is undefined at this threshold.
    pub value: Option<FairnessValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessCurve {
    pub metric: Metric,
    pub alpha: f64,
    pub points: Vec<CurvePoint>,
    /// Normalised area under the defined points.
    pub auc: f64,
    /// Points left out of the area because the metric was undefined there.
    pub excluded: usize,
}

/// Trapezoidal area over `x` divided by the covered x-range. A single point
/// integrates to its own value.
pub fn normalized_auc(points: &[(f64, f64)]) -> Option<f64> {
    match points {
        [] => None,
        [(_, v)] => Some(*v),
        _ => {
            let area: f64 = points
                .windows(2)
                .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
                .sum();
            let width = points[points.len() - 1].0 - points[0].0;
            Some(area / width)
        }
    }
}

/// Thresholds and per-group rates at every grid target, shared by all
/// curves drawn from one score set.
#[derive(Debug, Clone)]
pub struct RateSweep {
    points: Vec<(f64, DecisionThreshold, Vec<RatePair>)>,
    grouped: GroupedScores,
}

impl RateSweep {
    pub fn new(
        scores: &ScoreSet,
        partition: &GroupPartition,
        grid: &SweepGrid,
        threshold_source: &ScoreSet,
    ) -> Result<Self> {
        let grouped = GroupedScores::new(scores, partition)?;
        let source = ClassScores::from_set(threshold_source);
        let points = grid
            .targets()
            .iter()
            .map(|&x| {
                let tau = source.threshold_at_apcer(x).map_err(|e| e.at_x(x))?;
                let rates = grouped.rates(tau).map_err(|e| e.at_x(x))?;
                let tau = DecisionThreshold {
                    tau,
                    source: crate::rates::ThresholdSource::Fused,
                    target_apcer: Some(x),
                };
                Ok((x, tau, rates))
            })
            .collect::<Result<_>>()?;
        Ok(RateSweep { points, grouped })
    }

    /// Builds the curve. Singular ABF points are excluded from the area and
    /// counted; any other failure aborts.
    pub fn curve(&self, metric: Metric, alpha: f64) -> Result<FairnessCurve> {
        check_alpha(alpha)?;
        let mut points = Vec::with_capacity(self.points.len());
        for (x, tau, rates) in &self.points {
            let value = match metric_from_rates(metric, rates, alpha) {
                Ok(terms) => Some(self.grouped.value(terms, tau.clone(), rates)),
                Err(Error::SingularDenominator(_)) => None,
                Err(e) => return Err(e.at_x(*x)),
            };
            points.push(CurvePoint { x: *x, value });
        }
        let defined: Vec<(f64, f64)> = points
            .iter()
            .filter_map(|p| Some((p.x, p.value.as_ref()?.value)))
            .collect();
        let excluded = points.len() - defined.len();
        let auc = normalized_auc(&defined).ok_or_else(|| {
            let x = points.first().map_or(0.0, |p| p.x);
            Error::SingularDenominator(RateKind::Apcer).at_x(x)
        })?;
        Ok(FairnessCurve {
            metric,
            alpha,
            points,
            auc,
            excluded,
        })
    }
}

/// Metric over the sweep grid with thresholds `tau = APCER_x` taken from
/// `threshold_source` (normally the pooled scores of all groups).
pub fn fairness_curve(
    scores: &ScoreSet,
    partition: &GroupPartition,
    metric: Metric,
    config: &MetricConfig,
    threshold_source: &ScoreSet,
) -> Result<FairnessCurve> {
    RateSweep::new(scores, partition, &config.sweep, threshold_source)?.curve(metric, config.alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaProfile {
    /// `(alpha, ABF-AUC)` in input order.
    pub entries: Vec<(f64, f64)>,
    pub mean: f64,
}

/// 0.0 to 1.0 in steps of 0.1.
pub fn default_alphas() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

/// ABF-AUC for each alpha, thresholds from the pooled scores.
pub fn abf_alpha_profile(
    scores: &ScoreSet,
    partition: &GroupPartition,
    config: &MetricConfig,
    alphas: &[f64],
) -> Result<AlphaProfile> {
    let sweep = RateSweep::new(scores, partition, &config.sweep, scores)?;
    alpha_profile_from_sweep(&sweep, alphas)
}

pub fn alpha_profile_from_sweep(sweep: &RateSweep, alphas: &[f64]) -> Result<AlphaProfile> {
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("empty alpha list".into()));
    }
    let entries = alphas
        .iter()
        .map(|&alpha| Ok((alpha, sweep.curve(Metric::Abf, alpha)?.auc)))
        .collect::<Result<Vec<_>>>()?;
    let mean = entries.iter().map(|e| e.1).sum::<f64>() / entries.len() as f64;
    Ok(AlphaProfile { entries, mean })
}
