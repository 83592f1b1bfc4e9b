use std::io::{self, Write};
use std::path::PathBuf;

use padfair_core::fairness::{alpha_profile_from_sweep, default_alphas, MetricConfig, SweepGrid};
use padfair_core::odta::{default_sources, odta_report};
use padfair_core::rates::ClassScores;
use padfair_core::{AlphaProfile, FairnessCurve, Metric, OdtaReport, OdtaRow, RateSweep, Result, ScoreSet};
use serde::{Deserialize, Serialize};

/// Bumped whenever a field of [`ReportBundle`] changes meaning or shape.
pub const SCHEMA_VERSION: u32 = 1;

/// Everything needed to rerun the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub manifest: PathBuf,
    pub scores: PathBuf,
    pub partition: String,
    pub seed: u64,
    pub alpha: f64,
    pub grid: SweepGrid,
    pub targets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EerRow {
    /// `fused` or a group name.
    pub group: String,
    pub eer: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curves {
    pub fdr: FairnessCurve,
    pub abf: FairnessCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: u32,
    pub config: ConfigEcho,
    pub eer: Vec<EerRow>,
    pub odta: OdtaReport,
    pub curves: Curves,
    pub alpha_profile: AlphaProfile,
}

/// `scores` must carry the partition to report on.
pub fn build_report(
    scores: &ScoreSet,
    config: &MetricConfig,
    targets: &[f64],
    echo: ConfigEcho,
) -> Result<ReportBundle> {
    let partition = scores
        .partition()
        .ok_or_else(|| padfair_core::Error::InvalidArgument("score set has no partition".into()))?;
    let mut eer = Vec::with_capacity(partition.groups().len() + 1);
    let fused = ClassScores::from_set(scores);
    let groups = partition
        .groups()
        .iter()
        .map(|g| ClassScores::from_records(g.clone(), scores.group_records(partition, g)));
    for class_scores in std::iter::once(fused).chain(groups) {
        let (value, tau) = class_scores.eer()?;
        eer.push(EerRow {
            group: class_scores.name().to_string(),
            eer: value,
            tau,
        });
    }
    let odta = odta_report(scores, partition, &default_sources(partition), targets)?;
    let sweep = RateSweep::new(scores, partition, &config.sweep, scores)?;
    let curves = Curves {
        fdr: sweep.curve(Metric::Fdr, config.alpha)?,
        abf: sweep.curve(Metric::Abf, config.alpha)?,
    };
    let alpha_profile = alpha_profile_from_sweep(&sweep, &default_alphas())?;
    Ok(ReportBundle {
        schema_version: SCHEMA_VERSION,
        config: echo,
        eer,
        odta,
        curves,
        alpha_profile,
    })
}

/// Columns `x,value,a_term,b_term`; undefined points leave the last three empty.
pub fn write_curve_csv(curve: &FairnessCurve, out: &mut dyn Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "value", "a_term", "b_term"])?;
    for p in &curve.points {
        let x = p.x.to_string();
        match &p.value {
            Some(v) => w.write_record([x, v.value.to_string(), v.a_term.to_string(), v.b_term.to_string()])?,
            None => w.write_record([x.as_str(), "", "", ""])?,
        }
    }
    w.flush()
}

/// Columns `x,source,group,one_minus_bpcer`.
pub fn write_odta_csv<'a>(rows: impl IntoIterator<Item = &'a OdtaRow>, out: &mut dyn Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "source", "group", "one_minus_bpcer"])?;
    for r in rows {
        w.write_record([
            r.target_apcer.to_string(),
            r.threshold_source.to_string(),
            r.eval_group.clone(),
            r.one_minus_bpcer.to_string(),
        ])?;
    }
    w.flush()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CurveCsvRow {
    pub x: f64,
    pub value: Option<f64>,
    pub a_term: Option<f64>,
    pub b_term: Option<f64>,
}

pub fn read_curve_csv(input: impl io::Read) -> csv::Result<Vec<CurveCsvRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct OdtaCsvRow {
    pub x: f64,
    pub source: String,
    pub group: String,
    pub one_minus_bpcer: f64,
}

pub fn read_odta_csv(input: impl io::Read) -> csv::Result<Vec<OdtaCsvRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
