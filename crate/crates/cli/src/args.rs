use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use padfair_core::fairness::{MetricConfig, SweepGrid};
use padfair_core::odta::DEFAULT_TARGETS;
use padfair_core::{FairSwapParams, Metric, PartitionKind, ProtocolId};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "padfair",
    version,
    about = "Fairness evaluation and patch-swap augmentation for face PAD"
)]
pub struct Cli {
    /// Print failures as a JSON object on stderr.
    #[arg(long, global = true)]
    pub error_json: bool,

    /// Seed for every random choice.
    #[arg(long, global = true, env = "PADFAIR_SEED", default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full report: EER per group, ODTA rows, FDR and ABF curves, alpha profile.
    #[command(visible_alias = "report")]
    Evaluate(EvaluateArgs),
    /// One fairness curve as CSV.
    Sweep(SweepArgs),
    /// 1-BPCER at fixed APCER targets, thresholds from each source.
    Odta(OdtaArgs),
    /// Train/test plan for one protocol.
    Split(SplitArgs),
    /// Patch-swap augmentation of a manifest's training images.
    Augment(AugmentArgs),
    /// Synthetic two-group score file.
    Synth(SynthArgs),
}

fn parse_partition(s: &str) -> Result<PartitionKind, String> {
    PartitionKind::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = PartitionKind::all().into_iter().map(PartitionKind::name).collect();
        format!("unknown partition {s:?}, expected one of {}", names.join(", "))
    })
}

fn parse_protocol(s: &str) -> Result<ProtocolId, String> {
    s.parse().map_err(|e: padfair_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Manifest in JSON Lines.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Score CSV with a `sample_id,score[,pad_label]` header.
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long, value_parser = parse_partition, default_value = "gender")]
    pub partition: PartitionKind,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    /// Weight of the APCER term.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.005)]
    pub grid_start: f64,
    #[arg(long, default_value_t = 0.2)]
    pub grid_end: f64,
    #[arg(long, default_value_t = 0.005)]
    pub grid_step: f64,
}

impl MetricArgs {
    pub fn config(&self) -> Result<MetricConfig, CliError> {
        let grid = SweepGrid::range(self.grid_start, self.grid_end, self.grid_step).map_err(CliError::usage)?;
        MetricConfig::new(self.alpha, grid).map_err(CliError::usage)
    }
}

#[derive(Debug, Args)]
pub struct TargetArgs {
    /// Comma-separated APCER targets.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_TARGETS)]
    pub targets: Vec<f64>,
}

impl TargetArgs {
    pub fn validated(&self) -> Result<Vec<f64>, CliError> {
        match self.targets.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            Some(x) => Err(CliError::Usage(format!("target {x} outside (0, 1)"))),
            None => Ok(self.targets.clone()),
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub metric: MetricArgs,
    #[command(flatten)]
    pub targets: TargetArgs,
    /// Output directory for report.json and the plot CSVs.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Fdr,
    Abf,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::Fdr => Metric::Fdr,
            MetricArg::Abf => Metric::Abf,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long = "metric", value_enum, default_value_t = MetricArg::Fdr)]
    pub kind: MetricArg,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OdtaArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub targets: TargetArgs,
    /// Threshold sources (`fused` or a group name); all by default.
    #[arg(long, value_delimiter = ',')]
    pub sources: Vec<String>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// P1.1 to P2.3, or P3:<attribute>.
    #[arg(long, value_parser = parse_protocol)]
    pub protocol: ProtocolId,
    /// Desired bona fide : attack ratio after oversampling.
    #[arg(long, default_value_t = 1.0)]
    pub target_ratio: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tolerance: f64,
    /// Reassign train/test by subject before building the plan.
    #[arg(long)]
    pub resplit: bool,
    #[arg(long, default_value_t = 0.8, requires = "resplit")]
    pub train_fraction: f64,
    /// Plan JSON destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapFormat {
    Csv,
    Png,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory that `media_path` entries are relative to; defaults to the
    /// manifest's directory.
    #[arg(long)]
    pub image_root: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Partition whose groups donors should cross.
    #[arg(long, value_parser = parse_partition, default_value = "gender")]
    pub partition: PartitionKind,
    #[arg(long, default_value_t = 0.3)]
    pub p1: f64,
    #[arg(long, default_value_t = 0.3)]
    pub p2: f64,
    #[arg(long, default_value_t = 0.5)]
    pub p3: f64,
    #[arg(long, default_value_t = 0.5)]
    pub p4: f64,
    #[arg(long, default_value_t = 64)]
    pub patch_size: usize,
    #[arg(long, default_value_t = 112)]
    pub alt_patch_size: usize,
    #[arg(long, default_value_t = 14)]
    pub map_resolution: usize,
    /// Draw donors from any group.
    #[arg(long)]
    pub no_cross_group: bool,
    #[arg(long, value_enum, default_value_t = MapFormat::Csv)]
    pub map_format: MapFormat,
}

impl AugmentArgs {
    pub fn params(&self, seed: u64) -> FairSwapParams {
        FairSwapParams {
            p1: self.p1,
            p2: self.p2,
            p3: self.p3,
            p4: self.p4,
            patch_size: self.patch_size,
            alt_patch_size: self.alt_patch_size,
            map_resolution: self.map_resolution,
            cross_group: !self.no_cross_group,
            seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Samples per class per group.
    #[arg(long, default_value_t = 10_000)]
    pub n_per_class: usize,
    /// Shift of the female group's attack mean, in standard deviations.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub attack_shift: f64,
    /// Score CSV destination.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a manifest giving each sample its gender.
    #[arg(long)]
    pub manifest_out: Option<PathBuf>,
}
