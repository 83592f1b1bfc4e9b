//! Command-line front end for `padfair-core`.
//!
//! Every subcommand is a function of its inputs and `--seed`; outputs are
//! written through a temporary file and renamed into place.

pub mod args;
pub mod augment;
pub mod error;
pub mod io;
pub mod report;

use std::path::Path;

use padfair_core::odta::{default_sources, odta_report};
use padfair_core::protocol::{build_protocol, identity_disjoint_split, BalanceConfig, ProtocolSpec, SplitConfig};
use padfair_core::rates::ThresholdSource;
use padfair_core::synth::{synth_scores, GroupScoreSpec};
use padfair_core::{
    serialize_manifest, write_scores, AttributeSet, Gender, PadLabel, RateSweep, SampleManifest, SampleRecord,
    ScoreSet, Split,
};

use crate::args::{Cli, Command, EvaluateArgs, InputArgs, OdtaArgs, SplitArgs, SweepArgs, SynthArgs};
use crate::error::CliError;
use crate::io::{load_manifest, load_scores, to_json, write_atomic, write_bytes, write_output};
use crate::report::{build_report, write_curve_csv, write_odta_csv, ConfigEcho};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Evaluate(a) => evaluate(a, cli.seed),
        Command::Sweep(a) => sweep(a),
        Command::Odta(a) => odta(a),
        Command::Split(a) => split(a, cli.seed),
        Command::Augment(a) => augment::run(a, cli.seed),
        Command::Synth(a) => synth(a, cli.seed),
    }
}

/// Scores joined with the manifest and restricted to the partition.
fn load_partitioned(input: &InputArgs) -> Result<ScoreSet, CliError> {
    let manifest = load_manifest(&input.manifest)?;
    let scores = load_scores(&input.scores, Some(&manifest))?;
    match scores.partitioned(input.partition) {
        Err(padfair_core::Error::EmptyInput) => Err(CliError::Input {
            path: input.manifest.clone(),
            source: padfair_core::Error::InvalidArgument(format!(
                "no scored sample carries the attributes for partition {}",
                input.partition.name()
            )),
        }),
        other => Ok(other?),
    }
}

fn evaluate(args: &EvaluateArgs, seed: u64) -> Result<(), CliError> {
    let config = args.metric.config()?;
    let targets = args.targets.validated()?;
    let scores = load_partitioned(&args.input)?;
    let echo = ConfigEcho {
        manifest: args.input.manifest.clone(),
        scores: args.input.scores.clone(),
        partition: args.input.partition.name().to_string(),
        seed,
        alpha: config.alpha,
        grid: config.sweep.clone(),
        targets: targets.clone(),
    };
    let bundle = build_report(&scores, &config, &targets, echo)?;

    let out = &args.out;
    write_bytes(&out.join("report.json"), &to_json(&bundle))?;
    write_atomic(&out.join("fdr_curve.csv"), |w| write_curve_csv(&bundle.curves.fdr, w))?;
    write_atomic(&out.join("abf_curve.csv"), |w| write_curve_csv(&bundle.curves.abf, w))?;
    let partition = scores.partition().expect("partitioned above");
    for source in default_sources(partition) {
        let rows = bundle.odta.rows.iter().filter(|r| r.threshold_source == source);
        let name = format!(
            "odta_{}.csv",
            source.label().replace(|c: char| !c.is_ascii_alphanumeric(), "_")
        );
        write_atomic(&out.join(name), |w| write_odta_csv(rows, w))?;
    }
    for row in &bundle.eer {
        println!("EER {:<16} {:.6}", row.group, row.eer);
    }
    println!("FDR-AUC {:.6}", bundle.curves.fdr.auc);
    println!("ABF-AUC {:.6}", bundle.curves.abf.auc);
    println!("report written to {}", out.display());
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let config = args.metric.config()?;
    let scores = load_partitioned(&args.input)?;
    let partition = scores.partition().expect("partitioned above");
    let curve = RateSweep::new(&scores, partition, &config.sweep, &scores)?.curve(args.kind.into(), config.alpha)?;
    let mut bytes = Vec::new();
    write_curve_csv(&curve, &mut bytes).map_err(CliError::io(Path::new("<csv>")))?;
    write_output(args.out.as_deref(), &bytes)?;
    eprintln!(
        "{}-AUC {:.6} ({} points excluded)",
        curve.metric, curve.auc, curve.excluded
    );
    Ok(())
}

fn odta(args: &OdtaArgs) -> Result<(), CliError> {
    let targets = args.targets.validated()?;
    let scores = load_partitioned(&args.input)?;
    let partition = scores.partition().expect("partitioned above");
    let sources: Vec<ThresholdSource> = if args.sources.is_empty() {
        default_sources(partition)
    } else {
        args.sources.iter().map(|s| s.parse().expect("infallible")).collect()
    };
    let report = odta_report(&scores, partition, &sources, &targets)?;
    let mut bytes = Vec::new();
    write_odta_csv(&report.rows, &mut bytes).map_err(CliError::io(Path::new("<csv>")))?;
    write_output(args.out.as_deref(), &bytes)
}

fn split(args: &SplitArgs, seed: u64) -> Result<(), CliError> {
    let mut manifest = load_manifest(&args.manifest)?;
    if args.resplit {
        let config = SplitConfig {
            train_fraction: args.train_fraction,
            seed,
        };
        let (train, test) = identity_disjoint_split(manifest.records(), &config)?;
        let mut records: Vec<SampleRecord> = Vec::with_capacity(manifest.len());
        records.extend(train.into_iter().map(|r| SampleRecord {
            split: Split::Train,
            ..r
        }));
        records.extend(test.into_iter().map(|r| SampleRecord {
            split: Split::Test,
            ..r
        }));
        manifest = SampleManifest::new(records)?;
    }
    let balance = BalanceConfig {
        target_ratio: args.target_ratio,
        tolerance: args.tolerance,
        seed,
    };
    let plan = build_protocol(&manifest, &ProtocolSpec::new(args.protocol), &balance)?;
    write_output(args.out.as_deref(), &to_json(&plan))
}

fn synth(args: &SynthArgs, seed: u64) -> Result<(), CliError> {
    let spec = GroupScoreSpec::two_groups("gender", "male", "female", args.n_per_class, args.attack_shift);
    let scores = synth_scores(&spec, seed).map_err(CliError::usage)?;
    write_atomic(&args.out, |w| write_scores(&scores, w).map_err(std::io::Error::other))?;
    if let Some(path) = &args.manifest_out {
        let records = scores
            .records()
            .iter()
            .map(|r| {
                let gender = match r.group("gender") {
                    Some("female") => Gender::Female,
                    _ => Gender::Male,
                };
                SampleRecord {
                    sample_id: r.sample_id.clone(),
                    subject_id: r.sample_id.clone(),
                    media_path: None,
                    pad_label: r.pad_label,
                    attack_type: (r.pad_label == PadLabel::Attack).then(|| "synthetic".to_string()),
                    split: Split::Test,
                    attributes: AttributeSet {
                        gender: Some(gender),
                        ..Default::default()
                    },
                }
            })
            .collect();
        let manifest = SampleManifest::new(records)?;
        write_atomic(path, |w| {
            serialize_manifest(&manifest, w).map_err(std::io::Error::other)
        })?;
    }
    println!("wrote {} scores to {}", scores.len(), args.out.display());
    Ok(())
}
