use std::collections::BTreeMap;
use std::io::{Read, Write};

use super::{PadLabel, PartitionKind, SampleManifest, ScoreRecord, ScoreSet};
use crate::error::{Error, Result};

/// Reads a `sample_id,score[,pad_label]` CSV.
///
/// With a manifest, labels and every derivable partition membership are
/// joined from it and every id must resolve. Without one, the `pad_label`
/// column is required.
pub fn parse_scores<R: Read>(input: R, manifest: Option<&SampleManifest>) -> Result<ScoreSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers().map_err(csv_err)?.clone();
    let has_label = match headers.iter().collect::<Vec<_>>().as_slice() {
        ["sample_id", "score"] => false,
        ["sample_id", "score", "pad_label"] => true,
        [] => return Err(Error::EmptyInput),
        other => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header sample_id,score[,pad_label], found {}", other.join(",")),
            })
        }
    };
    if manifest.is_none() && !has_label {
        return Err(Error::InvalidArgument(
            "scores without a manifest need a pad_label column".into(),
        ));
    }

    let mut records = Vec::new();
    let mut orphans = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let parse_err = |message: String| Error::Parse { line, message };
        let sample_id = row.get(0).unwrap_or_default().to_string();
        if sample_id.is_empty() {
            return Err(parse_err("empty sample_id".into()));
        }
        let raw = row.get(1).unwrap_or_default();
        let score: f64 = raw
            .parse()
            .map_err(|_| parse_err(format!("score {raw:?} is not a number")))?;
        if !score.is_finite() {
            return Err(Error::NonFiniteScore {
                line,
                value: raw.to_string(),
            });
        }
        let column_label = if has_label {
            let raw = row.get(2).unwrap_or_default();
            Some(PadLabel::parse(raw).ok_or_else(|| parse_err(format!("bad pad_label {raw:?}")))?)
        } else {
            None
        };

        let record = match manifest {
            Some(m) => {
                let Some(sample) = m.get(&sample_id) else {
                    orphans.push(sample_id);
                    continue;
                };
                if column_label.is_some_and(|l| l != sample.pad_label) {
                    return Err(Error::LabelMismatch { line, sample_id });
                }
                let groups: BTreeMap<String, String> = PartitionKind::all()
                    .into_iter()
                    .filter_map(|k| Some((k.name().to_string(), k.group_of(&sample.attributes)?)))
                    .collect();
                ScoreRecord {
                    sample_id,
                    score,
                    pad_label: sample.pad_label,
                    groups,
                }
            }
            None => ScoreRecord::new(sample_id, score, column_label.expect("label column present")),
        };
        records.push(record);
    }
    if !orphans.is_empty() {
        return Err(Error::UnresolvedSampleIds(orphans));
    }
    ScoreSet::new(records)
}

/// Writes the score CSV with the `pad_label` column.
pub fn write_scores<W: Write>(scores: &ScoreSet, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record(["sample_id", "score", "pad_label"])
        .map_err(csv_err)?;
    for r in scores.records() {
        writer
            .write_record([r.sample_id.as_str(), &r.score.to_string(), r.pad_label.as_str()])
            .map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            line,
            message: format!("{kind:?}"),
        },
    }
}
