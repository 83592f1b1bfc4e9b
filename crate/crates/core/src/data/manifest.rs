use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde_json::Value;

use super::{Attribute, PadLabel, SampleRecord, Split};
use crate::error::{Error, Result};

/// Ordered, id-unique sample records.
///
/// Train/test subject overlap is not fatal; it is recorded and exposed
/// through [`SampleManifest::subject_overlap`] so callers can repair it.
#[derive(Debug, Clone)]
pub struct SampleManifest {
    records: Vec<SampleRecord>,
    index: HashMap<String, usize>,
    overlap: Vec<String>,
}

impl PartialEq for SampleManifest {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
    }
}

impl SampleManifest {
    pub fn new(records: Vec<SampleRecord>) -> Result<Self> {
        let mut index = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            check_record(r).map_err(|message| Error::Parse { line: i + 1, message })?;
            if index.insert(r.sample_id.clone(), i).is_some() {
                return Err(Error::DuplicateSampleId(r.sample_id.clone()));
            }
        }
        let overlap = subject_overlap(&records);
        Ok(SampleManifest {
            records,
            index,
            overlap,
        })
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, sample_id: &str) -> Option<&SampleRecord> {
        self.index.get(sample_id).map(|&i| &self.records[i])
    }

    /// Subject ids present in both splits, sorted.
    pub fn subject_overlap(&self) -> &[String] {
        &self.overlap
    }

    pub fn is_identity_disjoint(&self) -> bool {
        self.overlap.is_empty()
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &SampleRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }
}

fn check_record(r: &SampleRecord) -> Result<(), String> {
    if r.sample_id.is_empty() {
        return Err("empty sample_id".into());
    }
    if r.pad_label == PadLabel::BonaFide && r.attack_type.is_some() {
        return Err(format!("bona fide sample {:?} carries an attack_type", r.sample_id));
    }
    Ok(())
}

fn subject_overlap(records: &[SampleRecord]) -> Vec<String> {
    let subjects = |split| -> BTreeSet<&str> {
        records
            .iter()
            .filter(|r| r.split == split)
            .map(|r| r.subject_id.as_str())
            .collect()
    };
    let train = subjects(Split::Train);
    subjects(Split::Test)
        .intersection(&train)
        .map(|s| s.to_string())
        .collect()
}

/// Reads a JSON Lines manifest. Blank lines are skipped.
pub fn parse_manifest<R: BufRead>(input: R) -> Result<SampleManifest> {
    let mut records = Vec::new();
    let mut seen = HashMap::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: line_no, message };
        let value: Value = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if let Some(attrs) = value.get("attributes").and_then(Value::as_object) {
            if let Some(key) = attrs.keys().find(|k| Attribute::from_name(k).is_none()) {
                return Err(Error::UnknownAttribute {
                    line: line_no,
                    key: key.clone(),
                });
            }
        }
        let record: SampleRecord = serde_json::from_value(value).map_err(|e| parse_err(e.to_string()))?;
        check_record(&record).map_err(parse_err)?;
        if seen.insert(record.sample_id.clone(), line_no).is_some() {
            return Err(Error::DuplicateSampleId(record.sample_id));
        }
        records.push(record);
    }
    SampleManifest::new(records)
}

pub fn serialize_manifest<W: Write>(manifest: &SampleManifest, mut out: W) -> Result<()> {
    for r in manifest.records() {
        let line = serde_json::to_string(r).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}
