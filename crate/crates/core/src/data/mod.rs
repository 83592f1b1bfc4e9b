//! Domain types for annotated samples and scores, and their text formats.
//!
//! Manifests are JSON Lines, one [`SampleRecord`] per line. Score files are
//! CSV with a `sample_id,score` header and an optional `pad_label` column.
//! Scores are attack-likelihoods: a sample is classified as an attack iff
//! its score is at least the decision threshold.

mod frames;
mod manifest;
mod scores;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use frames::frame_indices;
pub use manifest::{parse_manifest, serialize_manifest, SampleManifest};
pub use scores::{parse_scores, write_scores};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PadLabel {
    #[serde(rename = "bonafide")]
    BonaFide,
    #[serde(rename = "attack")]
    Attack,
}

impl PadLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PadLabel::BonaFide => "bonafide",
            PadLabel::Attack => "attack",
        }
    }

    pub fn parse(s: &str) -> Option<PadLabel> {
        match s.trim() {
            "bonafide" => Some(PadLabel::BonaFide),
            "attack" => Some(PadLabel::Attack),
            _ => None,
        }
    }
}

impl fmt::Display for PadLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PadLabel::BonaFide => f.write_str("bona fide"),
            PadLabel::Attack => f.write_str("attack"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// The seven annotated attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Attribute {
    Gender,
    Bangs,
    Beard,
    Eyeglasses,
    Makeup,
    LongHair,
    StraightHair,
}

impl Attribute {
    pub const ALL: [Attribute; 7] = [
        Attribute::Gender,
        Attribute::Bangs,
        Attribute::Beard,
        Attribute::Eyeglasses,
        Attribute::Makeup,
        Attribute::LongHair,
        Attribute::StraightHair,
    ];

    /// The six boolean attributes.
    pub const BINARY: [Attribute; 6] = [
        Attribute::Bangs,
        Attribute::Beard,
        Attribute::Eyeglasses,
        Attribute::Makeup,
        Attribute::LongHair,
        Attribute::StraightHair,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Gender => "gender",
            Attribute::Bangs => "bangs",
            Attribute::Beard => "beard",
            Attribute::Eyeglasses => "eyeglasses",
            Attribute::Makeup => "makeup",
            Attribute::LongHair => "long_hair",
            Attribute::StraightHair => "straight_hair",
        }
    }

    pub fn from_name(name: &str) -> Option<Attribute> {
        Attribute::ALL.into_iter().find(|a| a.name() == name)
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Annotated attributes of one sample. Unannotated attributes stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeSet {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<Gender>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bangs: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beard: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eyeglasses: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub makeup: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub long_hair: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub straight_hair: Option<bool>,
}

impl AttributeSet {
    /// Value of a boolean attribute; `None` for gender or when unannotated.
    pub fn flag(&self, attribute: Attribute) -> Option<bool> {
        match attribute {
            Attribute::Gender => None,
            Attribute::Bangs => self.bangs,
            Attribute::Beard => self.beard,
            Attribute::Eyeglasses => self.eyeglasses,
            Attribute::Makeup => self.makeup,
            Attribute::LongHair => self.long_hair,
            Attribute::StraightHair => self.straight_hair,
        }
    }
}

/// A sample counts as occluded when it has a beard, eyeglasses or bangs.
///
/// All three attributes must be annotated.
pub fn derive_occlusion(attrs: &AttributeSet) -> Result<bool> {
    occlusion_of("", attrs)
}

pub(crate) fn occlusion_of(sample_id: &str, attrs: &AttributeSet) -> Result<bool> {
    let get = |value: Option<bool>, attribute: &'static str| {
        value.ok_or_else(|| Error::MissingAttribute {
            sample_id: sample_id.to_string(),
            attribute,
        })
    };
    let beard = get(attrs.beard, "beard")?;
    let eyeglasses = get(attrs.eyeglasses, "eyeglasses")?;
    let bangs = get(attrs.bangs, "bangs")?;
    Ok(beard || eyeglasses || bangs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: String,
    pub subject_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media_path: Option<String>,
    pub pad_label: PadLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack_type: Option<String>,
    pub split: Split,
    #[serde(default)]
    pub attributes: AttributeSet,
}

/// How samples are grouped for a fairness analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PartitionKind {
    Gender,
    Occlusion,
    Attribute(Attribute),
}

impl PartitionKind {
    pub fn all() -> Vec<PartitionKind> {
        let mut kinds = vec![PartitionKind::Gender, PartitionKind::Occlusion];
        kinds.extend(Attribute::BINARY.into_iter().map(PartitionKind::Attribute));
        kinds
    }

    pub fn name(self) -> &'static str {
        match self {
            PartitionKind::Gender => "gender",
            PartitionKind::Occlusion => "occlusion",
            PartitionKind::Attribute(a) => a.name(),
        }
    }

    pub fn from_name(name: &str) -> Option<PartitionKind> {
        match name {
            "gender" => Some(PartitionKind::Gender),
            "occlusion" => Some(PartitionKind::Occlusion),
            other => match Attribute::from_name(other)? {
                Attribute::Gender => Some(PartitionKind::Gender),
                a => Some(PartitionKind::Attribute(a)),
            },
        }
    }

    /// Group ids in canonical order.
    pub fn group_ids(self) -> [String; 2] {
        match self {
            PartitionKind::Gender => ["male".into(), "female".into()],
            PartitionKind::Occlusion => ["occlusion".into(), "non-occlusion".into()],
            PartitionKind::Attribute(a) => [format!("with-{a}"), format!("without-{a}")],
        }
    }

    /// Group of a sample, or `None` when the deciding attributes are unannotated.
    pub fn group_of(self, attrs: &AttributeSet) -> Option<String> {
        let [first, second] = self.group_ids();
        let first_side = match self {
            PartitionKind::Gender => attrs.gender? == Gender::Male,
            PartitionKind::Occlusion => derive_occlusion(attrs).ok()?,
            PartitionKind::Attribute(a) => attrs.flag(a)?,
        };
        Some(if first_side { first } else { second })
    }

    pub fn partition(self) -> GroupPartition {
        GroupPartition {
            name: self.name().to_string(),
            groups: self.group_ids().to_vec(),
        }
    }
}

impl fmt::Display for PartitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A named set of disjoint groups, at least two.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPartition {
    name: String,
    groups: Vec<String>,
}

impl GroupPartition {
    pub fn new(name: impl Into<String>, groups: Vec<String>) -> Result<Self> {
        if groups.len() < 2 {
            return Err(Error::InvalidArgument("a partition needs at least two groups".into()));
        }
        for (i, g) in groups.iter().enumerate() {
            if groups[..i].contains(g) {
                return Err(Error::InvalidArgument(format!("duplicate group id {g:?}")));
            }
        }
        Ok(GroupPartition {
            name: name.into(),
            groups,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn contains(&self, group: &str) -> bool {
        self.groups.iter().any(|g| g == group)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub sample_id: String,
    pub score: f64,
    pub pad_label: PadLabel,
    /// Partition name to group id.
    pub groups: BTreeMap<String, String>,
}

impl ScoreRecord {
    pub fn new(sample_id: impl Into<String>, score: f64, pad_label: PadLabel) -> Self {
        ScoreRecord {
            sample_id: sample_id.into(),
            score,
            pad_label,
            groups: BTreeMap::new(),
        }
    }

    pub fn with_group(mut self, partition: impl Into<String>, group: impl Into<String>) -> Self {
        self.groups.insert(partition.into(), group.into());
        self
    }

    pub fn group(&self, partition: &str) -> Option<&str> {
        self.groups.get(partition).map(String::as_str)
    }
}

/// Scored samples, optionally with an attached partition.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    records: Vec<ScoreRecord>,
    partition: Option<GroupPartition>,
}

impl ScoreSet {
    pub fn new(records: Vec<ScoreRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some((i, r)) = records.iter().enumerate().find(|(_, r)| !r.score.is_finite()) {
            return Err(Error::NonFiniteScore {
                line: i + 1,
                value: r.score.to_string(),
            });
        }
        Ok(ScoreSet {
            records,
            partition: None,
        })
    }

    /// Attaches a partition; every record must belong to one of its groups.
    pub fn with_partition(mut self, partition: GroupPartition) -> Result<Self> {
        check_membership(&self.records, &partition)?;
        self.partition = Some(partition);
        Ok(self)
    }

    /// Keeps the records that have a group under `kind` and attaches that
    /// partition. Records without one are dropped.
    pub fn partitioned(&self, kind: PartitionKind) -> Result<ScoreSet> {
        let partition = kind.partition();
        let records: Vec<ScoreRecord> = self
            .records
            .iter()
            .filter(|r| r.group(partition.name()).is_some())
            .cloned()
            .collect();
        ScoreSet::new(records)?.with_partition(partition)
    }

    pub fn records(&self) -> &[ScoreRecord] {
        &self.records
    }

    pub fn partition(&self) -> Option<&GroupPartition> {
        self.partition.as_ref()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn scores_of(&self, label: PadLabel) -> impl Iterator<Item = f64> + '_ {
        self.records
            .iter()
            .filter(move |r| r.pad_label == label)
            .map(|r| r.score)
    }

    pub fn count_of(&self, label: PadLabel) -> usize {
        self.scores_of(label).count()
    }

    /// Records of one group. May be empty.
    pub fn group_records<'a>(
        &'a self,
        partition: &'a GroupPartition,
        group: &'a str,
    ) -> impl Iterator<Item = &'a ScoreRecord> + 'a {
        self.records
            .iter()
            .filter(move |r| r.group(partition.name()) == Some(group))
    }

    /// Applies `f` to every score. `f` should be strictly increasing for
    /// rates to be preserved.
    pub fn map_scores(&self, f: impl Fn(f64) -> f64) -> Result<ScoreSet> {
        let records = self
            .records
            .iter()
            .map(|r| ScoreRecord {
                score: f(r.score),
                ..r.clone()
            })
            .collect();
        let set = ScoreSet::new(records)?;
        match &self.partition {
            Some(p) => set.with_partition(p.clone()),
            None => Ok(set),
        }
    }
}

pub(crate) fn check_membership(records: &[ScoreRecord], partition: &GroupPartition) -> Result<()> {
    for r in records {
        match r.group(partition.name()) {
            Some(g) if partition.contains(g) => {}
            _ => {
                return Err(Error::UngroupedRecord {
                    sample_id: r.sample_id.clone(),
                    partition: partition.name().to_string(),
                })
            }
        }
    }
    Ok(())
}
