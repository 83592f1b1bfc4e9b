//! Train/test plans for the gender, occlusion and attribute protocols.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Attribute, PadLabel, PartitionKind, SampleManifest, SampleRecord, Split};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolId {
    /// Gender, trained on everyone.
    P1_1,
    /// Gender, trained on female samples only.
    P1_2,
    /// Gender, trained on male samples only.
    P1_3,
    /// Occlusion, trained on everyone.
    P2_1,
    /// Occlusion, trained on occluded samples only.
    P2_2,
    /// Occlusion, trained on non-occluded samples only.
    P2_3,
    /// One of the six remaining attributes, trained on everyone.
    P3(Attribute),
}

impl ProtocolId {
    /// All twelve protocols: P1.x, P2.x, then P3 per attribute.
    pub fn all() -> Vec<ProtocolId> {
        let mut ids = vec![
            ProtocolId::P1_1,
            ProtocolId::P1_2,
            ProtocolId::P1_3,
            ProtocolId::P2_1,
            ProtocolId::P2_2,
            ProtocolId::P2_3,
        ];
        ids.extend(Attribute::BINARY.into_iter().map(ProtocolId::P3));
        ids
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolId::P1_1 => f.write_str("P1.1"),
            ProtocolId::P1_2 => f.write_str("P1.2"),
            ProtocolId::P1_3 => f.write_str("P1.3"),
            ProtocolId::P2_1 => f.write_str("P2.1"),
            ProtocolId::P2_2 => f.write_str("P2.2"),
            ProtocolId::P2_3 => f.write_str("P2.3"),
            ProtocolId::P3(a) => write!(f, "P3:{a}"),
        }
    }
}

impl FromStr for ProtocolId {
    type Err = Error;

    /// Accepts `P1.2`, `p1_2`, `P3:makeup`.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', ".");
        let id = match norm.as_str() {
            "p1.1" => ProtocolId::P1_1,
            "p1.2" => ProtocolId::P1_2,
            "p1.3" => ProtocolId::P1_3,
            "p2.1" => ProtocolId::P2_1,
            "p2.2" => ProtocolId::P2_2,
            "p2.3" => ProtocolId::P2_3,
            other => {
                let attr = other
                    .strip_prefix("p3:")
                    .map(|a| a.replace('.', "_"))
                    .and_then(|a| Attribute::from_name(&a))
                    .filter(|a| *a != Attribute::Gender);
                match attr {
                    Some(a) => ProtocolId::P3(a),
                    None => return Err(Error::InvalidArgument(format!("unknown protocol {s:?}"))),
                }
            }
        };
        Ok(id)
    }
}

impl Serialize for ProtocolId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ProtocolId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Which samples a protocol selects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupPredicate {
    All,
    /// Samples whose group under `kind` is `group`. Samples lacking the
    /// deciding attributes never match.
    InGroup {
        kind: PartitionKind,
        group: String,
    },
}

impl GroupPredicate {
    pub fn matches(&self, record: &SampleRecord) -> bool {
        match self {
            GroupPredicate::All => true,
            GroupPredicate::InGroup { kind, group } => {
                kind.group_of(&record.attributes).as_deref() == Some(group.as_str())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolSpec {
    pub id: ProtocolId,
    pub train_filter: GroupPredicate,
    /// Test set label and selector, in report order.
    pub test_partitions: Vec<(String, GroupPredicate)>,
}

impl ProtocolSpec {
    pub fn new(id: ProtocolId) -> Self {
        let kind = match id {
            ProtocolId::P1_1 | ProtocolId::P1_2 | ProtocolId::P1_3 => PartitionKind::Gender,
            ProtocolId::P2_1 | ProtocolId::P2_2 | ProtocolId::P2_3 => PartitionKind::Occlusion,
            ProtocolId::P3(a) => PartitionKind::Attribute(a),
        };
        let [first, second] = kind.group_ids();
        let in_group = |group: &str| GroupPredicate::InGroup {
            kind,
            group: group.to_string(),
        };
        let train_filter = match id {
            ProtocolId::P1_2 => in_group("female"),
            ProtocolId::P1_3 => in_group("male"),
            ProtocolId::P2_2 => in_group("occlusion"),
            ProtocolId::P2_3 => in_group("non-occlusion"),
            _ => GroupPredicate::All,
        };
        let test_partitions = vec![(first.clone(), in_group(&first)), (second.clone(), in_group(&second))];
        ProtocolSpec {
            id,
            train_filter,
            test_partitions,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceConfig {
    /// Desired bona fide : attack ratio.
    pub target_ratio: f64,
    /// Accepted relative deviation from `target_ratio`.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        BalanceConfig {
            target_ratio: 1.0,
            tolerance: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTestPlan {
    pub protocol: ProtocolId,
    pub seed: u64,
    pub train_ids: Vec<String>,
    pub test_sets: BTreeMap<String, Vec<String>>,
}

/// Assigns whole subjects to train or test.
///
/// Sorted unique subject ids are shuffled with a seeded generator and the
/// first `round(train_fraction * n)` go to train, clamped so both sides keep
/// at least one subject.
pub fn identity_disjoint_split(
    records: &[SampleRecord],
    config: &SplitConfig,
) -> Result<(Vec<SampleRecord>, Vec<SampleRecord>)> {
    if !(config.train_fraction > 0.0 && config.train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train_fraction {} outside (0, 1)",
            config.train_fraction
        )));
    }
    let subjects: BTreeSet<&str> = records.iter().map(|r| r.subject_id.as_str()).collect();
    if subjects.len() < 2 {
        return Err(Error::InvalidArgument("need at least two subjects to split".into()));
    }
    let mut subjects: Vec<&str> = subjects.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    subjects.shuffle(&mut rng);
    let n_train = ((config.train_fraction * subjects.len() as f64).round() as usize).clamp(1, subjects.len() - 1);
    let train_subjects: BTreeSet<&str> = subjects[..n_train].iter().copied().collect();
    let (train, test) = records
        .iter()
        .cloned()
        .partition(|r| train_subjects.contains(r.subject_id.as_str()));
    Ok((train, test))
}

/// Oversamples the minority class until bona fide : attack is within
/// `tolerance * target_ratio` of `target_ratio`.
///
/// Returns every input id once, in input order, followed by minority ids
/// drawn uniformly with replacement. When the ratio is already within
/// tolerance the ids are returned unchanged.
pub fn oversample_balance(records: &[SampleRecord], config: &BalanceConfig) -> Result<Vec<String>> {
    if !(config.target_ratio > 0.0 && config.tolerance >= 0.0) {
        return Err(Error::InvalidArgument(
            "target_ratio must be > 0 and tolerance >= 0".into(),
        ));
    }
    let ids_of = |label| -> Vec<&str> {
        records
            .iter()
            .filter(|r| r.pad_label == label)
            .map(|r| r.sample_id.as_str())
            .collect()
    };
    let bonafide = ids_of(PadLabel::BonaFide);
    let attack = ids_of(PadLabel::Attack);
    if bonafide.is_empty() {
        return Err(Error::MissingClass(PadLabel::BonaFide));
    }
    if attack.is_empty() {
        return Err(Error::MissingClass(PadLabel::Attack));
    }

    let mut out: Vec<String> = records.iter().map(|r| r.sample_id.clone()).collect();
    let target = config.target_ratio;
    let ratio = bonafide.len() as f64 / attack.len() as f64;
    if (ratio - target).abs() <= config.tolerance * target {
        return Ok(out);
    }
    let (minority, wanted) = if ratio < target {
        (&bonafide, (target * attack.len() as f64).round() as usize)
    } else {
        (&attack, (bonafide.len() as f64 / target).round() as usize)
    };
    let extra = wanted.saturating_sub(minority.len());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    out.extend((0..extra).map(|_| minority[rng.random_range(0..minority.len())].to_string()));
    Ok(out)
}

/// Materialises a protocol from a manifest's existing train/test splits.
pub fn build_protocol(
    manifest: &SampleManifest,
    spec: &ProtocolSpec,
    balance: &BalanceConfig,
) -> Result<TrainTestPlan> {
    if !manifest.is_identity_disjoint() {
        return Err(Error::SubjectOverlap(manifest.subject_overlap().to_vec()));
    }
    let train: Vec<SampleRecord> = manifest
        .split(Split::Train)
        .filter(|r| spec.train_filter.matches(r))
        .cloned()
        .collect();
    if train.is_empty() {
        return Err(Error::EmptyTrainSelection);
    }
    let train_ids = oversample_balance(&train, balance)?;
    let mut test_sets = BTreeMap::new();
    for (label, predicate) in &spec.test_partitions {
        let ids: Vec<String> = manifest
            .split(Split::Test)
            .filter(|r| predicate.matches(r))
            .map(|r| r.sample_id.clone())
            .collect();
        if ids.is_empty() {
            return Err(Error::EmptyTestPartition(label.clone()));
        }
        test_sets.insert(label.clone(), ids);
    }
    Ok(TrainTestPlan {
        protocol: spec.id,
        seed: balance.seed,
        train_ids,
        test_sets,
    })
}
