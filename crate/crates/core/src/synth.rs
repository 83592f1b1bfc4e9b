//! Synthetic score sets and manifests with known fairness properties, and
//! brute-force counting oracles for the rate functions.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{
    AttributeSet, Gender, GroupPartition, PadLabel, SampleManifest, SampleRecord, ScoreRecord, ScoreSet, Split,
};
use crate::error::{Error, Result};
use crate::protocol::{identity_disjoint_split, SplitConfig};
use crate::rates::RatePair;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupParams {
    pub group: String,
    pub bonafide_mean: f64,
    pub bonafide_std: f64,
    pub attack_mean: f64,
    pub attack_std: f64,
    pub n_bonafide: usize,
    pub n_attack: usize,
}

impl GroupParams {
    pub fn new(group: impl Into<String>, bonafide: (f64, f64), attack: (f64, f64), n_per_class: usize) -> Self {
        GroupParams {
            group: group.into(),
            bonafide_mean: bonafide.0,
            bonafide_std: bonafide.1,
            attack_mean: attack.0,
            attack_std: attack.1,
            n_bonafide: n_per_class,
            n_attack: n_per_class,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupScoreSpec {
    pub partition: String,
    pub groups: Vec<GroupParams>,
}

impl GroupScoreSpec {
    /// Two groups with the same distributions except that `b`'s attack
    /// mean moves by `attack_shift` (in units of the attack std).
    pub fn two_groups(partition: &str, a: &str, b: &str, n_per_class: usize, attack_shift: f64) -> Self {
        let base = GroupParams::new(a, (0.0, 1.0), (3.0, 1.0), n_per_class);
        let mut shifted = GroupParams {
            group: b.to_string(),
            ..base.clone()
        };
        shifted.attack_mean += attack_shift * shifted.attack_std;
        GroupScoreSpec {
            partition: partition.to_string(),
            groups: vec![base, shifted],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.groups.is_empty() {
            return Err(Error::InvalidSpec("no groups".into()));
        }
        for g in &self.groups {
            let bad = |what: &str| Err(Error::InvalidSpec(format!("group {:?}: {what}", g.group)));
            if !(g.bonafide_std > 0.0 && g.attack_std > 0.0) {
                return bad("standard deviations must be positive");
            }
            if !(g.bonafide_mean.is_finite() && g.attack_mean.is_finite()) {
                return bad("means must be finite");
            }
            if g.n_bonafide == 0 || g.n_attack == 0 {
                return bad("each class needs at least one sample");
            }
        }
        Ok(())
    }
}

/// Gaussian scores per group and class. The partition is attached when the
/// spec has two or more groups.
pub fn synth_scores(spec: &GroupScoreSpec, seed: u64) -> Result<ScoreSet> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    for g in &spec.groups {
        let classes = [
            (PadLabel::BonaFide, "bf", g.bonafide_mean, g.bonafide_std, g.n_bonafide),
            (PadLabel::Attack, "pa", g.attack_mean, g.attack_std, g.n_attack),
        ];
        for (label, tag, mean, std, n) in classes {
            let dist = Normal::new(mean, std).map_err(|e| Error::InvalidSpec(e.to_string()))?;
            for i in 0..n {
                records.push(
                    ScoreRecord::new(format!("{}-{tag}-{i}", g.group), dist.sample(&mut rng), label)
                        .with_group(&spec.partition, &g.group),
                );
            }
        }
    }
    let set = ScoreSet::new(records)?;
    if spec.groups.len() >= 2 {
        let partition = GroupPartition::new(&spec.partition, spec.groups.iter().map(|g| g.group.clone()).collect())?;
        set.with_partition(partition)
    } else {
        Ok(set)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifestShape {
    pub subjects: usize,
    pub samples_per_subject: usize,
    /// Probability that a sample is an attack.
    pub attack_fraction: f64,
    /// Probability that a subject is female.
    pub female_fraction: f64,
    pub train_fraction: f64,
}

/// Roughly the class and gender mix of the reference training data:
/// bona fide : attack about 1 : 1.9, female : male about 1 : 2.1.
impl Default for ManifestShape {
    fn default() -> Self {
        ManifestShape {
            subjects: 947,
            samples_per_subject: 6,
            attack_fraction: 1.9 / 2.9,
            female_fraction: 1.0 / 3.1,
            train_fraction: 0.8,
        }
    }
}

/// A fully annotated, identity-disjoint manifest with random attributes.
/// Every subject contributes at least one sample of each class.
pub fn synth_manifest(shape: &ManifestShape, seed: u64) -> Result<SampleManifest> {
    if shape.subjects < 2 || shape.samples_per_subject < 2 {
        return Err(Error::InvalidSpec(
            "need at least two subjects and two samples each".into(),
        ));
    }
    for p in [shape.attack_fraction, shape.female_fraction] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidSpec(format!("probability {p} outside [0, 1]")));
        }
    }
    const ATTACK_TYPES: [&str; 4] = ["print", "replay", "mask", "wax"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(shape.subjects * shape.samples_per_subject);
    for s in 0..shape.subjects {
        let female = rng.random_bool(shape.female_fraction);
        let attributes = AttributeSet {
            gender: Some(if female { Gender::Female } else { Gender::Male }),
            bangs: Some(rng.random_bool(0.3)),
            beard: Some(!female && rng.random_bool(0.35)),
            eyeglasses: Some(rng.random_bool(0.25)),
            makeup: Some(female && rng.random_bool(0.5)),
            long_hair: Some(rng.random_bool(if female { 0.6 } else { 0.1 })),
            straight_hair: Some(rng.random_bool(0.6)),
        };
        for k in 0..shape.samples_per_subject {
            let attack = match k {
                0 => false,
                1 => true,
                _ => rng.random_bool(shape.attack_fraction),
            };
            records.push(SampleRecord {
                sample_id: format!("subj{s:04}-{k:02}"),
                subject_id: format!("subj{s:04}"),
                media_path: None,
                pad_label: if attack { PadLabel::Attack } else { PadLabel::BonaFide },
                attack_type: attack.then(|| ATTACK_TYPES[rng.random_range(0..ATTACK_TYPES.len())].to_string()),
                split: Split::Train,
                attributes: attributes.clone(),
            });
        }
    }
    let config = SplitConfig {
        train_fraction: shape.train_fraction,
        seed,
    };
    let (_, test) = identity_disjoint_split(&records, &config)?;
    let test_ids: HashSet<String> = test.into_iter().map(|r| r.sample_id).collect();
    for r in &mut records {
        if test_ids.contains(&r.sample_id) {
            r.split = Split::Test;
        }
    }
    SampleManifest::new(records)
}

// Oracles. Each restates a definition by direct enumeration and shares no
// code with the rates module.

fn brute_apcer(scores: &ScoreSet, tau: f64) -> Option<f64> {
    let mut total = 0usize;
    let mut missed = 0usize;
    for r in scores.records() {
        if r.pad_label == PadLabel::Attack {
            total += 1;
            if r.score < tau {
                missed += 1;
            }
        }
    }
    (total > 0).then(|| missed as f64 / total as f64)
}

fn brute_bpcer(scores: &ScoreSet, tau: f64) -> Option<f64> {
    let mut total = 0usize;
    let mut rejected = 0usize;
    for r in scores.records() {
        if r.pad_label == PadLabel::BonaFide {
            total += 1;
            if r.score >= tau {
                rejected += 1;
            }
        }
    }
    (total > 0).then(|| rejected as f64 / total as f64)
}

/// APCER and BPCER by a linear scan and count.
pub fn brute_force_rates(scores: &ScoreSet, tau: f64) -> Result<RatePair> {
    let missing = |class| Error::UndefinedRate {
        group: "oracle".into(),
        class,
    };
    Ok(RatePair {
        apcer: brute_apcer(scores, tau).ok_or_else(|| missing(PadLabel::Attack))?,
        bpcer: brute_bpcer(scores, tau).ok_or_else(|| missing(PadLabel::BonaFide))?,
    })
}

/// Largest attack score whose APCER, counted directly, does not exceed `x`.
pub fn brute_force_threshold_at_apcer(scores: &ScoreSet, x: f64) -> Result<f64> {
    let mut best: Option<f64> = None;
    for r in scores.records().iter().filter(|r| r.pad_label == PadLabel::Attack) {
        let apcer = brute_apcer(scores, r.score).expect("an attack exists");
        if apcer <= x && best.is_none_or(|b| r.score > b) {
            best = Some(r.score);
        }
    }
    best.ok_or(Error::UndefinedRate {
        group: "oracle".into(),
        class: PadLabel::Attack,
    })
}

/// Every EER candidate threshold: one below the lowest score, each distinct
/// score, each midpoint strictly between neighbours, one above the highest.
pub fn eer_candidates(scores: &ScoreSet) -> Vec<f64> {
    let mut distinct: Vec<f64> = scores.records().iter().map(|r| r.score).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    distinct.dedup();
    let mut out = Vec::with_capacity(2 * distinct.len() + 1);
    if let (Some(&lo), Some(&hi)) = (distinct.first(), distinct.last()) {
        out.push(lo.next_down());
        for (i, &s) in distinct.iter().enumerate() {
            out.push(s);
            if let Some(&next) = distinct.get(i + 1) {
                let mid = s / 2.0 + next / 2.0;
                if mid > s && mid < next {
                    out.push(mid);
                }
            }
        }
        out.push(hi.next_up());
    }
    out
}

/// `(eer, tau)` by scanning every candidate with directly counted rates.
pub fn brute_force_eer(scores: &ScoreSet) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64, f64)> = None;
    for tau in eer_candidates(scores) {
        let rates = brute_force_rates(scores, tau)?;
        let gap = (rates.apcer - rates.bpcer).abs();
        // candidates ascend, so strict improvement keeps the smallest tau on ties
        if best.is_none_or(|(g, _, _)| gap < g) {
            best = Some((gap, tau, (rates.apcer + rates.bpcer) / 2.0));
        }
    }
    let (_, tau, eer) = best.ok_or(Error::EmptyInput)?;
    Ok((eer, tau))
}
