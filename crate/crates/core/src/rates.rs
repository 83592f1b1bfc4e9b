//! ISO/IEC 30107-3 error rates, EER and operating-point thresholds.
//!
//! A sample is classified as an attack iff `score >= tau`. APCER therefore
//! counts attacks with `score < tau` and BPCER counts bona fides with
//! `score >= tau`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{PadLabel, ScoreRecord, ScoreSet};
use crate::error::{Error, Result};

/// Where a threshold was computed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ThresholdSource {
    /// The union of all groups.
    Fused,
    Group(String),
}

impl ThresholdSource {
    pub fn label(&self) -> &str {
        match self {
            ThresholdSource::Fused => "fused",
            ThresholdSource::Group(g) => g,
        }
    }
}

impl fmt::Display for ThresholdSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ThresholdSource {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "fused" => ThresholdSource::Fused,
            g => ThresholdSource::Group(g.to_string()),
        })
    }
}

impl Serialize for ThresholdSource {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for ThresholdSource {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(s.parse().unwrap())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionThreshold {
    pub tau: f64,
    pub source: ThresholdSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_apcer: Option<f64>,
}

impl DecisionThreshold {
    pub fn new(tau: f64) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::InvalidArgument(format!("threshold {tau} is not finite")));
        }
        Ok(DecisionThreshold {
            tau,
            source: ThresholdSource::Fused,
            target_apcer: None,
        })
    }

    pub fn with_source(mut self, source: ThresholdSource) -> Self {
        self.source = source;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub apcer: f64,
    pub bpcer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EerResult {
    pub eer: f64,
    pub tau: DecisionThreshold,
}

/// Attack and bona fide scores of one population, each sorted ascending.
///
/// Rates are answered by binary search, so a set is built once and then
/// queried at many thresholds.
#[derive(Debug, Clone, Default)]
pub struct ClassScores {
    name: String,
    attack: Vec<f64>,
    bonafide: Vec<f64>,
}

impl ClassScores {
    pub fn from_records<'a>(name: impl Into<String>, records: impl IntoIterator<Item = &'a ScoreRecord>) -> Self {
        let mut attack = Vec::new();
        let mut bonafide = Vec::new();
        for r in records {
            match r.pad_label {
                PadLabel::Attack => attack.push(r.score),
                PadLabel::BonaFide => bonafide.push(r.score),
            }
        }
        attack.sort_by(f64::total_cmp);
        bonafide.sort_by(f64::total_cmp);
        ClassScores {
            name: name.into(),
            attack,
            bonafide,
        }
    }

    pub fn from_set(scores: &ScoreSet) -> Self {
        Self::from_records("fused", scores.records())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn attack(&self) -> &[f64] {
        &self.attack
    }

    pub fn bonafide(&self) -> &[f64] {
        &self.bonafide
    }

    fn require(&self, label: PadLabel) -> Result<&[f64]> {
        let scores = match label {
            PadLabel::Attack => &self.attack,
            PadLabel::BonaFide => &self.bonafide,
        };
        if scores.is_empty() {
            return Err(Error::UndefinedRate {
                group: self.name.clone(),
                class: label,
            });
        }
        Ok(scores)
    }

    pub fn apcer(&self, tau: f64) -> Result<f64> {
        let attack = self.require(PadLabel::Attack)?;
        Ok(count_below(attack, tau) as f64 / attack.len() as f64)
    }

    pub fn bpcer(&self, tau: f64) -> Result<f64> {
        let bonafide = self.require(PadLabel::BonaFide)?;
        Ok((bonafide.len() - count_below(bonafide, tau)) as f64 / bonafide.len() as f64)
    }

    pub fn rates(&self, tau: f64) -> Result<RatePair> {
        Ok(RatePair {
            apcer: self.apcer(tau)?,
            bpcer: self.bpcer(tau)?,
        })
    }

    /// Largest attack-score threshold whose APCER does not exceed `x`.
    ///
    /// This is the `(m+1)`-th smallest attack score where `m` is the largest
    /// count with `m / N <= x`, i.e. `floor(x * N)` up to rounding.
    pub fn threshold_at_apcer(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::InvalidArgument(format!("target APCER {x} outside (0, 1)")));
        }
        let attack = self.require(PadLabel::Attack)?;
        let n = attack.len();
        let mut m = (x * n as f64).floor() as usize;
        // floor(x * n) can land one off when x * n is within rounding of an integer.
        while m + 1 < n && (m + 1) as f64 / n as f64 <= x {
            m += 1;
        }
        while m > 0 && m as f64 / n as f64 > x {
            m -= 1;
        }
        Ok(attack[m])
    }

    /// Threshold minimising `|APCER - BPCER|` over all distinct scores, the
    /// midpoints between adjacent distinct scores, and one point beyond each
    /// end. Ties go to the smaller threshold.
    pub fn eer(&self) -> Result<(f64, f64)> {
        let attack = self.require(PadLabel::Attack)?;
        let bonafide = self.require(PadLabel::BonaFide)?;
        let mut distinct: Vec<f64> = attack.iter().chain(bonafide).copied().collect();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();

        let (na, nb) = (attack.len() as f64, bonafide.len() as f64);
        // Below every score: no attack is missed and every bona fide is rejected.
        let low = distinct[0].next_down();
        let mut best = (low, 0.0, 1.0);
        let mut best_gap = 1.0;
        let mut consider = |tau: f64, apcer: f64, bpcer: f64| {
            let gap = (apcer - bpcer).abs();
            if gap < best_gap {
                best_gap = gap;
                best = (tau, apcer, bpcer);
            }
        };

        // Running counts of scores strictly below the current candidate.
        let (mut ia, mut ib) = (0usize, 0usize);
        for (k, &s) in distinct.iter().enumerate() {
            while ia < attack.len() && attack[ia] < s {
                ia += 1;
            }
            while ib < bonafide.len() && bonafide[ib] < s {
                ib += 1;
            }
            consider(s, ia as f64 / na, (bonafide.len() - ib) as f64 / nb);
            // Midpoint to the next distinct score sees every score <= s below it.
            let (mut ja, mut jb) = (ia, ib);
            while ja < attack.len() && attack[ja] <= s {
                ja += 1;
            }
            while jb < bonafide.len() && bonafide[jb] <= s {
                jb += 1;
            }
            let apcer = ja as f64 / na;
            let bpcer = (bonafide.len() - jb) as f64 / nb;
            match distinct.get(k + 1) {
                Some(&next) => {
                    if let Some(mid) = midpoint(s, next) {
                        consider(mid, apcer, bpcer);
                    }
                }
                None => consider(s.next_up(), apcer, bpcer),
            }
        }
        let (tau, apcer, bpcer) = best;
        Ok(((apcer + bpcer) / 2.0, tau))
    }
}

fn count_below(sorted: &[f64], tau: f64) -> usize {
    sorted.partition_point(|&s| s < tau)
}

/// Midpoint strictly between two distinct scores, or `None` when they are
/// adjacent floats and nothing lies between them.
pub fn midpoint(lo: f64, hi: f64) -> Option<f64> {
    let m = lo / 2.0 + hi / 2.0;
    (m > lo && m < hi).then_some(m)
}

pub fn apcer(scores: &ScoreSet, tau: &DecisionThreshold) -> Result<f64> {
    ClassScores::from_set(scores).apcer(tau.tau)
}

pub fn bpcer(scores: &ScoreSet, tau: &DecisionThreshold) -> Result<f64> {
    ClassScores::from_set(scores).bpcer(tau.tau)
}

pub fn threshold_at_apcer(scores: &ScoreSet, x: f64) -> Result<DecisionThreshold> {
    let tau = ClassScores::from_set(scores).threshold_at_apcer(x)?;
    Ok(DecisionThreshold {
        tau,
        source: ThresholdSource::Fused,
        target_apcer: Some(x),
    })
}

pub fn eer(scores: &ScoreSet) -> Result<EerResult> {
    let (eer, tau) = ClassScores::from_set(scores).eer()?;
    Ok(EerResult {
        eer,
        tau: DecisionThreshold::new(tau)?,
    })
}
