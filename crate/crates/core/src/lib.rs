//! Fairness evaluation and fairness-aware augmentation for face
//! presentation attack detection (PAD).
//!
//! Scores are attack-likelihoods; a sample is classified as an attack iff
//! its score is at least the decision threshold.

pub mod data;
pub mod error;
pub mod fairness;
pub mod fairswap;
pub mod odta;
pub mod protocol;
pub mod rates;
pub mod synth;

pub use data::{
    derive_occlusion, frame_indices, parse_manifest, parse_scores, serialize_manifest, write_scores, Attribute,
    AttributeSet, Gender, GroupPartition, PadLabel, PartitionKind, SampleManifest, SampleRecord, ScoreRecord, ScoreSet,
    Split,
};
pub use error::{Error, RateKind, Result};
pub use fairness::{
    abf, abf_alpha_profile, fairness_curve, fdr, AlphaProfile, FairnessCurve, FairnessValue, Metric, MetricConfig,
    RateSweep, SweepGrid,
};
pub use fairswap::{fairswap_augment, AugmentedSample, FairSwapParams, PixelMap, RasterImage, SwapRegion, SwapSample};
pub use odta::{odta_report, OdtaReport, OdtaRow};
pub use protocol::{
    build_protocol, identity_disjoint_split, oversample_balance, ProtocolId, ProtocolSpec, TrainTestPlan,
};
pub use rates::{apcer, bpcer, eer, threshold_at_apcer, DecisionThreshold, EerResult, RatePair, ThresholdSource};
