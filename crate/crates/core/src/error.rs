use std::fmt;

use crate::data::PadLabel;

/// Which error rate a singular ABF denominator came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    Apcer,
    Bpcer,
}

impl fmt::Display for RateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateKind::Apcer => f.write_str("APCER"),
            RateKind::Bpcer => f.write_str("BPCER"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate sample_id {0:?}")]
    DuplicateSampleId(String),

    #[error("line {line}: unknown attribute key {key:?}")]
    UnknownAttribute { line: usize, key: String },

    #[error("sample {sample_id:?} is missing attribute {attribute}")]
    MissingAttribute { sample_id: String, attribute: &'static str },

    #[error("line {line}: score {value:?} is not finite")]
    NonFiniteScore { line: usize, value: String },

    #[error("score file references sample ids absent from the manifest: {}", .0.join(", "))]
    UnresolvedSampleIds(Vec<String>),

    #[error("line {line}: pad_label column disagrees with manifest for {sample_id:?}")]
    LabelMismatch { line: usize, sample_id: String },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{class} rate undefined for group {group:?}: no {class} records")]
    UndefinedRate { group: String, class: PadLabel },

    #[error("sample {sample_id:?} has no group in partition {partition:?}")]
    UngroupedRecord { sample_id: String, partition: String },

    #[error("singular ABF denominator: max group {0} equals 1")]
    SingularDenominator(RateKind),

    #[error("at sweep target x = {x}: {source}")]
    AtSweepPoint {
        x: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("train and test splits share subjects: {}", .0.join(", "))]
    SubjectOverlap(Vec<String>),

    #[error("empty train selection")]
    EmptyTrainSelection,

    #[error("test partition {0:?} has no samples")]
    EmptyTestPartition(String),

    #[error("no {0} records present")]
    MissingClass(PadLabel),

    #[error("image dimensions differ: {expected:?} vs {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("no eligible {0} donor in the candidate pool")]
    EmptyDonorPool(PadLabel),

    #[error("patch of {size}px does not fit a {width}x{height} image")]
    PatchTooLarge { size: usize, width: usize, height: usize },

    #[error("region {top},{left} size {size} is not inside a {width}x{height} image")]
    RegionOutOfBounds {
        top: usize,
        left: usize,
        size: usize,
        width: usize,
        height: usize,
    },

    #[error("map geometry: {0}")]
    Geometry(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::DuplicateSampleId(_) => "duplicate-sample-id",
            Error::UnknownAttribute { .. } => "unknown-attribute",
            Error::MissingAttribute { .. } => "missing-attribute",
            Error::NonFiniteScore { .. } => "non-finite-score",
            Error::UnresolvedSampleIds(_) => "unresolved-sample-id",
            Error::LabelMismatch { .. } => "label-mismatch",
            Error::EmptyInput => "empty-input",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::UndefinedRate { .. } => "undefined-rate",
            Error::UngroupedRecord { .. } => "ungrouped-record",
            Error::SingularDenominator(_) => "singular-denominator",
            Error::AtSweepPoint { source, .. } => source.code(),
            Error::SubjectOverlap(_) => "subject-overlap",
            Error::EmptyTrainSelection => "empty-train-selection",
            Error::EmptyTestPartition(_) => "empty-test-partition",
            Error::MissingClass(_) => "missing-class",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::EmptyDonorPool(_) => "empty-donor-pool",
            Error::PatchTooLarge { .. } => "patch-too-large",
            Error::RegionOutOfBounds { .. } => "region-out-of-bounds",
            Error::Geometry(_) => "geometry",
            Error::InvalidSpec(_) => "invalid-spec",
            Error::Io(_) => "io",
        }
    }

    /// True for failures reading or decoding inputs, as opposed to
    /// computations that are undefined on otherwise valid data.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::DuplicateSampleId(_)
                | Error::UnknownAttribute { .. }
                | Error::NonFiniteScore { .. }
                | Error::UnresolvedSampleIds(_)
                | Error::LabelMismatch { .. }
                | Error::EmptyInput
                | Error::Io(_)
        )
    }

    pub(crate) fn at_x(self, x: f64) -> Error {
        Error::AtSweepPoint {
            x,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
