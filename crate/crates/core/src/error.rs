use thiserror::Error;

use crate::opalgebra::Deviation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index-set period {period} exceeds the configured cap {cap}")]
    PeriodCapExceeded { period: u128, cap: u64 },

    #[error("instrument has no outcomes")]
    EmptyInstrument,

    #[error("completeness fails on columns [0, {window}): {} deviating entries, first {:?}", witnesses.len(), witnesses.first())]
    CompletenessViolation { window: u64, witnesses: Vec<Deviation> },

    #[error("outcome {outcome} is not a contraction: column {column} has norm {norm}")]
    ContractionViolation { outcome: u32, column: u64, norm: f64 },

    #[error("bad probability vector: {0}")]
    BadProbabilityVector(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("index sets do not form a partition of the naturals: {0}")]
    CoverageViolation(String),

    #[error("outcome {outcome:?}: condition `{condition}` violated (witness {witness:?})")]
    PartsViolation {
        condition: &'static str,
        outcome: Option<(u32, Option<u32>)>,
        witness: Option<Deviation>,
    },

    #[error("unsupported operator form: {0}")]
    UnsupportedForm(String),

    #[error("not a POVM: sum of effects differs from identity at {0:?}")]
    InvalidPovm(Deviation),

    #[error("split invariant violated: {0}")]
    SplitInvariantViolation(String),

    #[error("not isometric on support: column {column} has amplitude {amplitude}")]
    NotIsometricOnSupport { column: u64, amplitude: f64 },

    #[error("range index {index} lies outside the support; the map is not an isometry of its support")]
    RangeEscapesSupport { index: u64 },

    #[error("orbit structure could not be resolved: {0}")]
    OrbitUndetermined(String),

    #[error("state has (numerically) zero probability for every outcome")]
    DegenerateState,

    #[error("truncation window invalid: needs dimension {needed}, have {dim}")]
    WindowInvalid { needed: u64, dim: u64 },

    #[error("format error: {0}")]
    Format(String),
}
