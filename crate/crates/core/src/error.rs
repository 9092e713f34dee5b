use thiserror::Error;

/// Errors raised by parameter validation and by the inline checks of the
/// multiplier models.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus must be odd")]
    EvenModulus,
    #[error("modulus must be at least 3")]
    ModulusTooSmall,
    #[error("modulus must be non-zero")]
    ZeroModulus,
    #[error("radix exponent k={0} outside [2, {max}]", max = crate::context::MAX_RADIX_BITS)]
    RadixOutOfRange(usize),
    #[error("stage count t={0} must be at least 1")]
    StagesOutOfRange(usize),
    #[error("pipeline span k*t={0} exceeds {max} bits", max = crate::context::MAX_PIPELINE_SPAN)]
    SpanTooWide(usize),
    #[error("operand has {bits} bits, wider than the {limit}-bit digit vector")]
    OperandTooWide { bits: u64, limit: u64 },
    #[error("operand must be smaller than the modulus")]
    OperandOutOfRange,
    #[error("value before final reduction is not below 2M")]
    ReductionBound,
    #[error("iteration {iteration}: low {k} bits are non-zero before the shift")]
    ShiftInvalid { iteration: usize, k: usize },
    #[error("iteration {iteration}: low window of the redundant triple is not a multiple of 2^k")]
    CarryPrecondition { iteration: usize },
    #[error("carry window sum {sum} is not a multiple of 2^{k}")]
    CarryWindow { sum: u128, k: usize },
    #[error("term of {bits} bits exceeds the {width}-bit residue width")]
    WidthOverflow { bits: u64, width: usize },
    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("iteration {iteration}: redundant state disagrees with the exact recurrence")]
    LockstepMismatch { iteration: usize },
    #[error("iteration {iteration}: pipeline emitted a wrong quotient multiple")]
    PipelineMismatch { iteration: usize },
    #[error("window width {0} outside [4, 6]")]
    WindowOutOfRange(usize),
    #[error("merged encoding requires k = w = 4 (got k={k}, w={w})")]
    MergeUnsupported { k: usize, w: usize },
    #[error("invalid pipeline schedule: {0}")]
    InvalidSchedule(String),
    #[error("iteration index {index} outside [0, {max}]")]
    IterationOutOfRange { index: usize, max: usize },
    #[error("update delay T_u must be positive")]
    ZeroUpdateDelay,
    #[error("compression target must be at least 2 (got {0})")]
    CompressionTarget(usize),
}

impl Error {
    pub(crate) fn at(self, iteration: usize) -> Self {
        match self {
            e @ (Error::ShiftInvalid { .. }
            | Error::CarryPrecondition { .. }
            | Error::LockstepMismatch { .. }
            | Error::PipelineMismatch { .. }
            | Error::AtIteration { .. }) => e,
            other => Error::AtIteration {
                iteration,
                source: Box::new(other),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
