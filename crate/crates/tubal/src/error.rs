use thiserror::Error;

/// Errors surfaced by the tensor algebra, the solver, and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right} ({context})")]
    DimensionMismatch {
        left: String,
        right: String,
        context: &'static str,
    },

    #[error(
        "imaginary residue {residue:.3e} after inverse DFT exceeds tolerance {tolerance:.3e}; \
         the spectral tensor is not conjugate-symmetric"
    )]
    ImaginaryResidueTooLarge { residue: f64, tolerance: f64 },

    #[error("index ({i}, {j}, {k}) out of bounds for dims ({n1}, {n2}, {n3})")]
    IndexOutOfBounds {
        i: usize,
        j: usize,
        k: usize,
        n1: usize,
        n2: usize,
        n3: usize,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid rank {rank}: must be in 1..={max}")]
    InvalidRank { rank: usize, max: usize },

    #[error("invalid sampling rate {0}: must be in (0, 1]")]
    InvalidRate(f64),

    #[error("operation undefined for the zero tensor")]
    ZeroTensor,

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("reference tensor is zero; relative error undefined")]
    ZeroReference,

    #[error("the index set is empty")]
    EmptySet,

    #[error("inputs are identical; PSNR is infinite")]
    IdenticalInputs,

    #[error("solver iterate became non-finite at iteration {iter} ({what})")]
    NonFiniteIterate { iter: usize, what: &'static str },

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("payload length mismatch: header declares {expected} values, file holds {found}")]
    TruncatedPayload { expected: u64, found: u64 },

    #[error("tensor dims ({0}, {1}, {2}) overflow or are empty")]
    DimOverflow(u64, u64, u64),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("non-finite value in input data at flat index {0}")]
    NonFiniteData(usize),

    #[error("malformed file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(left: impl std::fmt::Debug, right: impl std::fmt::Debug, context: &'static str) -> Self {
        Error::DimensionMismatch {
            left: format!("{left:?}"),
            right: format!("{right:?}"),
            context,
        }
    }
}
