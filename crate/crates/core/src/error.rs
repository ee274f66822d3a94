//! Error type shared across the crate.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid shift component {0}: each coordinate must be one of 0, 1/3, 2/3")]
    InvalidShift(String),
    #[error("level {level} out of range [0, {max}]")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("cube is at maximal depth {0}; no finer subdivision exists on this grid")]
    MaxDepth(usize),
    #[error("grid mismatch: operands live on different grids")]
    GridMismatch,
    #[error("empty region")]
    EmptyRegion,
    #[error("region diameter too large: {0}")]
    RegionTooLarge(String),
    #[error("non-positive or non-finite weight sample at cell {0}")]
    NonPositiveWeight(usize),
    #[error("power weight exponent {alpha} outside (-{n}, {n})")]
    PowerExponent { alpha: f64, n: usize },
    #[error("weight center must be an exact lattice point, got coordinate {0}")]
    CenterNotLattice(f64),
    #[error("enlargement factor {0} must be >= 1")]
    EnlargementFactor(f64),
    #[error("invalid Lorentz exponents p={p}, q={q}")]
    LorentzExponents { p: f64, q: f64 },
    #[error("negative value {value} at sequence entry {index}")]
    NegativeSequenceValue { index: usize, value: f64 },
    #[error("sequence keys do not match the cube set of the system")]
    MissingKeys,
    #[error("NaN or infinity in input")]
    NonFinite,
    #[error("signature must be cancellative for this operation")]
    NonCancellativeSignature,
    #[error("cancellative Haar functions need an even cell count per half; cube at level {0} is too fine")]
    HaarLevelTooFine(usize),
    #[error("coefficients belong to a different system (omega {have} vs {want})")]
    SystemMismatch { have: u16, want: u16 },
    #[error("mollifier scale {0} outside (0, 1/4)")]
    MollifierScale(f64),
    #[error("function has support outside its cube (max leak {0:e})")]
    SupportViolation(f64),
    #[error("input carries cell-scale detail outside the Haar span (fine block L2 norm {0:e})")]
    FineRemainder(f64),
    #[error("unknown paraproduct kind or missing shift spec for the remainder")]
    ParaproductSpec,
    #[error("cube too fine: grandchildren would exceed the maximal depth")]
    NoGrandchildren,
    #[error("frame index sets do not match")]
    FrameIndexMismatch,
    #[error("no same-level partner satisfies the separation window at level {0}")]
    LevelTooCoarse(usize),
    #[error("kernel windows touch the diagonal")]
    WindowsOverlapDiagonal,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("singular value decomposition failed to converge")]
    SvdFailed,
    #[error("matrix contains NaN entries")]
    NanMatrix,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("empty report")]
    EmptyReport,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
