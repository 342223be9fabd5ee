use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degenerate weight matrix")]
    DegenerateWeightMatrix,
    #[error("zero vector has no primitive representative")]
    ZeroVector,
    #[error("non-simplicial cone")]
    NonSimplicialCone,
    #[error("fan not complete")]
    FanNotComplete,
    #[error("empty/nonpositive weight")]
    NonPositiveWeight,
    #[error("not well-formed: {0}")]
    NotWellFormed(String),
    #[error("zero column")]
    ZeroColumn,
    #[error("(a,b) parallel to a column")]
    ParallelColumn,
    #[error("S± too small: |I+| = {plus}, |I-| = {minus}")]
    SplitTooSmall { plus: usize, minus: usize },
    #[error("fewer than N rays")]
    FewerThanNRays,
    #[error("dimension {0} is below 2")]
    DimensionTooSmall(usize),
    #[error("exhausted: no non-zero coefficient in range")]
    Exhausted,
    #[error("no interior root")]
    NoInteriorRoot,
    #[error("did not converge")]
    DidNotConverge,
    #[error("degenerate design")]
    DegenerateDesign,
    #[error("too few points: {0}")]
    TooFewPoints(usize),
    #[error("zero coefficient at degree {0}")]
    ZeroCoefficient(usize),
    #[error("degenerate probability vector")]
    DegenerateProbabilities,
    #[error("need at least two classes")]
    SingleClass,
    #[error("feature length mismatch: expected {expected}, got {got}")]
    FeatureLength { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("target unreachable: {found} of {wanted} after {draws} draws")]
    TargetUnreachable { found: usize, wanted: usize, draws: u64 },
}
