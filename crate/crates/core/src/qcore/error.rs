use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("duplicate subsystem identifier `{0}`")]
    DuplicateSubsystem(String),
    #[error("subsystem `{id}` has dimension {dim}; dimensions must be at least 2")]
    InvalidDimension { id: String, dim: usize },
    #[error("unknown subsystem `{0}`")]
    UnknownSubsystem(String),
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("operator is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("basis is not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("basis has {got} vectors but its space has dimension {dim}")]
    IncompleteBasis { dim: usize, got: usize },
    #[error("duplicate outcome label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown outcome label `{0}`")]
    UnknownLabel(String),
    #[error("outcome {0} has zero probability")]
    ZeroProbability(String),
    #[error("partial trace needs a nonempty keep set")]
    EmptyKeep,
    #[error("record too small: {needed} outcomes need a record of dimension >= {needed}, got {got}")]
    RecordTooSmall { needed: usize, got: usize },
    #[error("relabel map is not a bijection: {0}")]
    NotBijective(String),
    #[error("targets overlap on subsystem `{0}`")]
    OverlappingTargets(String),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("value {0} is not +1 or -1")]
    NotSign(i64),
}
