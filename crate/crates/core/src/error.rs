use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("amplitude is not finite")]
    NonFinite,

    #[error("spin axis is not a unit vector (squared length {norm_sqr})")]
    InvalidAxis { norm_sqr: f64 },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("phase mask is empty")]
    EmptyMask,

    #[error("invalid phase mask: {0}")]
    InvalidMask(&'static str),

    #[error("invalid projector: {0}")]
    InvalidProjector(String),

    #[error("impossible branch (probability {probability:e})")]
    ImpossibleBranch { probability: f64 },

    #[error("coupling needs at least one site")]
    EmptyCoupling,

    #[error("expected a {expected} coupling")]
    CouplingArity { expected: &'static str },

    #[error("readout phase must be finite")]
    InvalidPhase,

    #[error("visibility {0} is outside [0, 1]")]
    InvalidVisibility(f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("category mismatch: table has {table:?}, expected {expected:?}")]
    CategoryMismatch {
        table: Vec<String>,
        expected: Vec<String>,
    },

    #[error("unknown preset state `{0}`")]
    UnknownPreset(String),
}
