use thiserror::Error;

use crate::matnorm::NormId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown norm identifier `{0}` (expected l1, linf or l1linf)")]
    UnknownNorm(String),

    #[error("norms {primal} and {dual} are not a dual pair")]
    NotDualPair { primal: NormId, dual: NormId },

    #[error("unsupported norm pair: strain norm must be l1 with stress norm linf")]
    UnsupportedNormPair,

    #[error("dimension must be 1, 2 or 3, got {0}")]
    BadDimension(usize),

    #[error("dimension {dim} needs {expected} components, got {got}")]
    ComponentCount {
        dim: usize,
        expected: usize,
        got: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mesh: {}", .0.join("; "))]
    InvalidMesh(Vec<String>),

    #[error("element {0} has singular geometry")]
    SingularElement(usize),

    #[error("failed to parse {what}: {source}")]
    Parse {
        what: &'static str,
        #[source]
        source: serde_json::Error,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("LP shape mismatch: {0}")]
    LpShape(String),

    #[error("LP iteration limit of {0} pivots exceeded")]
    IterationLimit(usize),

    #[error("brute-force LP oracle limited to {max} rows and columns, got {rows}x{cols}")]
    OracleTooLarge { rows: usize, cols: usize, max: usize },

    #[error("{0} LP is infeasible")]
    Infeasible(&'static str),

    #[error("kinematic LP is unbounded: the supported body admits a mechanism")]
    Mechanism,

    #[error("solver inconsistency: {0}")]
    SolverInconsistency(String),

    #[error("plastic mode needs a nontrivial isochoric subspace; {0}")]
    TrivialIsochoric(String),

    #[error("traction is zero")]
    ZeroTraction,

    #[error("{components} boundary components exceed the exact enumeration cap of {cap}")]
    CapExceeded { components: usize, cap: usize },
}

impl Error {
    /// Whether the error is caused by the inputs rather than by the solver.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::IterationLimit(_)
                | Error::Infeasible(_)
                | Error::Mechanism
                | Error::SolverInconsistency(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
