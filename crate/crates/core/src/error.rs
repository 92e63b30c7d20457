use thiserror::Error;

use crate::lattice::VertexId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("vertex {0} lies in the guard band")]
    BoundaryVertex(VertexId),

    #[error("region touches the guard band at vertex {0}")]
    RegionTouchesGuardBand(VertexId),

    #[error("fields live on different domains")]
    DomainMismatch,

    #[error("domain has no lattice coordinates")]
    NoCoordinates,

    #[error("affine form ({p},{q},{c}) is not invariant under the cylinder period")]
    NotPeriodic { p: i64, q: i64, c: i64 },

    #[error("invalid piecewise-linear function: {0}")]
    InvalidFunction(String),

    #[error("gcd({0}, {1}) is not 1")]
    NotCoprime(i64, i64),

    #[error("input is not superharmonic at vertex {0}")]
    NotSuperharmonicInput(VertexId),

    #[error("window too small: change set reached vertex {vertex} next to the guard band")]
    WindowTooSmall { vertex: VertexId },

    #[error("no fixed point after {iterations} smoothing steps ({} vertices changed in the last step)", last_change_set.len())]
    IterationCapExceeded {
        iterations: usize,
        last_change_set: Vec<VertexId>,
    },

    #[error("state is not stable at vertex {0}")]
    NotStable(VertexId),

    #[error("wave source {0} does not hold threshold-1 grains")]
    SourceNotAtThreshold(VertexId),

    #[error("no admissible wave source")]
    NoValidSource,

    #[error("relaxation budget of {0} topplings exhausted")]
    BudgetExhausted(u64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("oracle instance too large: {0}")]
    TooLarge(String),

    #[error("value {value} at vertex {vertex} is outside the palette")]
    ValueOutOfPalette { vertex: VertexId, value: i64 },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
