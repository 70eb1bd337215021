use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("singular matrix")]
    SingularMatrix,
    #[error("fixed space of dimension {0}, expected a single line")]
    NotParabolicFixedLine(usize),
    #[error("degenerate face: its plane passes through the origin or its corners are dependent")]
    DegenerateFace,
    #[error("witness cannot separate the lifts: {0}")]
    BadWitness(String),
    #[error("conic system has a solution space of dimension {0}")]
    DegenerateConicSystem(usize),
    #[error("cusp word is not a cusp-parabolic element")]
    NotCusped,
    #[error("cusp lift is not fixed by the cusp element")]
    BadCuspLift,
    #[error("bad flip at triangle {tri} edge {edge}: {reason}")]
    BadFlip { tri: usize, edge: usize, reason: String },
    #[error("polyhedron still has an admissible flip at triangle {tri} edge {edge}")]
    NotConvexYet { tri: usize, edge: usize },
    #[error("flip budget of {0} steps exceeded")]
    StepBudgetExceeded(usize),
    #[error("no non-admissible flip available")]
    CannotScramble,
    #[error("2x2 matrix has determinant {0}, expected 1")]
    NotUnimodular(String),
    #[error("degenerate parameters: {0}")]
    DegenerateParams(String),
    #[error("parameters leave the convex region: {0}")]
    NotConvex(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("chart functional vanishes on a lift of face {face}")]
    ChartOverflow { face: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
