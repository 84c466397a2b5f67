use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("register name `{0}` appears more than once")]
    NameCollision(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("keeping every register is the outer product |psi><psi|; use DensityMatrix::pure")]
    UseOuterProductInstead,
    #[error("register `{0}` is not a grid register")]
    Kind(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("axis error: {0}")]
    Axis(String),
    #[error("conditioning on an assignment of zero probability")]
    ConditionOnNull,
    #[error("grouping error: {0}")]
    Grouping(String),
    #[error("partition error: {0}")]
    Partition(String),
    #[error("density is not normalized: {0}")]
    Norm(String),
    #[error("observables act on overlapping registers: {0}")]
    SubsystemOverlap(String),
    #[error("relative state undefined: <eta|Psi> vanishes")]
    NullRelativeState,
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("basis error: {0}")]
    Basis(String),
    #[error("projector family error: {0}")]
    Projector(String),
    #[error("tree error: {0}")]
    Tree(String),
    #[error("alphabet error: expected {expected} outcome symbols, got {got}")]
    Alphabet { expected: usize, got: usize },
    #[error("observable is degenerate; observations must resolve eigenvectors")]
    DegenerateObservable,
    #[error("unknown observer `{0}`")]
    UnknownObserver(String),
    #[error("size limit exceeded: {0}")]
    Size(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("pointer shift is not lattice aligned: {0}")]
    Alignment(String),
    #[error("configuration error: {0}")]
    Config(String),
}
