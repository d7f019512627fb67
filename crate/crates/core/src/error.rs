use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {0} is not an interior point of the disc")]
    NotInterior(Complex64),
    #[error("point {0} is not on the unit circle (|z| = {1})")]
    NotOnCircle(Complex64, f64),
    #[error("grid size {0} is invalid: {1}")]
    BadGrid(usize, &'static str),
    #[error("symbol is not a self-map of the disc: |phi({witness})| = {modulus}")]
    NotSelfMap { witness: Complex64, modulus: f64 },
    #[error("symbol has not been validated")]
    Unvalidated,
    #[error("the two quadrature routes disagree ({first} vs {second}) at N = {n}")]
    RouteMismatch { first: f64, second: f64, n: usize },
    #[error("degree {0} exceeds the cap of {1}")]
    DegreeCap(usize, usize),
    #[error("denominator vanishes in the closed disc near {0}")]
    PoleInDisc(Complex64),
    #[error("unsupported symbol node: {0}")]
    Unsupported(&'static str),
    #[error("arc is under-resolved: {0} samples inside, need at least {1}")]
    UnderResolved(usize, usize),
    #[error("empty sweep: {0}")]
    EmptySweep(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("depth cap {cap} reached with {unresolved} unresolved arcs")]
    DepthCap { cap: u32, unresolved: usize },
    #[error("selection exhausted the sequence at depth {0}")]
    Exhausted(usize),
    #[error("bound violated at a = {witness}: {detail}")]
    BoundViolation { witness: Complex64, detail: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
