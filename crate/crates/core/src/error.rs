use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Gamma function pole at z = {0}")]
    GammaPole(Complex64),
    #[error("dilogarithm argument {0} outside (-inf, 1]")]
    DilogDomain(f64),
    #[error("invalid quadrature spec: {0}")]
    InvalidQuadrature(String),
    #[error("tail estimate {bound:e} exceeds tolerance {tolerance:e}")]
    TailNotConverged { bound: f64, tolerance: f64 },
    #[error("evaluation point {0} lies on the integration cut")]
    OnCut(Complex64),
    #[error("branch tracking failed: {0}")]
    Branch(String),
    #[error("invalid profile: {0}")]
    Profile(String),
    #[error("singular spectral parameter: {0}")]
    SingularK(String),
    #[error("overflow guard tripped: {0}")]
    Overflow(String),
    #[error("case classification inconsistent: {0}")]
    CaseMismatch(String),
    #[error("k1 determination failed: {0}")]
    K1(String),
    #[error("norming constant check failed: {0}")]
    Norming(String),
    #[error("wrong half-plane: {0}")]
    HalfPlane(String),
    #[error("division near zero: {0}")]
    NearZero(String),
    #[error("assumption (b) violated: Im nu = {0}")]
    AssumptionB(f64),
    #[error("ray xi = 0 lies in the unsupported transition zone")]
    ZeroRay,
    #[error("singularity proximity: {0}")]
    Singularity(String),
    #[error("stability violation: dt = {dt:e} exceeds c_cfl*h^2 = {limit:e}")]
    Cfl { dt: f64, limit: f64 },
    #[error("grid mismatch: {0}")]
    Grid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
