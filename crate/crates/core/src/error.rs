use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid torus: periods must be positive, got ({0}, {1})")]
    InvalidTorus(f64, f64),

    #[error("invalid grid resolution {0}x{1}: resolutions must be even and positive")]
    InvalidGrid(usize, usize),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("non-finite value at node {0}")]
    NonFiniteValue(usize),

    #[error("right-hand side has non-zero mean {mean:e}")]
    NonZeroMean { mean: f64 },

    #[error("coincident points: distance {0:e} below 1e-12")]
    CoincidentPoints(f64),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("outside the domain X: integral of K~ e^u is {mass:e} <= 0")]
    DomainViolation { mass: f64 },

    #[error("bubble support point {point:?} lies within 4*gamma of cone point {cone}")]
    SingularOverlap { point: [f64; 2], cone: usize },

    #[error("bubble order {alpha} outside the admissible interval ({lower}, {upper})")]
    BadOrder { alpha: f64, lower: f64, upper: f64 },

    #[error("invalid barycenter: {0}")]
    InvalidBarycenter(String),

    #[error("invalid cone point: {0}")]
    InvalidConePoint(String),

    #[error("hypothesis (H1) fails: min |grad K| on the nodal band is {beta:e}, below {floor:e}")]
    NodalGradient { beta: f64, floor: f64 },

    #[error("potential does not change sign")]
    NoSignChange,

    #[error("hypothesis (H2) fails: cone point {0} lies on the nodal band")]
    ConeOnNodalLine(usize),

    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),

    #[error("mask touches the nodal band or mixes sign regions")]
    MaskTouchesNodalBand,

    #[error("solver left the domain X and could not backtrack")]
    DomainExit,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("Newton stagnated at residual {residual:e}")]
    Stagnation { residual: f64 },

    #[error("branch converged throughout; no blow-up to quantize")]
    NoBlowUp,

    #[error("lambda = {lambda} lies within 1e-9 of the critical value {critical}")]
    LambdaCritical { lambda: f64, critical: f64 },

    #[error("unsupported space model: {0}")]
    UnsupportedModel(String),

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
