use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot differentiate constant to a nonconstant")]
    ConstantDerivative,

    #[error("derivative order exhausts degree (k = {k}, degree = {degree})")]
    DerivativeOrderExhausted { k: usize, degree: usize },

    #[error("coefficient expansion of degree {degree} exceeds the floating-point cap {cap}")]
    ExpansionTooLarge { degree: usize, cap: usize },

    #[error("pole at z = {z}")]
    Pole { z: Complex64 },

    #[error("z = {z} lies on the support or branch cut")]
    OnSupport { z: Complex64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        best: Vec<Complex64>,
        residual: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("total masses differ: {0} vs {1}")]
    MassMismatch(f64, f64),

    #[error("measure is not supported on the real line")]
    ComplexSupport,

    #[error("Stieltjes inversion did not converge at x = {x}")]
    InversionFailure { x: f64 },

    #[error("negative density {value:e} recovered at x = {x}")]
    NegativeDensity { x: f64, value: f64 },

    #[error("characteristic solve failed at z = {z}, t = {t} (shock or branch point)")]
    Shock { z: Complex64, t: f64, last: Complex64 },

    #[error("singular characteristic: initial transform vanishes at s = {s}")]
    SingularCharacteristic { s: Complex64 },

    #[error("ambiguous branch selection at z = {z}, t = {t}")]
    BranchAmbiguity { z: Complex64, t: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
