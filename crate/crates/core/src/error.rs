use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{name}: printed form {printed} and simplified form {simplified} disagree")]
    ConstantMismatch {
        name: &'static str,
        printed: f64,
        simplified: f64,
    },

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("negative-order multiplier (order {order}) applied to a field with nonzero mean {mean:e}")]
    NonzeroMean { order: f64, mean: f64 },

    #[error("negative value {value:e} at sample {index} where a nonnegative field was required")]
    NegativeValue { index: usize, value: f64 },

    #[error("characteristic inversion did not converge at t = {t} (residual {residual:e} after {iterations} iterations)")]
    NewtonDiverged {
        t: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("singular characteristic Jacobian at t = {t}")]
    SingularJacobian { t: f64 },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("nonpositive value {value:e} at sample {index}")]
    NonPositiveSample { index: usize, value: f64 },

    #[error("non-finite value in {what} at t = {t}")]
    NonFinite { what: &'static str, t: f64 },

    #[error("gate failed: {0}")]
    GateFailed(String),

    #[error("field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
