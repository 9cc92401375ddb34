use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("body parameters: {0} violated")]
    InvalidParams(&'static str),

    #[error("chart domain violated: |q| = {radius} exceeds {limit}")]
    ChartDomain { radius: f64, limit: f64 },

    #[error("chart domain violated during {flow} sub-flow: |q| = {radius}")]
    SubFlowChart { flow: &'static str, radius: f64 },

    #[error("parameters are not in the gap regime: {0}")]
    NotInGap(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resonant frequencies: normalization requires omega1 != omega2")]
    Resonance,

    #[error("expansion order {0} exceeds the supported maximum")]
    OrderOverflow(usize),

    #[error("zero rotation frequency: period undefined")]
    ZeroFrequency,

    #[error("orbit is not periodic: {0}")]
    NotPeriodic(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
