use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// One message per violated parameter bound.
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    /// β = 0 together with μ ≤ L_max: the penalty component has no bounded
    /// solution with the required limit, ruin is certain for every threshold.
    #[error("penalty component degenerates for beta = 0 and mu <= lmax")]
    DegeneratePenalty,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("constraint infeasible: x0 ≤ x_bar (x0 = {x0}, x_bar = {x_bar})")]
    Infeasible { x0: f64, x_bar: f64 },

    #[error("constraint infeasible: ruin is certain for beta = 0 and mu <= lmax")]
    CertainRuin,

    #[error("root bracket expansion failed: {0}")]
    Bracket(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}
