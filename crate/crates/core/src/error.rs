use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge: coefficient {index} moved by {change:e} under node doubling")]
    NonConvergence { index: usize, change: f64 },
    #[error("superlevel set is empty")]
    DegenerateSet,
    #[error("root refinement failed near {0}")]
    RootIsolationFailure(f64),
    #[error("no nonzero coefficient up to order {0}")]
    RankNotFound(usize),
    #[error("dimension {0} is not supported for quadrature-backed surfaces")]
    UnsupportedDimension(usize),
    #[error("ball of radius {radius} holds only {nodes} quadrature nodes")]
    ResolutionTooCoarse { radius: f64, nodes: usize },
    #[error("integrand singularity of order {exponent} is not integrable in dimension {d}")]
    SingularIntegrand { exponent: f64, d: usize },
    #[error("kappa*alpha = {kappa_alpha} must stay below d-1 = {limit}")]
    DivergentIntegral { kappa_alpha: f64, limit: f64 },
    #[error("covariance matrix is not positive definite even after jitter")]
    NotPositiveDefinite,
    #[error("tuple count {tuples} exceeds the cap {cap}; use the subsampled sampler")]
    BudgetExceeded { tuples: f64, cap: f64 },
    #[error("no root: condition (bb) fails for d={d}, kappa={kappa}")]
    NoRoot { d: usize, kappa: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
