use thiserror::Error;

/// Errors raised by parameter construction, client randomizers and aggregators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LdpError {
    #[error("privacy budget must be a finite positive number, got {0}")]
    InvalidBudget(f64),
    #[error("domain size must be at least 2, got {0}")]
    InvalidDomain(usize),
    #[error("value {value} is outside the domain [0, {k})")]
    OutOfDomain { value: usize, k: usize },
    #[error("subset size {omega} is not smaller than the domain size {k}")]
    DegenerateSubset { omega: usize, k: usize },
    #[error("reports do not all match the expected kind `{expected}`")]
    MixedReportTypes { expected: &'static str },
    #[error("no reports to aggregate")]
    EmptyReportSet,
    #[error("channel is degenerate: p* - q* = {0}")]
    DegenerateChannel(f64),
    #[error("budget pair is infeasible for this protocol: {0}")]
    InfeasibleBudget(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("bucket sample size {d} must lie in [1, {k}]")]
    InvalidSampleSize { d: usize, k: usize },
    #[error("output space of {0} outcomes is too large to enumerate")]
    OutputSpaceTooLarge(usize),
    #[error("invalid distribution parameter: {0}")]
    InvalidDistributionParam(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = LdpError> = std::result::Result<T, E>;

pub(crate) fn check_budget(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(LdpError::InvalidBudget(eps))
    }
}

pub(crate) fn check_domain(k: usize) -> Result<()> {
    if k >= 2 {
        Ok(())
    } else {
        Err(LdpError::InvalidDomain(k))
    }
}

pub(crate) fn check_value(value: usize, k: usize) -> Result<()> {
    if value < k {
        Ok(())
    } else {
        Err(LdpError::OutOfDomain { value, k })
    }
}
