use thiserror::Error;

/// Errors surfaced by the numeric layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: requires {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("asymptotic Bessel evaluator called with order {nu} below floor {floor}; use the series evaluator")]
    BesselOrderBelowFloor { nu: f64, floor: f64 },

    #[error("constraint set has no eventually-divergent item, so atom support cannot be bounded{}",
        .hint.then_some("; replace step indicators with their smoothed variant").unwrap_or(""))]
    UnboundedSupport { hint: bool },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, requirement: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            requirement,
        }
    }
}
