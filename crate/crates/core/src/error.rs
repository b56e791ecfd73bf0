use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Domain(String),

    /// The level lies below the bound's validity threshold.
    #[error("{bound} not applicable at v = {v}: below threshold {threshold}")]
    BelowThreshold {
        bound: &'static str,
        v: f64,
        threshold: f64,
    },

    #[error("{bound} not applicable at v = {v}: above upper limit {limit}")]
    AboveLimit {
        bound: &'static str,
        v: f64,
        limit: f64,
    },

    /// A structural hypothesis of the bound fails (regime, size condition, ...).
    #[error("{bound} not applicable: {condition}")]
    Condition {
        bound: &'static str,
        condition: String,
    },

    #[error("state space of {states} multinomial outcomes exceeds {limit}; use Monte Carlo")]
    StateSpaceTooLarge { states: f64, limit: f64 },

    #[error("invalid config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for the "bound not applicable" family of errors.
    pub fn is_not_applicable(&self) -> bool {
        matches!(
            self,
            Error::BelowThreshold { .. } | Error::AboveLimit { .. } | Error::Condition { .. }
        )
    }
}
