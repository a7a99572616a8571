use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("stationary distribution is not unique (reducible chain); supply one explicitly")]
    NonUniqueStationary,

    #[error("enumeration budget exceeded: needed {needed} units, budget is {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    #[error("window does not contain the requested arrivals (wanted {wanted} {side}, found {found})")]
    InsufficientArrivals {
        side: &'static str,
        wanted: usize,
        found: usize,
    },

    #[error("P(Y_0 = 1) must be positive")]
    InvalidTheta,

    #[error("operation requires a Markov x-model")]
    NotMarkov,

    #[error("lcm of B overflows")]
    LcmOverflow,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
