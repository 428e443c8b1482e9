use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside the domain of the model.
    #[error("{name} must be {requirement}, got {value}")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("invalid unit {0:?}: expected 1 to 16 bytes")]
    InvalidUnit(String),

    #[error("rate is zero, the principal never doubles")]
    NoDoubling,

    #[error("step budget of {max_steps} exhausted at t = {t}")]
    StepBudget { max_steps: usize, t: f64 },

    #[error("value exceeded the blow-up guard at t = {t}")]
    ValueOverflow { t: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("account {index} (balance {balance}) diverges at t = {blowup_time}, before t = {t}")]
    AccountBlowup {
        index: usize,
        balance: f64,
        blowup_time: f64,
        t: f64,
    },

    #[error("population is empty")]
    EmptyPopulation,

    #[error("competition needs at least two replicators, got {0}")]
    TooFewReplicators(usize),

    #[error("duplicate replicator label {0:?}")]
    DuplicateLabel(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, requirement: &'static str, value: f64) -> Self {
        Error::Domain {
            name,
            requirement,
            value,
        }
    }

    /// True for failures of the numerical machinery (as opposed to invalid input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepBudget { .. }
                | Error::StepUnderflow { .. }
                | Error::ValueOverflow { .. }
                | Error::AccountBlowup { .. }
        )
    }
}
