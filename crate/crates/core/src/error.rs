use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invalid codeword: {0}")]
    Codeword(String),

    #[error("coefficient overflow: {0}")]
    CoefficientOverflow(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("enumeration of {vectors} score vectors exceeds the budget of {budget}; use the Monte Carlo simulator instead")]
    BudgetExceeded { vectors: u128, budget: u128 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
