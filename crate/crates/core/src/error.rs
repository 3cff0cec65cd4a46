use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{count_name} = {numerator}*M/{denominator} is not an integer for M = {m}")]
    Divisibility {
        count_name: &'static str,
        numerator: usize,
        denominator: usize,
        m: usize,
    },

    #[error("fit window has {usable} usable point(s), at least 3 are required")]
    WindowTooSmall { usable: usize },

    #[error("denominator {which} vanishes for this parameter set")]
    DegenerateDenominator { which: &'static str },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
