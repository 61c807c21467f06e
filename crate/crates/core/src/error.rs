use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which user an outage quantity belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum User {
    /// Near user, decodes with (imperfect) SIC.
    Near,
    /// Far user, decodes directly and drives antenna selection.
    Far,
}

impl std::fmt::Display for User {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            User::Near => f.write_str("U1"),
            User::Far => f.write_str("U2"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("argument {value} is outside the domain of {op}")]
    Domain { op: &'static str, value: f64 },

    #[error("precision loss in {context}: magnitude ratio {ratio:.3e} exceeds the guard {guard:.1e}")]
    PrecisionLoss {
        context: &'static str,
        ratio: f64,
        guard: f64,
    },

    #[error("no asymptote for {user}: threshold margin {margin} is not positive")]
    InfeasibleThreshold { user: User, margin: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
