use std::fmt;
use std::process::ExitCode;

use mgstab::linalg::LinalgError;
use mgstab::network::NetworkError;
use mgstab::sstate::LtiError;
use mgstab::stability::StabilityError;

/// A failure mapped to the process exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or invalid input files: exit 2.
    Input(String),
    /// Solver or numerical failure: exit 3.
    Numeric(String),
    /// A mode that must move cannot be reached by any input: exit 4.
    Uncontrollable(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Uncontrollable(_) => 4,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Uncontrollable(m) => write!(f, "uncontrollable: {m}"),
        }
    }
}

pub fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::DataLength { .. }
            | LinalgError::NotSquare { .. }
            | LinalgError::DimensionMismatch(_) => CliError::Input(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<LtiError> for CliError {
    fn from(e: LtiError) -> Self {
        match e {
            LtiError::Linalg(l) => l.into(),
            LtiError::SingularAlgebraicLoop => CliError::Numeric(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        match e {
            NetworkError::NoConvergence { .. } => CliError::Numeric(e.to_string()),
            NetworkError::Lti(l) => l.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<StabilityError> for CliError {
    fn from(e: StabilityError) -> Self {
        match e {
            StabilityError::Uncontrollable { .. } => CliError::Uncontrollable(e.to_string()),
            StabilityError::IllConditioned { .. } => CliError::Numeric(e.to_string()),
            StabilityError::Linalg(l) => l.into(),
            StabilityError::Lti(l) => l.into(),
            StabilityError::Network(n) => n.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}
