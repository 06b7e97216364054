use std::fmt;
use std::process::ExitCode;

use kontsevich_cp2::Error;

/// Failure classes with a stable exit status.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flags or values; exit 1.
    Config(String),
    /// Reading or writing files; exit 2.
    Io(String),
    /// Outside the convergence region, or a check that did not converge; exit 3.
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::Domain(_) => 3,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => CliError::Config(e.to_string()),
            Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::TableFormat { .. } => {
                CliError::Io(e.to_string())
            }
            Error::Domain(_) | Error::SingularChart | Error::InternalConsistency(_) => {
                CliError::Domain(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_exit_classes() {
        let code = |e: Error| match CliError::from(e) {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::Domain(_) => 3,
        };
        assert_eq!(code(Error::InvalidArgument("x".into())), 1);
        assert_eq!(code(Error::TableFormat { line: 3, reason: "x".into() }), 2);
        assert_eq!(code(Error::Io(std::io::Error::other("x"))), 2);
        assert_eq!(code(Error::Domain("x".into())), 3);
        assert_eq!(code(Error::SingularChart), 3);
    }
}
