use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Schema violations, failed preconditions and unusable paths.
    #[error("config error: {0}")]
    Config(String),
    /// A numerical routine declined to produce a value.
    #[error("numerical refusal in {op}: {msg}")]
    Refusal { op: &'static str, msg: String },
    /// Some verification suite did not pass.
    #[error("{0} verification suite(s) failed")]
    SuiteFailure(usize),
}

impl CliError {
    pub fn refusal(op: &'static str, e: impl std::fmt::Display) -> CliError {
        CliError::Refusal { op, msg: e.to_string() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::SuiteFailure(_) => 1,
            CliError::Config(_) => 2,
            CliError::Refusal { .. } => 3,
        }
    }
}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> ExitCode {
        ExitCode::from(e.exit_code())
    }
}
