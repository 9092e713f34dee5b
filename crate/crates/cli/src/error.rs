use std::fmt;

use drmmm_core::Error;

/// Error class, printed as the line prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    Usage,
    Parse,
    Param,
    Model,
    Io,
    Verify,
}

impl ErrorCode {
    pub fn prefix(self) -> &'static str {
        match self {
            ErrorCode::Usage => "E_USAGE",
            ErrorCode::Parse => "E_PARSE",
            ErrorCode::Param => "E_PARAM",
            ErrorCode::Model => "E_MODEL",
            ErrorCode::Io => "E_IO",
            ErrorCode::Verify => "E_VERIFY",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCode::Verify => 1,
            ErrorCode::Usage | ErrorCode::Parse | ErrorCode::Param => 2,
            ErrorCode::Io => 3,
            ErrorCode::Model => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: ErrorCode,
    pub message: String,
}

impl CliError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

/// Always a single line.
impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let message = self.message.replace('\n', " ");
        write!(f, "{}: {}", self.code.prefix(), message.trim())
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::EvenModulus
            | Error::ModulusTooSmall
            | Error::ZeroModulus
            | Error::RadixOutOfRange(_)
            | Error::StagesOutOfRange(_)
            | Error::SpanTooWide(_)
            | Error::OperandTooWide { .. }
            | Error::OperandOutOfRange
            | Error::WindowOutOfRange(_)
            | Error::MergeUnsupported { .. }
            | Error::InvalidSchedule(_)
            | Error::IterationOutOfRange { .. }
            | Error::ZeroUpdateDelay
            | Error::CompressionTarget(_) => ErrorCode::Param,
            _ => ErrorCode::Model,
        };
        Self::new(code, e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
