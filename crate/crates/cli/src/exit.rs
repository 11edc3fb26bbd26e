use hkz_core::Error;

/// Process exit codes.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Code {
    Verification = 1,
    Parse = 2,
    Invalid = 3,
    Unsupported = 4,
}

#[derive(Debug)]
pub struct Failure {
    pub code: Code,
    pub message: String,
}

impl Failure {
    pub fn new(code: Code, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(Code::Invalid, message)
    }

    /// Verification failed; the report has already been printed.
    pub fn verification(message: impl Into<String>) -> Self {
        Self::new(Code::Verification, message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. } | Error::Empty => Code::Parse,
            Error::RankTooLarge { .. }
            | Error::HermiteConstantUnknown(_)
            | Error::BoundNotApplicable { .. }
            | Error::ExactValueConjectural(_) => Code::Unsupported,
            Error::BoundViolation { .. } | Error::NotHkzReduced(_) => Code::Verification,
            _ => Code::Invalid,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::invalid(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::invalid(e.to_string())
    }
}
