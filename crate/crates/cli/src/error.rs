use std::fmt;
use std::path::Path;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Verification,
    Config,
    Io,
}

#[derive(Debug, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn verification(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Verification,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Config,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self {
            kind: ErrorKind::Io,
            message: format!("{}: {err}", path.display()),
        }
    }

    /// 1 verification failure, 2 bad configuration or arguments, 3 I/O.
    pub fn code(&self) -> u8 {
        match self.kind {
            ErrorKind::Verification => 1,
            ErrorKind::Config => 2,
            ErrorKind::Io => 3,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<hybrid_ntt::Error> for CliError {
    fn from(e: hybrid_ntt::Error) -> Self {
        use hybrid_ntt::Error;
        let kind = match e {
            Error::Io(_) | Error::Format(_) => ErrorKind::Io,
            _ => ErrorKind::Config,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}
