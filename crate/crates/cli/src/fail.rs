use std::fmt;

use serde_json::json;
use urllc_core::{Error, ErrorClass};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::Io(_) => "config",
            CliError::Core(e) => match e.class() {
                ErrorClass::Config => "config",
                ErrorClass::Infeasible => "infeasible",
                ErrorClass::Numerical => "numerical",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class() {
            "infeasible" => 2,
            "numerical" => 3,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": { "class": self.class(), "code": self.exit_code(), "message": self.to_string() } })
            .to_string()
    }
}

pub fn required<T>(value: Option<T>, name: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("missing required parameter '{name}'")))
}
