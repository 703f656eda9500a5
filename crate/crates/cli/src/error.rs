use std::fmt;

use arpsim::{IntegrationError, ModelError, ParamError, RidgeError};

/// Exit code for invalid flags or unreadable inputs.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for integrator failures.
pub const EXIT_INTEGRATION: i32 = 3;
/// Exit code when too few rows have an interior maximum to fit a ridge.
pub const EXIT_RIDGE: i32 = 4;
/// Exit code for failures writing output.
pub const EXIT_IO: i32 = 1;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Command-line spelling of a parameter name used in library errors.
pub fn flag_for(name: &str) -> String {
    match name {
        "tau_c" => "--tauc".into(),
        "samples" | "sample_count" => "--samples".into(),
        other => format!("--{}", other.replace('_', "-")),
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        Self::usage(format!("invalid {}: {e}", flag_for(e.name())))
    }
}

impl From<IntegrationError> for CliError {
    fn from(e: IntegrationError) -> Self {
        match e {
            IntegrationError::Settings(p) => p.into(),
            other => Self {
                code: EXIT_INTEGRATION,
                message: format!("integration failed: {other}"),
            },
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Param(p) => p.into(),
            ModelError::ZeroAmplitude => Self::usage(format!("invalid --omega1: {e}")),
            ModelError::NoInteriorMaximum => Self::usage(format!("invalid --tauc: {e}")),
        }
    }
}

impl From<RidgeError> for CliError {
    fn from(e: RidgeError) -> Self {
        Self {
            code: EXIT_RIDGE,
            message: format!("ridge fit failed: {e}"),
        }
    }
}
