//! Command failures and their process exit codes.

use std::fmt;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ExitCode {
    /// Invalid configuration, parameter or scene.
    Config = 1,
    /// Input file missing, unreadable or unparsable.
    Input = 2,
    /// Image, calibration or mask dimensions disagree.
    Mismatch = 3,
    /// Mask manifest violates the exchange format.
    Manifest = 4,
    /// Prediction and ground-truth manifests describe different frames.
    FrameMismatch = 5,
    /// An output file could not be written.
    Output = 6,
    /// Command-line usage error.
    Usage = 64,
}

#[derive(Debug)]
pub struct CliError {
    pub code: ExitCode,
    pub message: String,
}

impl CliError {
    pub fn new(code: ExitCode, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ExitCode::Config, message)
    }

    pub fn input(message: impl fmt::Display) -> Self {
        Self::new(ExitCode::Input, message.to_string())
    }

    pub fn output(message: impl fmt::Display) -> Self {
        Self::new(ExitCode::Output, message.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<branchdepth::Error> for CliError {
    fn from(e: branchdepth::Error) -> Self {
        use branchdepth::Error as E;
        let code = match &e {
            E::Io { .. } | E::Image { .. } | E::Json { .. } | E::Format(_) => ExitCode::Input,
            E::Shape(_) | E::Calibration(_) => ExitCode::Mismatch,
            E::Manifest(_) => ExitCode::Manifest,
            _ => ExitCode::Config,
        };
        Self::new(code, e.to_string())
    }
}
