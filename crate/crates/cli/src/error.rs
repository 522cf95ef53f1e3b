use std::fmt;

use uav_aoi_core::agents::{AutoencoderError, DqnError};
use uav_aoi_core::enumerator::EnumerationError;
use uav_aoi_core::qp::SolveError;

use crate::checkpoint::CheckpointError;
use crate::scenario_io::ScenarioIoError;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Success = 0,
    Usage = 1,
    /// Infeasible schedule or solver failure.
    Solver = 2,
    MissingArtifact = 3,
    Budget = 4,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub error: anyhow::Error,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn new(kind: ExitKind, error: impl Into<anyhow::Error>) -> Self {
        CliError { kind, error: error.into() }
    }

    pub fn usage(msg: impl fmt::Display) -> Self {
        CliError::new(ExitKind::Usage, anyhow::anyhow!("{msg}"))
    }
}

/// Picks the exit code from the innermost known error in the chain.
pub fn classify(error: anyhow::Error) -> CliError {
    if let Some(e) = error.downcast_ref::<CliError>() {
        return CliError { kind: e.kind, error: anyhow::anyhow!("{:#}", e.error) };
    }
    let mut kind = ExitKind::Usage;
    for cause in error.chain() {
        if let Some(e) = cause.downcast_ref::<ScenarioIoError>() {
            kind = if e.is_not_found() { ExitKind::MissingArtifact } else { ExitKind::Usage };
            break;
        }
        if cause.downcast_ref::<CheckpointError>().is_some() {
            kind = ExitKind::MissingArtifact;
            break;
        }
        if let Some(e) = cause.downcast_ref::<EnumerationError>() {
            kind = match e {
                EnumerationError::Solve(_) => ExitKind::Solver,
                _ => ExitKind::Budget,
            };
            break;
        }
        if cause.is::<SolveError>() || cause.is::<DqnError>() || cause.is::<AutoencoderError>() {
            kind = ExitKind::Solver;
            break;
        }
    }
    CliError { kind, error }
}
