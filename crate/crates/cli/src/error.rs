use std::path::Path;

use pedsim::filterpipe::FilterError;
use pedsim::io::FormatError;
use pedsim::metrics::MetricsError;
use pedsim::retarget::RetargetError;
use pedsim::scenario::ScenarioError;
use pedsim::trajectory::TrajectoryError;
use thiserror::Error;

/// Exit status 1 for bad input, 2 for failures while processing valid input.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Processing(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Processing(_) => 2,
        }
    }

    pub fn in_file(self, path: &Path) -> Self {
        let ctx = |m: String| format!("{}: {m}", path.display());
        match self {
            CliError::Validation(m) => CliError::Validation(ctx(m)),
            CliError::Processing(m) => CliError::Processing(ctx(m)),
        }
    }
}

fn describe_format(e: &FormatError) -> String {
    match e {
        FormatError::Parse { field, frame: Some(f), message } => format!("frame {f}: field `{field}`: {message}"),
        FormatError::Parse { field, message, .. } => format!("field `{field}`: {message}"),
        FormatError::Validation { code, message } => format!("{code}: {message}"),
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Validation(describe_format(&e))
    }
}

impl From<FilterError> for CliError {
    fn from(e: FilterError) -> Self {
        CliError::Validation(format!("{}: {e}", e.code()))
    }
}

impl From<TrajectoryError> for CliError {
    fn from(e: TrajectoryError) -> Self {
        CliError::Validation(format!("{}: {e}", e.code()))
    }
}

impl From<RetargetError> for CliError {
    fn from(e: RetargetError) -> Self {
        CliError::Validation(format!("{}: {e}", e.code()))
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Planner(p) => CliError::Processing(p.to_string()),
            other => CliError::Validation(format!("{}: {other}", other.code())),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::ZeroDistance => CliError::Processing(e.to_string()),
            other => CliError::Validation(format!("{}: {other}", other.code())),
        }
    }
}
