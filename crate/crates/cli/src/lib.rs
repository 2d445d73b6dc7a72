//! Config-driven front end for `qherm-core`.
//!
//! A run reads a JSON [`config::RunConfig`], dispatches to one task in
//! [`tasks`] and produces a [`table::Report`]: the result table plus the
//! self-checks the task judged against its fixed tolerances.

use std::fmt::Display;

use thiserror::Error;

use qherm_core::QhermError;

pub mod config;
pub mod fit;
pub mod table;
pub mod tasks;

use config::{RunConfig, TaskKind};
use table::Report;

/// Exit status for a bad config or bad arguments.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for a numerical failure or a failed self-check.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error(transparent)]
    Numeric(QhermError),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(key: impl Display, err: impl Display) -> Self {
        CliError::Config {
            key: key.to_string(),
            msg: err.to_string(),
        }
    }

    pub fn config_msg(key: impl Display, msg: impl Into<String>) -> Self {
        CliError::Config {
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

/// Input-validation failures surface as config errors, everything else as
/// numerical ones.
impl From<QhermError> for CliError {
    fn from(e: QhermError) -> Self {
        match e {
            QhermError::InvalidBasis { .. }
            | QhermError::MarginOutOfRange { .. }
            | QhermError::NonPositive { .. }
            | QhermError::EpsilonOutOfRange { .. }
            | QhermError::UntrustedLevel { .. }
            | QhermError::DegreeTooHigh { .. }
            | QhermError::NotUnit { .. }
            | QhermError::BadPulse { .. } => CliError::config("params", e),
            other => CliError::Numeric(other),
        }
    }
}

/// Run `task` on `config`. The task named inside the config, if any, must
/// agree with `task`.
pub fn run(config: &serde_json::Value, task: TaskKind) -> Result<Report, CliError> {
    let parsed = RunConfig::from_value(config.clone())?;
    if let Some(named) = parsed.task {
        if named != task {
            return Err(CliError::config_msg(
                "task",
                format!(
                    "config is for `{}` but `{}` was requested",
                    named.name(),
                    task.name()
                ),
            ));
        }
    }
    let out = tasks::run_task(task, &parsed)?;
    Ok(Report {
        config: config.clone(),
        results: out.table,
        checks: out.checks,
    })
}
