//! Figure data and verification reports for the θ-TMSS family.
//!
//! The binary `tmss` is a thin wrapper over [`run`]; the command functions in
//! [`commands`] are public so tests can call them without spawning a process.

// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{Cli, Command, Format, RawConfig, RunConfig};
pub use output::{Report, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] tmss_core::Error),
}

impl CliError {
    /// Process exit status for this error (1 is reserved for failed checks).
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Table(Table),
    Report(Report),
}

impl Output {
    /// `false` only for reports with a failing case.
    pub fn passed(&self) -> bool {
        match self {
            Output::Table(_) => true,
            Output::Report(r) => r.pass,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match self {
            Output::Table(t) => t.render(format),
            // Reports are always JSON.
            Output::Report(r) => r.to_json(),
        }
    }
}

/// Runs the configured command on a pool of `cfg.threads` workers (rayon's
/// default when unset).
pub fn execute(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    pool.install(|| commands::dispatch(cfg))
}

/// Resolves the config, runs, writes the output and returns whether every
/// check passed.
pub fn run(cli: Cli) -> Result<bool, CliError> {
    let cfg = RunConfig::resolve(cli.command, cli.flags)?;
    let out = execute(&cfg)?;
    let text = out.render(cfg.format);
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        })?,
        None => print!("{text}"),
    }
    Ok(out.passed())
}
