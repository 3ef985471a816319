//! Command-line front end: configuration ingestion, dispatch to the
//! simulation library, and deterministic serialisation of every result.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical failure.

pub mod args;
pub mod config;
pub mod exec;
pub mod output;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad invocation, missing or malformed files, out-of-range parameters.
    #[error("{0}")]
    Input(String),
    /// The solver failed during execution.
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

pub(crate) fn chain_error(e: seqlab_core::ChainError) -> CliError {
    use seqlab_core::ChainError::*;
    match e {
        NonConvergence { .. } | Stalled { .. } => CliError::Numeric(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

/// Cap the worker pool from `SEQLAB_THREADS` (default: available
/// parallelism). Safe to call repeatedly; only the first call builds the pool.
pub fn init_thread_pool() {
    if let Ok(v) = std::env::var("SEQLAB_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

/// Parse, validate and execute a full invocation.
pub fn run(cli: args::Cli) -> Result<output::Manifest, CliError> {
    init_thread_pool();
    let spec = args::parse_run_spec(cli)?;
    exec::execute(spec)
}
