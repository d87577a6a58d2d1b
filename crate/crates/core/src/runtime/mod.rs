//! Deterministic simulation of a configuration: instances, connectors, one
//! global FIFO queue, and data-analytics actions dispatched to `mlq_ml`.

mod interp;
pub mod layout;
mod network;
pub mod trace;
pub mod value;

use std::path::PathBuf;

use thiserror::Error;

use crate::metamodel::ResolvedModel;

pub use interp::Interpreter;
pub use layout::Layout;
pub use network::{Block, Context, Engine, Network, RunOptions, TimeSource, EVENTLESS_LIMIT};
pub use trace::{EventKind, Trace, TraceEvent};

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("{0}")]
    Eval(String),
    #[error("{0}")]
    Setup(String),
    #[error("dataset root {} is not a directory", .0.display())]
    MissingRoot(PathBuf),
    #[error(transparent)]
    Data(#[from] mlq_ml::DataError),
    #[error(transparent)]
    Ml(#[from] mlq_ml::MlError),
    #[error("eventless transitions did not settle after {0} firings")]
    Livelock(usize),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

/// Builds configuration `config` of a validated model and runs step 0.
pub fn instantiate(model: &ResolvedModel, config: &str, opts: RunOptions) -> Result<Network<Interpreter>, RuntimeError> {
    Network::new(Interpreter::new(model, config)?, opts)
}

/// Instantiates and runs to a stop condition.
pub fn interpret(model: &ResolvedModel, config: &str, opts: RunOptions) -> Result<Trace, RuntimeError> {
    let mut net = instantiate(model, config, opts)?;
    net.run();
    Ok(net.into_trace())
}
