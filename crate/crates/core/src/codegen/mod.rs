//! Model-to-artifact transformation. The reference backend lowers each
//! configuration to a replayable `.mlqplan` document.

pub mod plan;
mod vm;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::diag::{self, Diagnostic};
use crate::metamodel::ResolvedModel;
use crate::runtime::{Network, RunOptions, RuntimeError, Trace};
use crate::validate::{apply_automl_defaults, check, needs_configuration};

pub use plan::{load_plan, lower, lower_chart, ExecutionPlan, Instr, PlanError, MAGIC};
pub use vm::PlanEngine;

pub const MANIFEST: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: String,
    pub content: String,
}

pub trait Backend {
    fn name(&self) -> &str;
    /// Artifacts for a validated model with AutoML defaults applied.
    fn emit(&self, model: &ResolvedModel) -> Result<Vec<Artifact>, String>;
}

pub struct PlanBackend;

impl Backend for PlanBackend {
    fn name(&self) -> &str {
        "plan"
    }

    fn emit(&self, model: &ResolvedModel) -> Result<Vec<Artifact>, String> {
        let mut out = Vec::new();
        for name in model.configurations.keys() {
            out.push(Artifact {
                path: format!("{name}.mlqplan"),
                content: lower(model, Some(name))?.serialize(),
            });
        }
        let manifest = manifest(&out);
        out.push(Artifact {
            path: MANIFEST.into(),
            content: manifest,
        });
        Ok(out)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    crate::runtime::trace::hex(&Sha256::digest(bytes))
}

/// `sha256sum`-style listing of artifacts.
pub fn manifest(artifacts: &[Artifact]) -> String {
    artifacts
        .iter()
        .map(|a| format!("{}  {}\n", sha256_hex(a.content.as_bytes()), a.path))
        .collect()
}

pub const BACKENDS: [&str; 1] = ["plan"];

pub fn backend(name: &str) -> Option<Box<dyn Backend>> {
    match name {
        "plan" => Some(Box::new(PlanBackend)),
        _ => None,
    }
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("model is not valid")]
    Invalid(Vec<Diagnostic>),
    #[error("unknown backend `{0}` (available: plan)")]
    UnknownBackend(String),
    #[error("backend failed: {0}")]
    Backend(String),
}

/// Re-checks the model, applies AutoML defaults and runs the named backend.
pub fn compile(model: &ResolvedModel, backend_name: &str) -> Result<Vec<Artifact>, CompileError> {
    let be = backend(backend_name).ok_or_else(|| CompileError::UnknownBackend(backend_name.into()))?;
    let (model, _) = apply_automl_defaults(model);
    let diags = check(&model, needs_configuration(&model));
    if diag::has_errors(&diags) {
        return Err(CompileError::Invalid(diags.into_iter().filter(Diagnostic::is_error).collect()));
    }
    be.emit(&model).map_err(CompileError::Backend)
}

/// Plan text of a single configuration.
pub fn compile_config(model: &ResolvedModel, config: &str) -> Result<String, CompileError> {
    let (model, _) = apply_automl_defaults(model);
    let diags = check(&model, true);
    if diag::has_errors(&diags) {
        return Err(CompileError::Invalid(diags.into_iter().filter(Diagnostic::is_error).collect()));
    }
    lower(&model, Some(config)).map(|p| p.serialize()).map_err(CompileError::Backend)
}

/// The resolved model in plan form: one document per configuration, or a
/// things-only document when there is none.
pub fn dump_resolved(model: &ResolvedModel) -> Result<String, String> {
    if model.configurations.is_empty() {
        return Ok(lower(model, None)?.serialize());
    }
    let mut out = String::new();
    for name in model.configurations.keys() {
        out.push_str(&lower(model, Some(name))?.serialize());
    }
    Ok(out)
}

/// Instantiates a loaded plan and runs step 0.
pub fn instantiate_plan(plan: ExecutionPlan, opts: RunOptions) -> Result<Network<PlanEngine>, RuntimeError> {
    Network::new(PlanEngine::new(plan), opts)
}

/// Runs a loaded plan to a stop condition.
pub fn replay(plan: ExecutionPlan, opts: RunOptions) -> Result<Trace, RuntimeError> {
    let mut net = instantiate_plan(plan, opts)?;
    net.run();
    Ok(net.into_trace())
}
