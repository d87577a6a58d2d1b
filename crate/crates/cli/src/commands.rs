use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use mlq_core::codegen::{self, load_plan, CompileError, PlanEngine};
use mlq_core::diag::{self, Diagnostic};
use mlq_core::metamodel::{resolve_with_diagnostics, ResolvedModel};
use mlq_core::runtime::{EventKind, Interpreter, Network, RunOptions, RuntimeError, TimeSource, Trace};
use mlq_core::syntax::ast::AstUnit;
use mlq_core::syntax::{emit_canonical, parse_with_diagnostics};
use mlq_core::validate::{apply_automl_defaults, check, needs_configuration};
use mlq_ml::{DataError, MlError, SynthOptions};

use crate::{DiagFormat, RunArgs};

fn fail() -> Result<ExitCode> {
    Ok(ExitCode::from(1))
}

fn report(diags: &[Diagnostic], format: DiagFormat) {
    for d in diags {
        match format {
            DiagFormat::Human => eprintln!("{}", d.human()),
            DiagFormat::Records => eprintln!("{}", d.record()),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Parses and merges every file; `None` after reporting syntax errors.
fn parse_all(paths: &[PathBuf], format: DiagFormat) -> Result<Option<AstUnit>> {
    let mut units = Vec::new();
    let mut diags = Vec::new();
    for p in paths {
        let src = read(p)?;
        let (unit, d) = parse_with_diagnostics(&src, &p.display().to_string());
        units.push(unit);
        diags.extend(d);
    }
    report(&diags, format);
    Ok((!diag::has_errors(&diags)).then(|| AstUnit::merge(units)))
}

fn front_end(paths: &[PathBuf], format: DiagFormat) -> Result<Option<ResolvedModel>> {
    let Some(unit) = parse_all(paths, format)? else {
        return Ok(None);
    };
    let (model, diags) = resolve_with_diagnostics(&unit);
    report(&diags, format);
    Ok((!diag::has_errors(&diags)).then_some(model))
}

pub fn parse(paths: &[PathBuf], emit: bool, format: DiagFormat) -> Result<ExitCode> {
    let mut failed = false;
    for p in paths {
        let src = read(p)?;
        let (unit, diags) = parse_with_diagnostics(&src, &p.display().to_string());
        report(&diags, format);
        if diag::has_errors(&diags) {
            failed = true;
        } else if emit {
            print!("{}", emit_canonical(&unit));
        }
    }
    if failed {
        fail()
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

pub fn validate(paths: &[PathBuf], notes: bool, strict: bool, dump: bool, format: DiagFormat) -> Result<ExitCode> {
    let Some(model) = front_end(paths, format)? else {
        return fail();
    };
    let (model, automl) = apply_automl_defaults(&model);
    if notes {
        report(&automl, format);
    }
    let diags = check(&model, needs_configuration(&model));
    report(&diags, format);
    if diag::has_errors(&diags) {
        return fail();
    }
    if dump {
        match codegen::dump_resolved(&model) {
            Ok(text) => print!("{text}"),
            Err(e) => {
                eprintln!("mlq: {e}");
                return fail();
            }
        }
    }
    if strict && diags.iter().any(|d| d.severity == diag::Severity::Warning) {
        return fail();
    }
    Ok(ExitCode::SUCCESS)
}

pub fn compile(paths: &[PathBuf], backend: &str, out: &Path, format: DiagFormat) -> Result<ExitCode> {
    let Some(model) = front_end(paths, format)? else {
        return fail();
    };
    let artifacts = match codegen::compile(&model, backend) {
        Ok(a) => a,
        Err(CompileError::Invalid(diags)) => {
            report(&diags, format);
            return fail();
        }
        Err(e) => {
            eprintln!("mlq: {e}");
            return fail();
        }
    };
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    for a in &artifacts {
        let path = out.join(&a.path);
        fs::write(&path, &a.content).with_context(|| format!("cannot write {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn time_source() -> Result<TimeSource> {
    match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(v) => v
            .trim()
            .parse::<i64>()
            .ok()
            .and_then(TimeSource::from_epoch)
            .with_context(|| format!("SOURCE_DATE_EPOCH `{v}` is not a Unix timestamp")),
        Err(_) => Ok(TimeSource::Wall),
    }
}

fn is_environmental(e: &RuntimeError) -> bool {
    matches!(
        e,
        RuntimeError::MissingRoot(_)
            | RuntimeError::Io { .. }
            | RuntimeError::Data(DataError::Unreadable { .. } | DataError::Unwritable { .. })
            | RuntimeError::Ml(MlError::Io { .. } | MlError::Data(DataError::Unreadable { .. }))
    )
}

fn print_log(trace: &Trace) {
    for e in &trace.events {
        match e.kind {
            EventKind::Print => println!("{}", e.str("text").unwrap_or_default()),
            EventKind::Error => eprintln!("error: {}: {}", e.instance, e.str("message").unwrap_or_default()),
            _ => {}
        }
    }
}

pub fn run(args: &RunArgs) -> Result<ExitCode> {
    let first = &args.paths[0];
    let is_plan = args.paths.len() == 1 && (first.extension().is_some_and(|x| x == "mlqplan") || {
        fs::read_to_string(first).map(|t| t.starts_with("MLQPLAN/")).unwrap_or(false)
    });
    let default_root = if is_plan {
        None
    } else {
        first.parent().map(|p| if p.as_os_str().is_empty() { PathBuf::from(".") } else { p.to_path_buf() })
    };
    let opts = RunOptions {
        seed: args.seed,
        max_steps: args.max_steps,
        dataset_root: args.dataset_root.clone().or(default_root),
        test_size: args.test_size,
        time: time_source()?,
        model_dir: args.model_out.clone(),
    };
    let started = if is_plan {
        let text = read(first)?;
        let plan = match load_plan(&text) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("mlq: {}: {e}", first.display());
                return fail();
            }
        };
        Network::new(PlanEngine::new(plan), opts).map(Runner::Plan)
    } else {
        let Some(model) = front_end(&args.paths, args.diag.diag_format)? else {
            return fail();
        };
        let (model, _) = apply_automl_defaults(&model);
        let diags = check(&model, true);
        report(&diags, args.diag.diag_format);
        if diag::has_errors(&diags) {
            return fail();
        }
        let config = match (&args.config, model.configurations.len()) {
            (Some(c), _) => c.clone(),
            (None, 1) => model.configurations.keys().next().cloned().unwrap_or_default(),
            (None, _) => {
                let names: Vec<&str> = model.configurations.keys().map(String::as_str).collect();
                eprintln!("mlq: several configurations ({}); choose one with --config", names.join(", "));
                return fail();
            }
        };
        Interpreter::new(&model, &config)
            .and_then(|i| Network::new(i, opts))
            .map(Runner::Model)
    };
    let trace = match started {
        Ok(mut r) => r.run(),
        Err(e) if is_environmental(&e) => return Err(e.into()),
        Err(e) => {
            eprintln!("mlq: {e}");
            return fail();
        }
    };
    print_log(&trace);
    if let Some(path) = &args.trace_out {
        fs::write(path, trace.to_jsonl()).with_context(|| format!("cannot write {}", path.display()))?;
    }
    println!(
        "stopped: {} after {} events",
        trace.stop_reason().unwrap_or("unknown"),
        trace.events.len()
    );
    if trace.has_errors() {
        fail()
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

enum Runner {
    Model(Network<Interpreter>),
    Plan(Network<PlanEngine>),
}

impl Runner {
    fn run(&mut self) -> Trace {
        match self {
            Runner::Model(n) => {
                n.run();
                n.trace()
            }
            Runner::Plan(n) => {
                n.run();
                n.trace()
            }
        }
    }
}

pub fn gen_data(
    preset: &str,
    seed: u64,
    rows: usize,
    out: Option<&Path>,
    timestamps: bool,
    unlabeled: bool,
) -> Result<ExitCode> {
    let csv = match mlq_ml::gen_synthetic(preset, seed, rows, SynthOptions { timestamps, unlabeled }) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("mlq: {e}");
            return fail();
        }
    };
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            }
            fs::write(path, csv).with_context(|| format!("cannot write {}", path.display()))?
        }
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

pub fn eval(model: &Path, data: &Path) -> Result<ExitCode> {
    let text = read(model)?;
    let model = match mlq_ml::deserialize_model(&text) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("mlq: {}: {e}", model.display());
            return fail();
        }
    };
    if !data.is_file() {
        anyhow::bail!("cannot read {}", data.display());
    }
    match mlq_ml::evaluate_file(&model, data) {
        Ok(m) => {
            println!("family: {}", model.family);
            for (k, v) in m.entries() {
                println!("{k}: {v}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(MlError::Data(e @ DataError::Unreadable { .. })) => Err(e.into()),
        Err(e) => {
            eprintln!("mlq: {e}");
            fail()
        }
    }
}
