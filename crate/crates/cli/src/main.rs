//! `mlq`: parse, validate, compile, run and evaluate `.mlq` models.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "mlq", version, about = "Toolchain for ML-enhanced IoT statechart models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DiagFormat {
    Human,
    Records,
}

#[derive(Args)]
pub struct DiagArgs {
    /// How diagnostics are written to standard error.
    #[arg(long, value_enum, default_value = "human")]
    pub diag_format: DiagFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Parse model files and report syntax errors.
    Parse {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Print each file in canonical form.
        #[arg(long)]
        emit_canonical: bool,
        #[command(flatten)]
        diag: DiagArgs,
    },
    /// Resolve and check a model made of one or more files.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Report the parameters AutoML fills in.
        #[arg(long)]
        automl_notes: bool,
        /// Treat warnings as failures.
        #[arg(long)]
        strict: bool,
        /// Print the resolved model in plan form.
        #[arg(long)]
        dump_resolved: bool,
        #[command(flatten)]
        diag: DiagArgs,
    },
    /// Lower a valid model to artifacts.
    Compile {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, default_value = "plan")]
        backend: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        diag: DiagArgs,
    },
    /// Simulate a model, or replay a compiled `.mlqplan`.
    Run(RunArgs),
    /// Write a seeded synthetic dataset.
    GenData {
        /// line, separable-2d, smarthome-classify, smarthome-cluster or smarthome-regress.
        preset: String,
        #[arg(long, default_value_t = 10)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        rows: usize,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Prefix rows with timestamps.
        #[arg(long)]
        timestamps: bool,
        /// Leave out the label column.
        #[arg(long)]
        unlabeled: bool,
    },
    /// Score a trained model document against a CSV file.
    Eval {
        model: PathBuf,
        data: PathBuf,
    },
}

#[derive(Args)]
pub struct RunArgs {
    /// Model files, or a single `.mlqplan`.
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Configuration to run; may be omitted when there is only one.
    #[arg(long)]
    pub config: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub max_steps: u64,
    /// Write the trace as JSON lines.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    /// Base for relative dataset paths. Defaults to the first model file's
    /// directory, or the working directory for plans.
    #[arg(long, env = "MLQ_DATASET_ROOT")]
    pub dataset_root: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    pub test_size: f64,
    /// Directory for trained model documents.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    #[command(flatten)]
    pub diag: DiagArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Parse {
            paths,
            emit_canonical,
            diag,
        } => commands::parse(&paths, emit_canonical, diag.diag_format),
        Command::Validate {
            paths,
            automl_notes,
            strict,
            dump_resolved,
            diag,
        } => commands::validate(&paths, automl_notes, strict, dump_resolved, diag.diag_format),
        Command::Compile {
            paths,
            backend,
            out,
            diag,
        } => commands::compile(&paths, &backend, &out, diag.diag_format),
        Command::Run(args) => commands::run(&args),
        Command::GenData {
            preset,
            seed,
            rows,
            out,
            timestamps,
            unlabeled,
        } => commands::gen_data(&preset, seed, rows, out.as_deref(), timestamps, unlabeled),
        Command::Eval { model, data } => commands::eval(&model, &data),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mlq: {e:#}");
            ExitCode::from(2)
        }
    }
}
