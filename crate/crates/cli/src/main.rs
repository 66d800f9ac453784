//! `spoke`: run the optimizer on registered test functions and analyse logs.
//!
//! Exit codes: 0 success, 1 I/O or other runtime error, 2 configuration
//! error, 3 objective failure.

mod report;
mod spec;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use spoke_core::acquisition::AcquisitionKind;
use spoke_core::functions::{registry, FunctionListing};
use spoke_core::reporting::write_history_csv_file;
use spoke_core::{optimize, OptimizeError, SurrogateSchedule};

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_OBJECTIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "spoke", version, about = "Surrogate-model-based optimization of black-box functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a registered function.
    Run(Box<RunArgs>),
    /// List the registered functions.
    Functions {
        /// Emit a JSON array instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Summarize an event log: incumbent, Spearman sensitivity, importance.
    Report {
        #[arg(long)]
        log: PathBuf,
        /// Comma-separated variable names for the rows.
        #[arg(long)]
        names: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

/// Flags override the corresponding keys of `--config`.
#[derive(Args, Default)]
pub struct RunArgs {
    /// Registered function name (see `spoke functions`).
    #[arg(long)]
    pub function: Option<String>,
    /// JSON run specification.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Per-dimension bounds, e.g. `-5:5,-5:5`.
    #[arg(long, allow_hyphen_values = true)]
    pub bounds: Option<String>,
    #[arg(long)]
    pub dims: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub n_initial: Option<usize>,
    /// Seed; falls back to the config file, then SPOKE_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(AcquisitionKind))]
    pub acquisition: Option<AcquisitionKind>,
    #[arg(long)]
    pub n_infill: Option<usize>,
    #[arg(long)]
    pub n_jobs: Option<usize>,
    #[arg(long)]
    pub eval_batch_size: Option<usize>,
    #[arg(long)]
    pub fun_repeats: Option<usize>,
    #[arg(long)]
    pub ocba_delta: Option<usize>,
    #[arg(long)]
    pub restart_after_n: Option<usize>,
    #[arg(long)]
    pub window_size: Option<usize>,
    /// Do not carry the incumbent into restart designs.
    #[arg(long)]
    pub no_inject_best: bool,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub max_time: Option<f64>,
    /// Comma-separated scalarization weights for multi-objective functions.
    #[arg(long)]
    pub weights: Option<String>,
    /// Noise standard deviation of `noisy_sphere`.
    #[arg(long)]
    pub noise_sd: Option<f64>,
    /// JSONL event log path.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// CSV history path.
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
    #[arg(long, short)]
    pub verbose: bool,
}

/// A point in the style `[a  b  c]`.
pub(crate) fn format_point(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:.8}")).collect();
    format!("[{}]", parts.join("  "))
}

/// Writes to stdout; a closed pipe (`spoke functions | head`) is not an error.
fn emit(text: &str) -> ExitCode {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => fail(EXIT_RUNTIME, e),
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn cmd_run(args: &RunArgs) -> ExitCode {
    let env_seed = match std::env::var("SPOKE_SEED") {
        Ok(s) => match s.trim().parse::<u64>() {
            Ok(v) => Some(v),
            Err(_) => return fail(EXIT_CONFIG, format!("SPOKE_SEED `{s}` is not an unsigned integer")),
        },
        Err(_) => None,
    };
    let r = match spec::resolve(args, env_seed) {
        Ok(r) => r,
        Err(msg) => return fail(EXIT_CONFIG, msg),
    };
    let result = match optimize(&r.objective, &r.space, &r.config, &mut SurrogateSchedule::default()) {
        Ok(res) => res,
        Err(e @ (OptimizeError::ObjectiveFailure { .. } | OptimizeError::WorkerFailure { .. })) => {
            if let (Some(path), Some(p)) = (&r.history, e.partial()) {
                // keep what was evaluated before the failure
                let _ = write_history_csv_file(path, &p.iterations, &p.x_history, &p.y_history);
            }
            return fail(EXIT_OBJECTIVE, e);
        }
        Err(e @ (OptimizeError::Config(_) | OptimizeError::Space(_) | OptimizeError::Design(_))) => {
            return fail(EXIT_CONFIG, e)
        }
        Err(e) => return fail(EXIT_RUNTIME, e),
    };
    if let Some(path) = &r.history {
        if let Err(e) = write_history_csv_file(path, &result.iterations, &result.x_history, &result.y_history) {
            return fail(EXIT_RUNTIME, e);
        }
    }
    if args.json {
        let out = json!({
            "function": r.objective.info().name,
            "fun": result.fun,
            "x": result.x,
            "nfev": result.nfev,
            "nit": result.nit,
            "success": result.success,
            "message": result.message,
            "refits": result.refits,
            "restarts": result.restarts,
            "seed": r.config.seed,
        });
        return emit(&format!("{out}\n"));
    }
    let mut text = format!(
        "Best value: {:.6}\nBest point: {}\nTotal evaluations: {}\n",
        result.fun,
        format_point(&result.x),
        result.nfev
    );
    if !result.restarts.is_empty() {
        text.push_str(&format!("Restarts: {}\n", result.restarts.len()));
    }
    emit(&text)
}

fn cmd_functions(json: bool) -> ExitCode {
    let listing: Vec<FunctionListing> = registry().iter().map(FunctionListing::from).collect();
    if json {
        return emit(&format!("{}\n", serde_json::to_string_pretty(&listing).expect("listing serializes")));
    }
    let mut text = format!("{:<18} {:>5} {:>5} {:>12}  bounds\n", "name", "dims", "arity", "optimum");
    for f in &listing {
        let dims = f.bounds.len();
        let optimum = f.optimum.map_or("-".to_owned(), |o| format!("{o}"));
        let (lo, hi) = f.bounds[0];
        let uniform = f.bounds.iter().all(|&b| b == (lo, hi));
        let bounds = if uniform {
            format!("[{lo}, {hi}]^{dims}")
        } else {
            "per-dimension (see --json)".to_owned()
        };
        text.push_str(&format!("{:<18} {:>5} {:>5} {:>12}  {bounds}\n", f.name, dims, f.arity, optimum));
    }
    emit(&text)
}

fn cmd_report(log: &Path, names: Option<&str>, json: bool) -> ExitCode {
    let names = names.map(|n| n.split(',').map(|s| s.trim().to_owned()).collect());
    let rep = match report::build(log, names) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_RUNTIME, e),
    };
    if json {
        emit(&format!("{}\n", serde_json::to_string_pretty(&rep).expect("report serializes")))
    } else {
        emit(&report::render(&rep))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let verbose = matches!(&cli.command, Command::Run(a) if a.verbose);
    let level = if verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Functions { json } => cmd_functions(*json),
        Command::Report { log, names, json } => cmd_report(log, names.as_deref(), *json),
    }
}
