//! `gridlock` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 validation
//! failure, 3 numerical divergence.

mod config;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gridlock::harness::{
    assess, default_factory, run, run_cell, suite_cells, CellResult, HarnessError, RunConfig, Suite,
};
use gridlock::small_signal::{bode_magnitude, build_tf};
use gridlock::validation::Validator;
use rayon::prelude::*;
use serde_json::{json, Value};

use config::Config;
use output::{metrics_rows, num, trace_csv, Outputs, BODE_HEADER, METRICS_HEADER};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Divergence(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Divergence(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Validation(m) | CliError::Divergence(m) => {
                f.write_str(m)
            }
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        if e.is_divergence() {
            CliError::Divergence(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(
    name = "gridlock",
    version,
    about = "SRF-FLL grid synchronization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write trace.csv
    Run(Common),
    /// Run the reference sweep suites and write per-cell traces plus metrics.csv
    Sweep(Common),
    /// Tabulate closed-loop magnitude responses into bode.csv
    Bode(Common),
    /// Run the acceptance criteria and print a pass/fail table
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config value by dotted path, e.g. gains.d=753.98
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Run only the named acceptance criterion (validate)
    #[arg(long)]
    criterion: Option<String>,
}

impl Common {
    fn out_dir(&self) -> Result<&Path, CliError> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Usage("--out <dir> is required".into()))
    }

    fn load(&self, require_config: bool) -> Result<(Config, Value), CliError> {
        if require_config && self.config.is_none() {
            return Err(CliError::Usage("--config <path> is required".into()));
        }
        config::load(self.config.as_deref(), &self.overrides)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Bode(args) => cmd_bode(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gridlock: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn meta(command: &str, doc: &Value) -> String {
    let mut text = serde_json::to_string_pretty(&json!({
        "command": command,
        "gridlock_version": env!("CARGO_PKG_VERSION"),
        "config": doc,
    }))
    .expect("JSON values serialize");
    text.push('\n');
    text
}

fn cmd_run(args: &Common) -> Result<(), CliError> {
    let out_dir = args.out_dir()?;
    let (config, doc) = args.load(true)?;
    let scenario = config
        .scenario
        .ok_or_else(|| CliError::Usage("config has no scenario".into()))?;
    let mut run_config = RunConfig::new(config.estimator, config.gains, scenario);
    run_config.warmup = config.warmup_s;
    let trace = run(&run_config)?;

    let last = trace.samples.last().expect("scenarios have samples");
    println!(
        "{}: {} samples, final omega_hat {:.6} rad/s (true {:.6})",
        config.estimator,
        trace.len(),
        last.out.omega_hat,
        last.truth.omega
    );
    let mut files = Outputs::default();
    files.add("trace.csv", trace_csv(&trace));
    files.add("run_meta.json", meta("run", &doc));
    files.commit(out_dir)
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("GRIDLOCK_THREADS") {
        let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            CliError::Usage(format!(
                "GRIDLOCK_THREADS must be a positive integer, got '{raw}'"
            ))
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))
}

/// Suite column of metrics.csv; the disturbance suite is split by scenario.
fn suite_column(result: &CellResult) -> String {
    match result.cell.suite {
        Suite::DisturbanceFig8 => {
            format!("{}:{}", result.cell.suite, result.cell.disturbance.label())
        }
        s => s.to_string(),
    }
}

fn cmd_sweep(args: &Common) -> Result<(), CliError> {
    let out_dir = args.out_dir()?;
    let (config, doc) = args.load(true)?;
    let suites = config
        .suite
        .as_ref()
        .ok_or_else(|| CliError::Usage("config names no suite".into()))?
        .suites();
    let theta0_hat = config.gains.theta0_hat;
    let pool = thread_pool()?;

    let mut files = Outputs::default();
    let mut metrics = format!("{METRICS_HEADER}\n");
    let mut failed = Vec::new();
    for suite in suites {
        let cells = suite_cells(suite, theta0_hat);
        let results: Vec<CellResult> = pool.install(|| {
            cells
                .par_iter()
                .map(|cell| {
                    run_cell(cell, &default_factory).map_err(|e| match e {
                        HarnessError::Diverged { .. } => {
                            CliError::Divergence(format!("cell {}: {e}", cell.name()))
                        }
                        other => CliError::from(other),
                    })
                })
                .collect::<Result<_, _>>()
        })?;
        for r in &results {
            metrics_rows(&mut metrics, &suite_column(r), r);
            let name = format!(
                "{}_{}_d{}k_{}.csv",
                suite,
                r.cell.estimator(),
                r.cell.d_over_k,
                r.cell.disturbance.label()
            );
            files.add(Path::new("traces").join(name), trace_csv(&r.trace));
        }
        for check in assess(suite, &results) {
            println!(
                "{suite:<18} {:<4} {}: {}",
                if check.passed { "ok" } else { "FAIL" },
                check.name,
                check.detail
            );
            if !check.passed {
                failed.push(format!("{suite}/{}", check.name));
            }
        }
    }
    files.add("metrics.csv", metrics);
    files.add("run_meta.json", meta("sweep", &doc));
    files.commit(out_dir)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "suite checks failed: {}",
            failed.join(", ")
        )))
    }
}

fn cmd_bode(args: &Common) -> Result<(), CliError> {
    let out_dir = args.out_dir()?;
    let (config, doc) = args.load(true)?;
    let bode = config
        .bode
        .ok_or_else(|| CliError::Usage("config has no bode section".into()))?;
    if bode.kinds.is_empty() {
        return Err(CliError::Usage("bode.kinds is empty".into()));
    }
    let omegas = bode.grid()?;
    let mut csv = format!("{BODE_HEADER}\n");
    for kind in &bode.kinds {
        let tf = build_tf(*kind, bode.k, bode.d).map_err(|e| CliError::Usage(e.to_string()))?;
        let mags = bode_magnitude(&tf, &omegas).map_err(|e| CliError::Usage(e.to_string()))?;
        for (w, m) in omegas.iter().zip(mags) {
            csv.push_str(&format!(
                "{},{kind},{},{}\n",
                num(*w),
                num(m),
                num(20.0 * m.log10())
            ));
        }
    }
    let mut files = Outputs::default();
    files.add("bode.csv", csv);
    files.add("run_meta.json", meta("bode", &doc));
    files.commit(out_dir)
}

fn cmd_validate(args: &Common) -> Result<(), CliError> {
    // Criteria carry their own scenarios; a config is accepted but unused.
    let (_, doc) = args.load(false)?;
    let validator = Validator::default();
    let names: Vec<&str> = match &args.criterion {
        Some(name) => {
            if !Validator::names().any(|n| n == name) {
                let known: Vec<_> = Validator::names().collect();
                return Err(CliError::Usage(format!(
                    "unknown criterion '{name}' (known: {})",
                    known.join(", ")
                )));
            }
            vec![name.as_str()]
        }
        None => Validator::names().collect(),
    };

    let mut failed = Vec::new();
    let mut table = String::from("criterion,name,passed\n");
    for name in names {
        let outcome = validator.run(name)?.expect("name was checked");
        println!(
            "{:>2}  {:<24} {}",
            outcome.index,
            outcome.name,
            if outcome.passed { "PASS" } else { "FAIL" }
        );
        for line in &outcome.details {
            println!("      {line}");
        }
        table.push_str(&format!(
            "{},{},{}\n",
            outcome.index, outcome.name, outcome.passed
        ));
        if !outcome.passed {
            failed.push(outcome.name);
        }
    }
    if let Some(dir) = &args.out {
        let mut files = Outputs::default();
        files.add("validation.csv", table);
        files.add("run_meta.json", meta("validate", &doc));
        files.commit(dir)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "failed criteria: {}",
            failed.join(", ")
        )))
    }
}
