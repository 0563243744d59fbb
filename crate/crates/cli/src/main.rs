//! `civicsim`: run, validate, sweep and summarise governance simulations.
//!
//! Exit codes: 0 success, 1 validation or I/O error, 2 tick budget exhausted
//! with proposals still undecided.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use civicsim_core::nadico::{parse_rules, Severity};
use civicsim_core::num::format_fixed;
use civicsim_core::scenario::{self, load_config, read_run, write_csv, Grid, Scenario};

#[derive(Debug, Parser)]
#[command(name = "civicsim", version, about = "Agent-based simulation of urban development governance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write metrics.jsonl, events.jsonl and result.json.
    Simulate {
        /// Scenario document (JSON).
        #[arg(long)]
        config: PathBuf,
        /// RNG seed; overrides the seed in the document.
        #[arg(long)]
        seed: u64,
        /// Tick budget; overrides the budget in the document.
        #[arg(long)]
        ticks: Option<u64>,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse a rule file and print per-line diagnostics to standard error.
    ValidateRules {
        /// Rule file, one statement per line.
        path: PathBuf,
    },
    /// Run every grid point for several seeds and write sweep.csv.
    Sweep {
        /// Base scenario document (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Grid document: {"axes": [{"path": "advocacy.lobby_gain", "values": [...]}]}.
        #[arg(long)]
        grid: PathBuf,
        /// Number of seeds per grid point, counting up from the document's seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Output directory for sweep.csv.
        #[arg(long)]
        out: PathBuf,
        /// Parallel runs (default: available parallelism).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print outcome, ticks to decision, revision rounds and final support
    /// share from a run directory.
    Summarize {
        /// Directory written by `simulate`.
        #[arg(long)]
        run: PathBuf,
    },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
    Ok(load_config(&text, &base_dir(path))?)
}

fn simulate(config: &Path, seed: u64, ticks: Option<u64>, out: &Path) -> Result<ExitCode, Failure> {
    let mut scenario = load(config)?;
    if let Some(t) = ticks {
        scenario.config.ticks = t;
        scenario = Scenario::from_config(scenario.config, &base_dir(config))?;
    }
    let output = scenario::run(&scenario, seed)?;
    output.write_to(out).map_err(|e| Failure(format!("cannot write to {}: {e}", out.display())))?;
    if output.result.budget_exhausted {
        eprintln!("tick budget of {} exhausted with undecided proposals", scenario.config.ticks);
        Ok(ExitCode::from(2))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn validate_rules(path: &Path) -> Result<ExitCode, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
    let file = parse_rules(&text);
    for d in &file.diagnostics {
        let level = match d.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        eprintln!("{}:{}:{}: {level}: {}", path.display(), d.line, d.column, d.message);
    }
    Ok(if file.has_errors() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn sweep(config: &Path, grid: &Path, seeds: u64, out: &Path, jobs: Option<usize>) -> Result<ExitCode, Failure> {
    let scenario = load(config)?;
    let grid_text = fs::read_to_string(grid).map_err(|e| Failure(format!("cannot read {}: {e}", grid.display())))?;
    let grid: Grid = serde_json::from_str(&grid_text).map_err(|e| Failure(format!("malformed grid: {e}")))?;
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let base_seed = scenario.config.seed;
    let seed_list: Vec<u64> = (0..seeds).map(|k| base_seed + k).collect();
    let rows = scenario::sweep(&scenario, &grid, &seed_list, jobs, &base_dir(config))?;
    fs::create_dir_all(out)?;
    let file = fs::File::create(out.join("sweep.csv"))?;
    write_csv(&rows, &grid, file)?;
    Ok(ExitCode::SUCCESS)
}

fn summarize(run: &Path) -> Result<ExitCode, Failure> {
    let summary = read_run(run)?;
    let r = &summary.result;
    println!("seed={}", r.seed);
    println!("config_hash={}", r.config_hash);
    println!("ticks_executed={}", r.ticks_executed);
    println!("budget_exhausted={}", r.budget_exhausted);
    for p in &r.proposals {
        let ttd = p.ticks_to_decision.map_or("none".to_string(), |t| t.to_string());
        println!(
            "proposal={} outcome={} ticks_to_decision={ttd} revision_rounds={}",
            p.proposal_id.0, p.outcome, p.revision_rounds
        );
    }
    let share = format_fixed(r.final_support_share);
    println!("final_support_share={share}");
    // The result file and the metrics stream are written independently, so a
    // disagreement means the directory was edited or truncated.
    match &summary.last_metrics {
        Some(m) if format_fixed(m.support_share) != share => Err(Failure(format!(
            "result.json reports support share {share} but the last metrics record has {}",
            format_fixed(m.support_share)
        ))),
        None if r.ticks_executed > 0 => Err(Failure("metrics.jsonl has no records".into())),
        _ => Ok(ExitCode::SUCCESS),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Simulate { config, seed, ticks, out } => simulate(config, *seed, *ticks, out),
        Command::ValidateRules { path } => validate_rules(path),
        Command::Sweep { config, grid, seeds, out, jobs } => sweep(config, grid, *seeds, out, *jobs),
        Command::Summarize { run } => summarize(run),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
