use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use naifs_pressure_cli::acceptance;
use naifs_pressure_cli::app::{self, RunError, EXIT_CHECKS, EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION};
use naifs_pressure_cli::cache::Cache;
use naifs_pressure_cli::config;
use naifs_pressure_cli::exec::Workers;
use naifs_pressure_cli::report::read_report;

#[derive(Parser)]
#[command(name = "naifs-pressure", version, about = "Pressure and entropy estimates for nonautonomous iterated function systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunOpts {
    /// Output directory; defaults to `output.directory` of the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to PRESSURE_WORKERS or the available cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Skip the result cache.
    #[arg(long)]
    no_cache: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task of one configuration.
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run the bundled acceptance suite.
    Check {
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run every combination listed in the `[sweep]` section.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Print the summary of a report file or output directory.
    Show { report: PathBuf },
}

fn workers(n: Option<usize>) -> Result<Workers, String> {
    match n {
        Some(n) => Workers::new(n),
        None => Workers::from_env(),
    }
}

fn fail(code: i32, msg: impl std::fmt::Display) -> i32 {
    eprintln!("{msg}");
    code
}

fn report_errors(e: &RunError) -> i32 {
    match e {
        RunError::Validation(errs) => {
            eprintln!("invalid configuration ({} problem{}):", errs.0.len(), if errs.0.len() == 1 { "" } else { "s" });
            for err in &errs.0 {
                eprintln!("  {err}");
            }
        }
        RunError::Io(msg) => eprintln!("error: {msg}"),
    }
    e.exit_code()
}

fn run_one(cfg: &config::Config, out: Option<&Path>, exec: &Workers, cache: &Cache) -> i32 {
    match app::execute(cfg, out, exec, cache) {
        Ok(outcome) => {
            for w in &outcome.meta.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", outcome.report.summary(Some(&outcome.meta)));
            println!("outputs in {}", outcome.out_dir.display());
            outcome.exit_code()
        }
        Err(e) => report_errors(&e),
    }
}

fn run(path: &Path, opts: &RunOpts) -> i32 {
    let cfg = match app::load(path) {
        Ok(c) => c,
        Err(e) => return report_errors(&e),
    };
    if !cfg.sweep.is_empty() {
        eprintln!("warning: the [sweep] section is ignored by `run`; use `sweep` to expand it");
    }
    let exec = match workers(opts.workers) {
        Ok(w) => w,
        Err(e) => return fail(EXIT_VALIDATION, e),
    };
    let cache = if opts.no_cache { Cache::disabled() } else { Cache::from_env() };
    run_one(&cfg, opts.out.as_deref(), &exec, &cache)
}

fn label_dir(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || ".-=_".contains(c) { c } else { '_' }).collect()
}

fn sweep(path: &Path, opts: &RunOpts) -> i32 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_RUNTIME, format!("error: {}: {e}", path.display())),
    };
    // validate the base first so that every problem is reported once
    let base = match config::parse(&text) {
        Ok(c) => c,
        Err(e) => return report_errors(&RunError::Validation(e)),
    };
    let table: toml::Table = match text.parse() {
        Ok(t) => t,
        Err(e) => return fail(EXIT_VALIDATION, e),
    };
    let combos = match config::expand_sweep(&table) {
        Ok(c) => c,
        Err(e) => return report_errors(&RunError::Validation(e)),
    };
    let mut configs = Vec::new();
    for (label, t) in combos {
        match config::from_table(t) {
            Ok(c) => configs.push((label, c)),
            Err(e) => {
                eprintln!("combination {label}:");
                return report_errors(&RunError::Validation(e));
            }
        }
    }
    let exec = match workers(opts.workers) {
        Ok(w) => w,
        Err(e) => return fail(EXIT_VALIDATION, e),
    };
    let cache = if opts.no_cache { Cache::disabled() } else { Cache::from_env() };
    let root = opts.out.clone().unwrap_or_else(|| PathBuf::from(&base.output.directory));
    let mut worst = EXIT_OK;
    for (label, cfg) in &configs {
        println!("== {label}");
        let code = run_one(cfg, Some(&root.join(label_dir(label))), &exec, &cache);
        worst = worst.max(code);
    }
    worst
}

fn check(n: Option<usize>) -> i32 {
    let exec = match workers(n) {
        Ok(w) => w,
        Err(e) => return fail(EXIT_VALIDATION, e),
    };
    let results = acceptance::run_all(&exec, |c| println!("{c}"));
    let failed = results.iter().filter(|c| !c.passed).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_CHECKS
    }
}

fn show(path: &Path) -> i32 {
    match read_report(path) {
        Ok(r) => {
            print!("{}", r.summary(None));
            EXIT_OK
        }
        Err(e) => fail(EXIT_RUNTIME, format!("error: {e}")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Run { config, opts } => run(config, opts),
        Command::Check { workers } => check(*workers),
        Command::Sweep { config, opts } => sweep(config, opts),
        Command::Show { report } => show(report),
    };
    ExitCode::from(code as u8)
}
