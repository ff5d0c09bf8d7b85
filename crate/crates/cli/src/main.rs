use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use platelab_cli::checks::{self, REGISTRY};
use platelab_cli::error::{CliError, CliResult};
use platelab_cli::experiments::{self, CheckResult};
use platelab_cli::scenario::{Overrides, Scenario};
use platelab_core::baselines::Baselines;
use platelab_core::report::write_json;
use platelab_core::Execution;

const THREADS_VAR: &str = "PLATELAB_THREADS";

#[derive(Parser)]
#[command(name = "platelab", version, about = "Boundary-behaviour experiments for clamped Kirchhoff-Love plates")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Override a scenario value, e.g. `--set experiment.doubling.r0=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run whichever experiment block the scenario holds.
    Run { scenario: PathBuf },
    #[command(name = "material-check")]
    MaterialCheck { scenario: PathBuf },
    Solve { scenario: PathBuf },
    Reflect { scenario: PathBuf },
    Carleman { scenario: PathBuf },
    Conformal { scenario: PathBuf },
    Doubling { scenario: PathBuf },
    Identities { scenario: PathBuf },
    /// Print the check registry.
    ListChecks {
        #[arg(long)]
        json: bool,
    },
    /// Run registered checks; all fast checks when no ids are given.
    Check {
        ids: Vec<String>,
        /// Include the slow checks.
        #[arg(long)]
        all: bool,
    },
    /// Recompute the baselined constants and compare with the committed set.
    Baselines {
        /// Write the measured constants to this path instead of comparing.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

fn execution() -> CliResult<Execution> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(Execution::default());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    if n == 1 {
        return Ok(Execution::Sequential);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    Ok(Execution::Parallel)
}

fn print_checks(results: &[CheckResult]) -> bool {
    for r in results {
        println!("{} {} value={:e} tol={} {}", if r.pass { "PASS" } else { "FAIL" }, r.id, r.value, r.tolerance, r.detail);
    }
    results.iter().all(|r| r.pass)
}

fn run_scenario(path: &Path, expected: Option<&str>, g: &Global, exec: Execution) -> CliResult<bool> {
    let overrides = Overrides { set: g.set.clone(), seed: g.seed, out: g.out.clone() };
    let scenario = Scenario::load(path, &overrides)?;
    let name = scenario.experiment()?.name();
    if let Some(want) = expected {
        if want != name {
            return Err(CliError::Usage(format!("subcommand {want} given a scenario with an experiment.{name} block")));
        }
    }
    let report = experiments::run(&scenario, exec)?;
    let ok = print_checks(&report.checks);
    println!("{name}: {} ({} artifacts in {})", if ok { "pass" } else { "fail" }, report.artifacts.len(), scenario.out.display());
    Ok(ok)
}

fn dispatch(cli: Cli) -> CliResult<bool> {
    let exec = execution()?;
    let g = &cli.global;
    match &cli.command {
        Command::Run { scenario } => run_scenario(scenario, None, g, exec),
        Command::MaterialCheck { scenario } => run_scenario(scenario, Some("material-check"), g, exec),
        Command::Solve { scenario } => run_scenario(scenario, Some("solve"), g, exec),
        Command::Reflect { scenario } => run_scenario(scenario, Some("reflect"), g, exec),
        Command::Carleman { scenario } => run_scenario(scenario, Some("carleman"), g, exec),
        Command::Conformal { scenario } => run_scenario(scenario, Some("conformal"), g, exec),
        Command::Doubling { scenario } => run_scenario(scenario, Some("doubling"), g, exec),
        Command::Identities { scenario } => run_scenario(scenario, Some("identities"), g, exec),
        Command::ListChecks { json } => {
            let infos: Vec<_> = REGISTRY.iter().map(|c| c.info()).collect();
            if *json {
                let text = serde_json::to_string_pretty(&infos).map_err(|e| CliError::Usage(e.to_string()))?;
                println!("{text}");
            } else {
                println!("id\tslow\ttolerance\tanchor");
                for c in &infos {
                    println!("{}\t{}\t{}\t{}", c.id, if c.slow { "slow" } else { "-" }, c.tolerance, c.anchor);
                }
            }
            Ok(true)
        }
        Command::Check { ids, all } => {
            let selected = if ids.is_empty() {
                REGISTRY.iter().filter(|c| *all || !c.slow).collect::<Vec<_>>()
            } else {
                ids.iter()
                    .map(|id| checks::find(id).ok_or_else(|| CliError::Usage(format!("unknown check {id}"))))
                    .collect::<CliResult<Vec<_>>>()?
            };
            let results: Vec<CheckResult> = selected.iter().map(|c| c.run()).collect();
            Ok(print_checks(&results))
        }
        Command::Baselines { write } => {
            let measured = Baselines::measure(exec)?;
            if let Some(path) = write {
                write_json(path, &measured)?;
                println!("wrote {}", path.display());
                return Ok(true);
            }
            let mut ok = true;
            for c in measured.compare(&Baselines::committed()?) {
                ok &= c.pass;
                println!("{} {} value={:e} baseline={:e} factor={}", if c.pass { "PASS" } else { "FAIL" }, c.id, c.value, c.baseline, c.factor);
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
