use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eqstab_cli::report;
use eqstab_cli::runner::{self, ScenarioReport};
use eqstab_cli::scenario::{Kind, Scenario};
use eqstab_cli::suite;

/// Stabilize approximately equivariant structures and check the
/// correction bounds.
#[derive(Parser)]
#[command(name = "eqstab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correct approximate representations.
    Stabilize(RunArgs),
    /// Trivialize perturbed coboundaries.
    Cocycle(RunArgs),
    /// Lift representations through a tower of quotients.
    Lift(RunArgs),
    /// Correct approximate Rokhlin partitions.
    Rokhlin(RunArgs),
    /// Correct approximate partitions of an invariant corner.
    Tracial(RunArgs),
    /// Correct graded approximate representations.
    Graded(RunArgs),
    /// Check the averaging estimate on random unitaries near 1.
    Estimate(RunArgs),
    /// Run a list of scenarios, the built-in suite by default.
    Suite(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (one scenario or an array).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the seed of every scenario.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the trial count of every scenario.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the corrector tolerance of every scenario.
    #[arg(long)]
    tolerance: Option<f64>,
}

fn usage(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

fn load(args: &RunArgs, kind: Option<Kind>) -> Result<Vec<Scenario>, String> {
    let mut list = match &args.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            Scenario::list_from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => match kind {
            Some(k) => vec![suite::default_for(k)],
            None => suite::builtin(),
        },
    };
    for s in &mut list {
        if let Some(k) = kind {
            if s.kind != k {
                return Err(format!("scenario {} has kind {}, expected {}", s.label(), s.kind.name(), k.name()));
            }
        }
        if let Some(seed) = args.seed {
            s.seed = seed;
        }
        if let Some(t) = args.trials {
            if t == 0 {
                return Err("--trials must be positive".into());
            }
            s.trials = t;
        }
        if let Some(tol) = args.tolerance {
            if !(tol > 0.0) {
                return Err("--tolerance must be positive".into());
            }
            s.tolerance = Some(tol);
        }
    }
    Ok(list)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, kind) = match &cli.command {
        Command::Stabilize(a) => (a, Some(Kind::Rep)),
        Command::Cocycle(a) => (a, Some(Kind::Cocycle)),
        Command::Lift(a) => (a, Some(Kind::Lift)),
        Command::Rokhlin(a) => (a, Some(Kind::Rokhlin)),
        Command::Tracial(a) => (a, Some(Kind::Tracial)),
        Command::Graded(a) => (a, Some(Kind::Graded)),
        Command::Estimate(a) => (a, Some(Kind::IntegralEstimate)),
        Command::Suite(a) => (a, None),
    };
    let scenarios = match load(args, kind) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let out = eqstab_cli::output_dir(args.out.clone());
    let reports: Vec<ScenarioReport> = scenarios
        .iter()
        .map(|s| {
            let r = runner::run_scenario(s);
            println!("{}", report::status_line(&r));
            r
        })
        .collect();
    let written = if kind.is_some() && reports.len() == 1 {
        report::write_scenario(&out, &reports[0])
    } else {
        report::write_suite(&out, &reports)
    };
    if let Err(e) = written {
        return usage(format!("{}: {e}", out.display()));
    }
    let mut ok = true;
    for r in &reports {
        if !r.passed {
            ok = false;
            for v in &r.violations {
                eprintln!("bound violated in {}: {v}", r.scenario.label());
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
