use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use nqca::experiments::config::{load_scenario, ScenarioFile};
use nqca::experiments::emit::{emit, write_sweep_csv};
use nqca::experiments::{optimize_scenario, run_scenario, sweep, Reducer, SweepTable};
use nqca::selfcheck::{run_selfcheck, SEED};

/// Noisy partitioned quantum cellular automaton: exciton transfer along
/// open chains and rings, with the classical random walk as a baseline.
#[derive(Parser)]
#[command(name = "nqca", version)]
struct Cli {
    /// Worker threads for parallel runs (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every series of a scenario and write one CSV per series.
    Run(ScenarioArgs),
    /// Evaluate the scenario's sweep grid and write the table as CSV.
    Sweep(ScenarioArgs),
    /// Grid-search the scenario's optimisation axis.
    Optimize(ScenarioArgs),
    /// Run the built-in invariant checks.
    Selfcheck,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,

    /// Replace a scenario key after parsing, e.g. `xi=0`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Also write an SVG plot of the integrated probabilities.
    #[arg(long)]
    svg: bool,

    /// Check positivity of the state at every measurement.
    #[arg(long)]
    debug_psd: bool,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioFile> {
        if !self.config.is_file() {
            bail!("config file {} does not exist", self.config.display());
        }
        let mut file = load_scenario(&self.config, &self.overrides)
            .with_context(|| format!("loading {}", self.config.display()))?;
        file.scenario.check_psd |= self.debug_psd;
        Ok(file)
    }
}

fn run(args: &ScenarioArgs) -> Result<()> {
    let file = args.load()?;
    let s = &file.scenario;
    let series = run_scenario(s)?;
    let paths = emit(&args.out, &s.name, &series, args.svg)?;
    for (ser, path) in series.iter().zip(&paths) {
        println!(
            "{:<12} P_tot({}) = {:.6}  -> {}",
            ser.model.label(),
            ser.record.len(),
            ser.record.final_p_tot(),
            path.display()
        );
    }
    if args.svg {
        println!(
            "plot -> {}",
            paths
                .last()
                .map(|p| p.display().to_string())
                .unwrap_or_default()
        );
    }
    Ok(())
}

fn run_sweep(args: &ScenarioArgs) -> Result<()> {
    let file = args.load()?;
    let Some(grid) = &file.sweep else {
        bail!(
            "{} defines no sweep axes (sweep_* keys)",
            args.config.display()
        );
    };
    let table = sweep(&file.scenario, grid)?;
    let path = args.out.join(format!("{}_sweep.csv", file.scenario.name));
    write_sweep_csv(&path, &table)?;
    println!(
        "{} cells, reducer {} -> {}",
        table.rows.len(),
        table.reducer.name(),
        path.display()
    );
    Ok(())
}

fn run_optimize(args: &ScenarioArgs) -> Result<()> {
    let file = args.load()?;
    let Some(spec) = &file.optimize else {
        bail!("{} defines no optimize_axis", args.config.display());
    };
    let result = optimize_scenario(&file.scenario, spec.axis, &spec.values, spec.horizon)?;
    for (x, v) in &result.evaluations {
        println!("{} = {x:<10} P_tot({}) = {v:.6}", spec.axis, spec.horizon);
    }
    println!(
        "best {} = {} (P_tot = {:.6})",
        spec.axis, result.best, result.objective
    );
    let table = SweepTable {
        axis_names: vec![spec.axis],
        reducer: Reducer::PTotAt { t: spec.horizon },
        rows: result
            .evaluations
            .iter()
            .map(|&(x, v)| (vec![x], v))
            .collect(),
    };
    let path = args
        .out
        .join(format!("{}_optimize.csv", file.scenario.name));
    write_sweep_csv(&path, &table)?;
    println!("table -> {}", path.display());
    Ok(())
}

fn selfcheck() -> Result<bool> {
    println!("selfcheck seed {SEED}");
    let outcomes = run_selfcheck();
    for c in &outcomes {
        println!(
            "{} {} ({} cases, worst deviation {:.2e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.cases,
            c.worst
        );
    }
    Ok(outcomes.iter().all(|c| c.passed))
}

fn dispatch(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Run(a) => run(a).map(|_| true),
        Command::Sweep(a) => run_sweep(a).map(|_| true),
        Command::Optimize(a) => run_optimize(a).map(|_| true),
        Command::Selfcheck => selfcheck(),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
