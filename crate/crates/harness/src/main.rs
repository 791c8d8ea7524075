use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use quads_core::testbed::registry;
use quads_harness::calibrate::{calibrate, pooled_factor};
use quads_harness::report::{emit_reports, summarize};
use quads_harness::runner::{prepare_surrogate, run_trials, CellResult, TrialSettings};
use quads_harness::{load_store, run_experiment, ExperimentPlan, PlanError, PlanOverrides, Route, RunError};

#[derive(Parser)]
#[command(name = "quads-lab", version, about = "Simulate and benchmark quantum-assisted continuous optimizers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct PlanArgs {
    /// JSON plan; its keys match the flag names and flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: PlanOverrides,
}

impl PlanArgs {
    fn plan(&self) -> Result<ExperimentPlan, PlanError> {
        let mut plan = match &self.config {
            Some(path) => ExperimentPlan::load(path)?,
            None => ExperimentPlan::default(),
        };
        plan.apply(&self.overrides);
        plan.validate()?;
        Ok(plan)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell of a plan and write records and a summary.
    Run(PlanArgs),
    /// Estimate quantum cost with the classical surrogate.
    Estimate(PlanArgs),
    /// Compare simulated cost with the surrogate estimate on paired seeds.
    Calibrate(PlanArgs),
    /// Write CSV tables and SVG charts for a result directory.
    Report {
        /// Result directory written by `run`.
        #[arg(long)]
        dir: PathBuf,
        /// Output directory; defaults to `<dir>/report`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the benchmark functions and their domains.
    ListFunctions {
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
}

fn json(value: &impl serde::Serialize) -> String {
    serde_json::to_string(value).expect("reports always serialize")
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run(args) => {
            let plan = args.plan()?;
            let store = run_experiment(&plan)?;
            for c in &store.cells {
                let s = summarize(c, store.seed, store.resamples);
                let note = if c.resumed { " (resumed)" } else { "" };
                println!(
                    "{}: {}/{} global, o_total {:.1} [{:.1}, {:.1}]{note}",
                    c.cell.id(),
                    s.n_global,
                    s.n_trials,
                    s.o_total,
                    s.ci_lo,
                    s.ci_hi
                );
            }
            println!("wrote {}", plan.out.display());
        }
        Command::Estimate(args) => {
            let plan = args.plan()?;
            let settings = TrialSettings::from_plan(&plan);
            let prepared = plan
                .cells()
                .into_iter()
                .map(|cell| prepare_surrogate(&cell).map(|p| (cell, p)))
                .collect::<Result<Vec<_>, _>>()?;
            for (cell, problem) in prepared {
                let records = run_trials(&cell, Route::Surrogate, &problem, &settings, plan.trials)?;
                let result = CellResult {
                    cell,
                    route: Route::Surrogate,
                    records,
                    resumed: false,
                };
                println!("{}", json(&summarize(&result, plan.seed, plan.resamples)));
            }
        }
        Command::Calibrate(args) => {
            let plan = args.plan()?;
            let settings = TrialSettings::from_plan(&plan);
            let mut cals = Vec::new();
            for cell in plan.cells() {
                let c = calibrate(&cell, &settings, plan.trials, plan.resamples)?;
                println!("{}", json(&c));
                cals.push(c);
            }
            match pooled_factor(&cals) {
                Some(f) => println!("{{\"pooled_factor\":{f}}}"),
                None => println!("{{\"pooled_factor\":null}}"),
            }
        }
        Command::Report { dir, out } => {
            let store = load_store(&dir).with_context(|| format!("loading {}", dir.display()))?;
            let files = emit_reports(&store, &out.unwrap_or_else(|| dir.join("report")))?;
            for f in [&files.stats, &files.traces, &files.solved, &files.scaling].into_iter().chain(&files.charts) {
                println!("{}", f.display());
            }
        }
        Command::ListFunctions { dim } => {
            if dim == 0 {
                return Err(PlanError::Invalid("dim must be positive".into()).into());
            }
            for d in registry(dim) {
                println!("{:<30} [{}, {}]^{}", d.name, d.lower[0], d.upper[0], d.dimension);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<RunError>() {
                Some(RunError::Plan(_)) => 2,
                Some(RunError::Infeasible { .. }) => 3,
                _ if e.is::<PlanError>() => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
