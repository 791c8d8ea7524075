//! Executes plans: per-cell problem setup, parallel trials, JSON-lines
//! output and manifest-based resume.
//!
//! Output layout under `plan.out`:
//!
//! ```text
//! manifest.json          completed cells and the settings they ran with
//! cells/<cell-id>.jsonl  one TrialRecord per line, in trial order
//! summary.csv            per-cell statistics with bootstrap intervals
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use quads_core::baselines::{run_basinhopping, run_pso, BasinHoppingConfig, PsoConfig};
use quads_core::cma::{run_cmaes, CmaesConfig};
use quads_core::estimator::{run_gas_surrogate, run_quads_surrogate, CostWeighting};
use quads_core::optimizers::{run_gas, run_quads, GasConfig, QuadsConfig};
use quads_core::rng::trial_rng;
use quads_core::testbed::{objective, Grid, Problem, DEFAULT_SCAN_CAP};
use quads_core::TrialRecord;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plan::{Cell, ExperimentPlan, Method, PlanError};
use crate::report::{summarize_store, write_stats_csv};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("infeasible cell {cell}: {reason}")]
    Infeasible { cell: String, reason: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error("trial failed in {cell}: {message}")]
    Trial { cell: String, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// How a cell is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Full amplitude-level simulation.
    Statevector,
    /// Ordinary function evaluations.
    Classical,
    /// Classical surrogate with estimated quantum cost.
    Surrogate,
}

/// Settings shared by every trial of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSettings {
    pub seed: u64,
    pub budget: u64,
    pub eps: f64,
    pub max_amplitudes: u64,
    pub record_generations: bool,
}

impl TrialSettings {
    pub fn from_plan(plan: &ExperimentPlan) -> Self {
        Self {
            seed: plan.seed,
            budget: plan.budget,
            eps: plan.eps,
            max_amplitudes: plan.max_amplitudes,
            record_generations: plan.record_generations,
        }
    }
}

/// Builds the problem for a cell and picks its route.
///
/// Statevector methods need the full value table; when the grid exceeds
/// `max_amplitudes` they go to the surrogate if `fallback` is set and are
/// infeasible otherwise. Every route needs the grid optimum, which is
/// infeasible for unstructured functions beyond the scan cap.
pub fn prepare(cell: &Cell, max_amplitudes: u64, fallback: bool) -> Result<(Problem, Route), RunError> {
    let infeasible = |reason: String| RunError::Infeasible {
        cell: cell.id(),
        reason,
    };
    let spec = objective(&cell.function, cell.dimension).map_err(|e| PlanError::Invalid(e.to_string()))?;
    let grid = Grid::new(cell.dimension, cell.tau).map_err(|e| PlanError::Invalid(e.to_string()))?;
    let points = grid.total_points();
    if cell.method.is_quantum() && points <= max_amplitudes {
        let p = Problem::tabulated(spec, grid, max_amplitudes).map_err(|e| infeasible(e.to_string()))?;
        return Ok((p, Route::Statevector));
    }
    if cell.method.is_quantum() && !fallback {
        return Err(infeasible(format!(
            "{points} amplitudes exceed the cap of {max_amplitudes}; enable the estimator fallback"
        )));
    }
    let p = Problem::untabulated(spec, grid, DEFAULT_SCAN_CAP).map_err(|e| infeasible(e.to_string()))?;
    let route = if cell.method.is_quantum() { Route::Surrogate } else { Route::Classical };
    Ok((p, route))
}

/// Builds a cell's problem for the classical surrogate regardless of size.
pub fn prepare_surrogate(cell: &Cell) -> Result<Problem, RunError> {
    if !cell.method.is_quantum() {
        return Err(PlanError::Invalid(format!("{} has no quantum cost to estimate", cell.method)).into());
    }
    let spec = objective(&cell.function, cell.dimension).map_err(|e| PlanError::Invalid(e.to_string()))?;
    let grid = Grid::new(cell.dimension, cell.tau).map_err(|e| PlanError::Invalid(e.to_string()))?;
    Problem::untabulated(spec, grid, DEFAULT_SCAN_CAP).map_err(|e| RunError::Infeasible {
        cell: cell.id(),
        reason: e.to_string(),
    })
}

/// Runs one seeded trial. The stream depends only on the master seed, the
/// method, the function, the dimension and the trial index.
pub fn run_trial(cell: &Cell, route: Route, problem: &Problem, s: &TrialSettings, trial: u64) -> Result<TrialRecord, String> {
    let mut rng = trial_rng(s.seed, cell.method.label(), &cell.function, cell.dimension, trial);
    let gas = GasConfig {
        eps: s.eps,
        budget: s.budget,
        max_amplitudes: s.max_amplitudes,
        record_generations: s.record_generations,
        ..Default::default()
    };
    let quads = QuadsConfig {
        eps: s.eps,
        budget: s.budget,
        max_amplitudes: s.max_amplitudes,
        record_generations: s.record_generations,
        ..Default::default()
    };
    let mut record = match (cell.method, route) {
        (Method::Gas, Route::Surrogate) => run_gas_surrogate(problem, &gas, CostWeighting::Weighted, &mut rng).record,
        (Method::Quads, Route::Surrogate) => run_quads_surrogate(problem, &quads, CostWeighting::Weighted, &mut rng).record,
        (Method::Gas, _) => run_gas(problem, &gas, &mut rng).map_err(|e| e.to_string())?,
        (Method::Quads, _) => run_quads(problem, &quads, &mut rng).map_err(|e| e.to_string())?,
        (Method::Cmaes, _) => {
            let cfg = CmaesConfig {
                eps: s.eps,
                budget: s.budget,
                record_generations: s.record_generations,
                ..Default::default()
            };
            run_cmaes(problem, &cfg, &mut rng)
        }
        (Method::Pso, _) => {
            let cfg = PsoConfig {
                eps: s.eps,
                budget: s.budget,
                ..Default::default()
            };
            run_pso(problem, &cfg, &mut rng)
        }
        (Method::Basinhopping, _) => {
            let cfg = BasinHoppingConfig {
                eps: s.eps,
                budget: s.budget,
                ..Default::default()
            };
            run_basinhopping(problem, &cfg, &mut rng)
        }
    };
    record.trial = trial;
    Ok(record)
}

/// Runs `trials` trials of a cell in parallel; results come back in trial order.
pub fn run_trials(cell: &Cell, route: Route, problem: &Problem, s: &TrialSettings, trials: u64) -> Result<Vec<TrialRecord>, RunError> {
    (0..trials)
        .into_par_iter()
        .map(|t| run_trial(cell, route, problem, s, t))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|message| RunError::Trial { cell: cell.id(), message })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub cell: Cell,
    pub route: Route,
    pub trials: u64,
    pub settings: TrialSettings,
    pub file: String,
}

/// Completed cells keyed by cell id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub resamples: usize,
    pub cells: BTreeMap<String, ManifestEntry>,
}

impl Manifest {
    pub const FILE: &'static str = "manifest.json";

    pub fn load(dir: &Path) -> Result<Self, RunError> {
        let path = dir.join(Self::FILE);
        if !path.exists() {
            return Ok(Self::default());
        }
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|e| RunError::Corrupt {
            path,
            line: e.line(),
            message: e.to_string(),
        })
    }

    fn save(&self, dir: &Path) -> Result<(), RunError> {
        let path = dir.join(Self::FILE);
        let tmp = dir.join("manifest.json.tmp");
        let text = serde_json::to_string_pretty(self).expect("manifest always serializes") + "\n";
        fs::write(&tmp, text).map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))
    }
}

/// The records of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: Cell,
    pub route: Route,
    pub records: Vec<TrialRecord>,
    /// Loaded from a previous run instead of recomputed.
    pub resumed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultStore {
    pub dir: PathBuf,
    pub seed: u64,
    pub resamples: usize,
    pub cells: Vec<CellResult>,
}

pub fn write_records(path: &Path, records: &[TrialRecord]) -> Result<(), RunError> {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_json_line());
        out.push('\n');
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(out.as_bytes()).map_err(io_err(path))
}

pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>, RunError> {
    let f = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(TrialRecord::from_json_line(&line).map_err(|e| RunError::Corrupt {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Runs every cell of a validated plan, skipping cells the manifest already
/// holds with identical settings, and writes the summary table.
///
/// All cells are prepared before any trial runs, so an infeasible cell
/// fails the plan without leaving partial output.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ResultStore, RunError> {
    plan.validate()?;
    let dir = plan.out.clone();
    let cells_dir = dir.join("cells");
    let mut prepared = Vec::new();
    for cell in plan.cells() {
        let (problem, route) = prepare(&cell, plan.max_amplitudes, plan.fallback)?;
        prepared.push((cell, problem, route));
    }
    fs::create_dir_all(&cells_dir).map_err(io_err(&cells_dir))?;
    let settings = TrialSettings::from_plan(plan);
    let mut manifest = Manifest::load(&dir)?;
    manifest.resamples = plan.resamples;
    let mut store = ResultStore {
        dir: dir.clone(),
        seed: plan.seed,
        resamples: plan.resamples,
        cells: Vec::new(),
    };
    for (cell, problem, route) in prepared {
        let id = cell.id();
        let file = format!("cells/{id}.jsonl");
        let path = dir.join(&file);
        let entry = ManifestEntry {
            cell: cell.clone(),
            route,
            trials: plan.trials,
            settings,
            file,
        };
        if manifest.cells.get(&id) == Some(&entry) && path.exists() {
            let records = read_records(&path)?;
            if records.len() as u64 == plan.trials {
                store.cells.push(CellResult {
                    cell,
                    route,
                    records,
                    resumed: true,
                });
                continue;
            }
        }
        let records = run_trials(&cell, route, &problem, &settings, plan.trials)?;
        write_records(&path, &records)?;
        manifest.cells.insert(id, entry);
        manifest.save(&dir)?;
        store.cells.push(CellResult {
            cell,
            route,
            records,
            resumed: false,
        });
    }
    manifest.save(&dir)?;
    write_stats_csv(&dir.join("summary.csv"), &summarize_store(&store))?;
    Ok(store)
}

/// Reloads every completed cell listed in a result directory's manifest.
pub fn load_store(dir: &Path) -> Result<ResultStore, RunError> {
    let manifest = Manifest::load(dir)?;
    let mut cells = Vec::new();
    let mut seed = None;
    for entry in manifest.cells.values() {
        seed.get_or_insert(entry.settings.seed);
        cells.push(CellResult {
            cell: entry.cell.clone(),
            route: entry.route,
            records: read_records(&dir.join(&entry.file))?,
            resumed: true,
        });
    }
    Ok(ResultStore {
        dir: dir.to_path_buf(),
        seed: seed.unwrap_or(0),
        resamples: if manifest.resamples == 0 { quads_core::metrics::DEFAULT_RESAMPLES } else { manifest.resamples },
        cells,
    })
}
