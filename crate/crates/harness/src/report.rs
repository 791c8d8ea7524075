//! Per-cell statistics, trace tables, scaling fits and charts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use quads_core::estimator::TOTAL_FACTOR;
use quads_core::metrics::{aggregate, bootstrap_ci, scaling_regression, Regression, TrialCost};
use quads_core::rng::{derive_seed, TrialRng};
use quads_core::TrialRecord;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::runner::{CellResult, ResultStore, Route, RunError};
use crate::svg::{bar_chart, line_chart, Bar, Series};

/// One row of `stats.csv` / `summary.csv`.
///
/// For surrogate cells the cost components are the estimated lower bound,
/// `o_lower` holds its expected total and `o_total` and the interval are
/// scaled by the total factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub method: String,
    pub route: Route,
    pub function: String,
    pub dimension: usize,
    pub tau: u32,
    pub n_trials: usize,
    pub n_global: usize,
    pub n_budget: usize,
    pub o_local: f64,
    pub o_global: f64,
    pub p_global: f64,
    pub o_single: f64,
    pub o_total: f64,
    pub unbounded: bool,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub ci_unbounded: bool,
    pub o_lower: Option<f64>,
}

pub const STATS_HEADER: [&str; 18] = [
    "method",
    "route",
    "function",
    "dimension",
    "tau",
    "n_trials",
    "n_global",
    "n_budget",
    "o_local",
    "o_global",
    "p_global",
    "o_single",
    "o_total",
    "unbounded",
    "ci_lo",
    "ci_hi",
    "ci_unbounded",
    "o_lower",
];

/// Cost used by the metrics: the estimate for surrogate trials, the
/// combined oracle count otherwise.
pub fn trial_cost(r: &TrialRecord, route: Route) -> TrialCost {
    let mut c = TrialCost::from_record(r);
    if route == Route::Surrogate {
        c.cost = r.estimated_quantum_cost.unwrap_or(c.cost);
    }
    c
}

/// Aggregates a cell and bootstraps its interval with a stream derived
/// from the master seed and the cell id.
///
/// # Panics
///
/// If the cell has no records; plans always have at least one trial.
pub fn summarize(cell: &CellResult, seed: u64, resamples: usize) -> CellSummary {
    let costs: Vec<TrialCost> = cell.records.iter().map(|r| trial_cost(r, cell.route)).collect();
    let stats = aggregate(&costs).expect("cells hold at least one trial");
    let mut rng = TrialRng::seed_from_u64(derive_seed(seed, &["bootstrap", &cell.cell.id()]));
    let ci = bootstrap_ci(&costs, resamples, &mut rng).expect("cells hold at least one trial");
    let (scale, o_lower) = match cell.route {
        Route::Surrogate => (TOTAL_FACTOR, Some(stats.o_total)),
        _ => (1.0, None),
    };
    CellSummary {
        method: cell.cell.method.label().to_string(),
        route: cell.route,
        function: cell.cell.function.clone(),
        dimension: cell.cell.dimension,
        tau: cell.cell.tau,
        n_trials: stats.n_trials,
        n_global: stats.n_global,
        n_budget: stats.n_budget,
        o_local: stats.o_local,
        o_global: stats.o_global,
        p_global: stats.p_global,
        o_single: stats.o_single,
        o_total: stats.o_total * scale,
        unbounded: stats.unbounded,
        ci_lo: ci.lo * scale,
        ci_hi: ci.hi * scale,
        ci_unbounded: ci.unbounded,
        o_lower,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> RunError + '_ {
    move |e| RunError::Corrupt {
        path: path.to_path_buf(),
        line: e.position().map_or(0, |p| p.line() as usize),
        message: e.to_string(),
    }
}

/// Writes rows under an explicit header so an empty table still has one.
fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), RunError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_stats_csv(path: &Path, rows: &[CellSummary]) -> Result<(), RunError> {
    write_csv(path, &STATS_HEADER, rows)
}

pub fn read_stats_csv(path: &Path) -> Result<Vec<CellSummary>, RunError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<Result<Vec<_>, _>>().map_err(csv_err(path))
}

#[derive(Serialize)]
struct TraceRow<'a> {
    method: &'a str,
    function: &'a str,
    dimension: usize,
    tau: u32,
    trial: u64,
    outcome: quads_core::Outcome,
    calls: u64,
    value: f64,
}

#[derive(Serialize)]
struct SolvedRow<'a> {
    method: &'a str,
    function: &'a str,
    dimension: usize,
    tau: u32,
    calls: f64,
    fraction: f64,
}

/// Fraction of trials that ended global within a given cost, as a step
/// curve starting at `(0, 0)` with one point per global trial.
pub fn fraction_solved(cell: &CellResult) -> Vec<(f64, f64)> {
    let n = cell.records.len().max(1) as f64;
    let mut costs: Vec<f64> = cell
        .records
        .iter()
        .filter(|r| r.is_global())
        .map(|r| trial_cost(r, cell.route).cost)
        .collect();
    costs.sort_by(f64::total_cmp);
    let mut out = vec![(0.0, 0.0)];
    out.extend(costs.iter().enumerate().map(|(k, &c)| (c, (k + 1) as f64 / n)));
    out
}

/// A dimension-scaling fit for one (method, function, tau) series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub method: String,
    pub function: String,
    pub tau: u32,
    pub dimension: usize,
    pub o_total: f64,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
}

pub fn scaling_rows(summaries: &[CellSummary]) -> Vec<ScalingRow> {
    let mut groups: BTreeMap<(String, String, u32), Vec<&CellSummary>> = BTreeMap::new();
    for s in summaries {
        groups.entry((s.method.clone(), s.function.clone(), s.tau)).or_default().push(s);
    }
    let mut out = Vec::new();
    for ((method, function, tau), mut cells) in groups {
        cells.sort_by_key(|c| c.dimension);
        let points: Vec<(f64, f64)> = cells.iter().map(|c| (c.dimension as f64, c.o_total)).collect();
        let fit: Option<Regression> = scaling_regression(&points).ok();
        for c in cells {
            out.push(ScalingRow {
                method: method.clone(),
                function: function.clone(),
                tau,
                dimension: c.dimension,
                o_total: c.o_total,
                slope: fit.map(|f| f.slope),
                intercept: fit.map(|f| f.intercept),
                r_squared: fit.map(|f| f.r_squared),
            });
        }
    }
    out
}

/// Files written by [`emit_reports`].
#[derive(Debug, Clone)]
pub struct ReportFiles {
    pub stats: PathBuf,
    pub traces: PathBuf,
    pub solved: PathBuf,
    pub scaling: PathBuf,
    pub charts: Vec<PathBuf>,
}

fn label(s: &CellSummary) -> String {
    format!("{} {} D{} t{}", s.method, s.function, s.dimension, s.tau)
}

/// Summaries in cell order, independent of the order cells were run in.
pub fn summarize_store(store: &ResultStore) -> Vec<CellSummary> {
    sorted_cells(store).into_iter().map(|c| summarize(c, store.seed, store.resamples)).collect()
}

fn sorted_cells(store: &ResultStore) -> Vec<&CellResult> {
    let mut cells: Vec<&CellResult> = store.cells.iter().collect();
    cells.sort_by(|a, b| a.cell.cmp(&b.cell));
    cells
}

/// Writes statistics, traces, scaling tables and charts into `dir`.
pub fn emit_reports(store: &ResultStore, dir: &Path) -> Result<ReportFiles, RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let cells = sorted_cells(store);
    let summaries = summarize_store(store);
    let files = ReportFiles {
        stats: dir.join("stats.csv"),
        traces: dir.join("traces.csv"),
        solved: dir.join("solved.csv"),
        scaling: dir.join("scaling.csv"),
        charts: vec![dir.join("cost.svg"), dir.join("solved.svg"), dir.join("scaling.svg")],
    };
    write_stats_csv(&files.stats, &summaries)?;

    let mut traces = Vec::new();
    let mut solved = Vec::new();
    for c in &cells {
        let (m, f, d, t) = (c.cell.method.label(), c.cell.function.as_str(), c.cell.dimension, c.cell.tau);
        for r in &c.records {
            traces.extend(r.best_value_trace.iter().map(|p| TraceRow {
                method: m,
                function: f,
                dimension: d,
                tau: t,
                trial: r.trial,
                outcome: r.outcome,
                calls: p.calls,
                value: p.value,
            }));
        }
        solved.extend(fraction_solved(c).into_iter().map(|(calls, fraction)| SolvedRow {
            method: m,
            function: f,
            dimension: d,
            tau: t,
            calls,
            fraction,
        }));
    }
    write_csv(&files.traces, &["method", "function", "dimension", "tau", "trial", "outcome", "calls", "value"], &traces)?;
    write_csv(&files.solved, &["method", "function", "dimension", "tau", "calls", "fraction"], &solved)?;
    let scaling = scaling_rows(&summaries);
    write_csv(
        &files.scaling,
        &["method", "function", "tau", "dimension", "o_total", "slope", "intercept", "r_squared"],
        &scaling,
    )?;

    let bars: Vec<Bar> = summaries
        .iter()
        .map(|s| Bar {
            label: label(s),
            value: s.o_total.log10(),
            whisker: Some((s.ci_lo.log10(), s.ci_hi.log10())),
        })
        .collect();
    let solved_series: Vec<Series> = cells
        .iter()
        .zip(&summaries)
        .map(|(c, s)| {
            let curve = fraction_solved(c);
            let mut points = Vec::new();
            for w in curve.windows(2) {
                let x = w[1].0.max(1.0).log10();
                points.push((x, w[0].1));
                points.push((x, w[1].1));
            }
            Series { label: label(s), points }
        })
        .collect();
    let mut scaling_series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &scaling {
        scaling_series
            .entry(format!("{} {} t{}", r.method, r.function, r.tau))
            .or_default()
            .push((r.dimension as f64, r.o_total.log10()));
    }
    let scaling_series: Vec<Series> = scaling_series
        .into_iter()
        .map(|(label, points)| Series { label, points })
        .collect();
    let charts = [
        bar_chart("Expected oracle calls until global convergence", "log10 o_total", &bars),
        line_chart("Fraction of trials solved", "log10 oracle calls", "fraction global", &solved_series),
        line_chart("Dimension scaling", "D", "log10 o_total", &scaling_series),
    ];
    for (path, svg) in files.charts.iter().zip(charts) {
        fs::write(path, svg).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(files)
}
