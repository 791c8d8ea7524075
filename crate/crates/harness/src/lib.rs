//! Experiment orchestration for the quantum-assisted optimization lab.
//!
//! A [`plan::ExperimentPlan`] names methods, functions, dimensions and a
//! grid resolution. [`runner::run_experiment`] runs every cell with
//! per-trial seeds, writes JSON-lines records and a summary table, and
//! resumes from its manifest. [`report::emit_reports`] turns a result
//! directory into CSV tables and SVG charts, and [`calibrate`] compares
//! simulated quantum cost against the classical estimate.

pub mod calibrate;
pub mod plan;
pub mod report;
pub mod runner;
mod svg;

pub use plan::{Cell, ExperimentPlan, Method, PlanError, PlanOverrides};
pub use runner::{load_store, run_experiment, ResultStore, Route, RunError};
