//! Experiment plans: which cells to run and how.
//!
//! A plan is read from JSON whose keys are the `run` flag names, so a config
//! file and a command line describe the same thing. Flags given on the
//! command line replace the corresponding file entries.

use std::fmt;
use std::path::{Path, PathBuf};

use quads_core::quantum::DEFAULT_MAX_AMPLITUDES;
use quads_core::testbed::{objective, MAX_INDEX_BITS};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("cannot read plan {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed plan: {0}")]
    Parse(String),
    #[error("invalid plan: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Quads,
    Gas,
    Cmaes,
    Pso,
    Basinhopping,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Quads, Method::Gas, Method::Cmaes, Method::Pso, Method::Basinhopping];

    pub fn label(self) -> &'static str {
        match self {
            Method::Quads => "quads",
            Method::Gas => "gas",
            Method::Cmaes => "cmaes",
            Method::Pso => "pso",
            Method::Basinhopping => "basinhopping",
        }
    }

    /// Methods simulated on a full statevector.
    pub fn is_quantum(self) -> bool {
        matches!(self, Method::Quads | Method::Gas)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One (method, function, D, tau) combination.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub method: Method,
    pub function: String,
    pub dimension: usize,
    pub tau: u32,
}

impl Cell {
    /// File-system safe identifier, also used as the manifest key.
    pub fn id(&self) -> String {
        format!("{}__{}__d{}__t{}", self.method, self.function, self.dimension, self.tau)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentPlan {
    #[serde(rename = "method", deserialize_with = "one_or_many")]
    pub methods: Vec<Method>,
    #[serde(rename = "function", deserialize_with = "one_or_many")]
    pub functions: Vec<String>,
    #[serde(rename = "dim", deserialize_with = "one_or_many")]
    pub dimensions: Vec<usize>,
    pub tau: u32,
    pub trials: u64,
    pub seed: u64,
    /// Combined oracle calls allowed per trial.
    pub budget: u64,
    /// Radius of the global-hit ball, scaled units.
    pub eps: f64,
    pub out: PathBuf,
    /// Route statevector cells that exceed the amplitude cap to the classical surrogate.
    pub fallback: bool,
    pub max_amplitudes: u64,
    pub resamples: usize,
    pub record_generations: bool,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            methods: vec![Method::Quads],
            functions: vec!["rastrigin".into()],
            dimensions: vec![2],
            tau: 6,
            trials: 100,
            seed: 0,
            budget: 1_000_000,
            eps: 0.01,
            out: PathBuf::from("results"),
            fallback: false,
            max_amplitudes: DEFAULT_MAX_AMPLITUDES,
            resamples: quads_core::metrics::DEFAULT_RESAMPLES,
            record_generations: false,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(d: D) -> Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

/// Command-line values that replace plan entries when present.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct PlanOverrides {
    /// Methods to run; repeat or comma-separate.
    #[arg(long = "method", value_enum, value_delimiter = ',')]
    pub methods: Vec<Method>,
    /// Benchmark functions; repeat or comma-separate.
    #[arg(long = "function", value_delimiter = ',')]
    pub functions: Vec<String>,
    /// Dimensions; repeat or comma-separate.
    #[arg(long = "dim", value_delimiter = ',')]
    pub dimensions: Vec<usize>,
    /// Bits per coordinate.
    #[arg(long)]
    pub tau: Option<u32>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Combined oracle calls per trial.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Estimate oversized statevector cells with the classical surrogate.
    #[arg(long)]
    pub fallback: bool,
    #[arg(long)]
    pub max_amplitudes: Option<u64>,
    #[arg(long)]
    pub resamples: Option<usize>,
    /// Keep per-generation traces in the records.
    #[arg(long)]
    pub record_generations: bool,
}

impl ExperimentPlan {
    pub fn from_json(text: &str) -> Result<Self, PlanError> {
        serde_json::from_str(text).map_err(|e| PlanError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PlanError> {
        let text = std::fs::read_to_string(path).map_err(|source| PlanError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plans always serialize")
    }

    pub fn apply(&mut self, o: &PlanOverrides) {
        if !o.methods.is_empty() {
            self.methods = o.methods.clone();
        }
        if !o.functions.is_empty() {
            self.functions = o.functions.clone();
        }
        if !o.dimensions.is_empty() {
            self.dimensions = o.dimensions.clone();
        }
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = o.$field.clone() {
                    self.$field = v;
                }
            )*};
        }
        take!(tau, trials, seed, budget, eps, out, max_amplitudes, resamples);
        self.fallback |= o.fallback;
        self.record_generations |= o.record_generations;
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |msg: String| Err(PlanError::Invalid(msg));
        if self.methods.is_empty() || self.functions.is_empty() || self.dimensions.is_empty() {
            return bad("method, function and dim lists must be non-empty".into());
        }
        if has_duplicates(&self.methods) || has_duplicates(&self.functions) || has_duplicates(&self.dimensions) {
            return bad("duplicate entries in a method, function or dim list".into());
        }
        if self.tau == 0 {
            return bad("tau must be positive".into());
        }
        for &d in &self.dimensions {
            if d == 0 {
                return bad("dimensions must be positive".into());
            }
            if d as u64 * self.tau as u64 > MAX_INDEX_BITS as u64 {
                return bad(format!("D={d} with tau={} needs more than {MAX_INDEX_BITS} index bits", self.tau));
            }
        }
        for f in &self.functions {
            if let Err(e) = objective(f, 1) {
                return bad(e.to_string());
            }
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return bad("eps must be positive and finite".into());
        }
        if self.max_amplitudes == 0 || self.resamples == 0 {
            return bad("max_amplitudes and resamples must be positive".into());
        }
        Ok(())
    }

    /// Cells in method, function, dimension order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &method in &self.methods {
            for function in &self.functions {
                for &dimension in &self.dimensions {
                    out.push(Cell {
                        method,
                        function: function.clone(),
                        dimension,
                        tau: self.tau,
                    });
                }
            }
        }
        out
    }
}

fn has_duplicates<T: PartialEq>(xs: &[T]) -> bool {
    xs.iter().enumerate().any(|(i, x)| xs[..i].contains(x))
}
