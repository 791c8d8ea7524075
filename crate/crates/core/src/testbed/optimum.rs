use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Grid, ObjectiveSpec, Structure, TestbedError};

/// Default ceiling on grid points that may be scanned or tabulated.
pub const DEFAULT_SCAN_CAP: u64 = 1 << 26;

/// Function values at every point of a grid, in index order.
#[derive(Debug, Clone)]
pub struct GridValues {
    grid: Grid,
    values: Vec<f64>,
}

impl GridValues {
    pub fn compute(spec: &ObjectiveSpec, grid: Grid, cap: u64) -> Result<Self, TestbedError> {
        if spec.dimension() != grid.dimension() {
            return Err(TestbedError::DimensionMismatch {
                expected: spec.dimension(),
                got: grid.dimension(),
            });
        }
        let total = grid.total_points();
        if total > cap {
            return Err(TestbedError::GridTooLarge { points: total, cap });
        }
        let mut values = vec![0.0; total as usize];
        values
            .par_chunks_mut(4096)
            .enumerate()
            .for_each(|(chunk, out)| {
                let mut x = vec![0.0; grid.dimension()];
                let base = (chunk * 4096) as u64;
                for (k, slot) in out.iter_mut().enumerate() {
                    grid.fill_point(base + k as u64, &mut x);
                    *slot = spec.evaluate(&x);
                }
            });
        Ok(Self { grid, values })
    }

    /// Wraps a precomputed table; the length must match the grid.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self, TestbedError> {
        if values.len() as u64 != grid.total_points() {
            return Err(TestbedError::InvalidGrid(format!(
                "{} values for {} grid points",
                values.len(),
                grid.total_points()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, index: u64) -> f64 {
        self.values[index as usize]
    }

    /// Smallest value, ties resolved to the smallest index.
    pub fn argmin(&self) -> (u64, f64) {
        let mut best = (0u64, self.values[0]);
        for (j, &v) in self.values.iter().enumerate().skip(1) {
            if v < best.1 {
                best = (j as u64, v);
            }
        }
        best
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Fraction of grid points strictly below `threshold`.
    pub fn fraction_below(&self, threshold: f64) -> f64 {
        let good = self.values.iter().filter(|&&v| v < threshold).count();
        good as f64 / self.values.len() as f64
    }
}

/// Relative gap under which a grid value counts as tied with the minimum.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Most tied minimizers kept beside the argmin.
pub const MAX_TIED_MINIMIZERS: usize = 1024;

fn tie_bound(min: f64) -> f64 {
    min + TIE_TOLERANCE * min.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumRecord {
    pub argmin_index: u64,
    pub argmin_scaled: Vec<f64>,
    pub min_value: f64,
    /// Other grid points whose value ties `min_value`. Symmetric functions
    /// on even grids have several; each counts as a global optimum.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tied_minimizers: Vec<Vec<f64>>,
}

impl OptimumRecord {
    pub fn from_values(values: &GridValues) -> Self {
        let (index, value) = values.argmin();
        let grid = values.grid();
        let bound = tie_bound(value);
        let tied_minimizers = values
            .values()
            .iter()
            .enumerate()
            .filter(|&(j, &v)| j as u64 != index && v <= bound)
            .take(MAX_TIED_MINIMIZERS)
            .map(|(j, _)| grid.index_to_point(j as u64).expect("index lies on the grid"))
            .collect();
        Self {
            argmin_index: index,
            argmin_scaled: grid.index_to_point(index).expect("argmin index lies on the grid"),
            min_value: value,
            tied_minimizers,
        }
    }

    /// The argmin followed by every tied minimizer.
    pub fn minimizers(&self) -> impl Iterator<Item = &[f64]> {
        std::iter::once(self.argmin_scaled.as_slice()).chain(self.tied_minimizers.iter().map(Vec::as_slice))
    }
}

/// Finds the grid minimizer, scanning exhaustively when the grid fits under `cap`.
///
/// Larger grids are handled only for functions with coordinatewise
/// structure, where per-dimension scans suffice.
pub fn locate_global_optimum(
    spec: &ObjectiveSpec,
    grid: Grid,
    cap: u64,
) -> Result<OptimumRecord, TestbedError> {
    if grid.total_points() <= cap {
        return Ok(OptimumRecord::from_values(&GridValues::compute(spec, grid, cap)?));
    }
    match spec.structure() {
        Structure::Coordinatewise(terms) => coordinatewise_optimum(spec, grid, terms)
            .ok_or(TestbedError::GridTooLarge {
                points: grid.total_points(),
                cap,
            }),
        Structure::Opaque => Err(TestbedError::GridTooLarge {
            points: grid.total_points(),
            cap,
        }),
    }
}

/// Per-dimension argmin of every term; `None` when the terms share no minimizer.
///
/// Minimizers are compared up to a relative `1e-12`, so symmetric ties that
/// differ by rounding still intersect. The smallest shared digit wins.
pub fn coordinatewise_optimum(
    spec: &ObjectiveSpec,
    grid: Grid,
    terms: &[fn(f64) -> f64],
) -> Option<OptimumRecord> {
    let mut digits = Vec::with_capacity(grid.dimension());
    for dim in 0..grid.dimension() {
        let (lo, hi) = (spec.lower()[dim], spec.upper()[dim]);
        let mut shared: Vec<u64> = (0..grid.levels()).collect();
        for term in terms {
            let vals: Vec<f64> = (0..grid.levels())
                .map(|d| term(lo + grid.digit_to_coordinate(d) * (hi - lo)))
                .collect();
            let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let tol = 1e-12 * min.abs().max(1.0);
            shared.retain(|&d| vals[d as usize] <= min + tol);
        }
        if shared.is_empty() {
            return None;
        }
        digits.push(shared);
    }
    let first: Vec<u64> = digits.iter().map(|s| s[0]).collect();
    let mut tied_minimizers = Vec::new();
    let mut pick = vec![0usize; digits.len()];
    'product: loop {
        let mut i = pick.len();
        loop {
            if i == 0 {
                break 'product;
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < digits[i].len() {
                break;
            }
            pick[i] = 0;
        }
        if tied_minimizers.len() == MAX_TIED_MINIMIZERS {
            break;
        }
        let idx = grid
            .index_from_digits(&pick.iter().zip(&digits).map(|(&k, s)| s[k]).collect::<Vec<_>>())
            .ok()?;
        tied_minimizers.push(grid.index_to_point(idx).ok()?);
    }
    let digits = first;
    let index = grid.index_from_digits(&digits).ok()?;
    let point = grid.index_to_point(index).ok()?;
    Some(OptimumRecord {
        argmin_index: index,
        min_value: spec.evaluate(&point),
        argmin_scaled: point,
        tied_minimizers,
    })
}

/// Closed Euclidean ball test in scaled coordinates, around any minimizer.
pub fn is_global_hit(x: &[f64], optimum: &OptimumRecord, eps: f64) -> bool {
    debug_assert!(eps > 0.0);
    optimum.minimizers().any(|m| {
        let d2: f64 = x.iter().zip(m).map(|(a, b)| (a - b) * (a - b)).sum();
        d2.sqrt() <= eps
    })
}

/// A spec paired with its grid, optimum and (when small enough) its value table.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ObjectiveSpec,
    pub grid: Grid,
    pub optimum: OptimumRecord,
    pub values: Option<Arc<GridValues>>,
}

impl Problem {
    /// Tabulates all grid values; required by the statevector methods.
    pub fn tabulated(spec: ObjectiveSpec, grid: Grid, cap: u64) -> Result<Self, TestbedError> {
        let values = GridValues::compute(&spec, grid, cap)?;
        let optimum = OptimumRecord::from_values(&values);
        Ok(Self {
            spec,
            grid,
            optimum,
            values: Some(Arc::new(values)),
        })
    }

    /// Locates the optimum without keeping a value table.
    pub fn untabulated(spec: ObjectiveSpec, grid: Grid, cap: u64) -> Result<Self, TestbedError> {
        let optimum = locate_global_optimum(&spec, grid, cap)?;
        Ok(Self {
            spec,
            grid,
            optimum,
            values: None,
        })
    }

    pub fn dimension(&self) -> usize {
        self.grid.dimension()
    }
}
