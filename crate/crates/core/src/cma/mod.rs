//! CMA-ES: the search-distribution state, its default hyperparameters, the
//! truncated sampler, the one-generation update, and the standalone optimizer.

mod optimizer;
mod sampling;
mod update;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub(crate) use optimizer::outcome_of;
pub use optimizer::{run_cmaes, CmaesConfig};
pub use sampling::{sample_population, select_best, TruncatedNormal, MAX_REJECTIONS};
pub use update::cma_update;

/// Smallest eigenvalue kept when repairing or factoring a shape matrix.
pub const EIGEN_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CmaError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("expected {expected} selected points, got {got}")]
    SelectionSize { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid snapshot: {0}")]
    Snapshot(String),
}

/// Mean, shape matrix, step size and evolution paths of the search distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub sigma: f64,
    pub path_c: DVector<f64>,
    pub path_sigma: DVector<f64>,
    pub generation: u64,
}

impl DistributionState {
    /// Identity shape, zero paths, generation 0.
    pub fn new(mean: DVector<f64>, sigma: f64) -> Self {
        let d = mean.len();
        Self {
            mean,
            cov: DMatrix::identity(d, d),
            sigma,
            path_c: DVector::zeros(d),
            path_sigma: DVector::zeros(d),
            generation: 0,
        }
    }

    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    /// `sigma^2 C`, the covariance actually sampled.
    pub fn covariance(&self) -> DMatrix<f64> {
        &self.cov * (self.sigma * self.sigma)
    }

    pub fn snapshot(&self) -> StateSnapshot {
        let d = self.dimension();
        StateSnapshot {
            mean: self.mean.iter().copied().collect(),
            cov: (0..d)
                .map(|i| (0..d).map(|j| self.cov[(i, j)]).collect())
                .collect(),
            sigma: self.sigma,
            path_c: self.path_c.iter().copied().collect(),
            path_sigma: self.path_sigma.iter().copied().collect(),
            generation: self.generation,
        }
    }
}

/// JSON form of a [`DistributionState`]; `cov` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub sigma: f64,
    pub path_c: Vec<f64>,
    pub path_sigma: Vec<f64>,
    pub generation: u64,
}

impl StateSnapshot {
    pub fn from_json(text: &str) -> Result<Self, CmaError> {
        serde_json::from_str(text).map_err(|e| CmaError::Snapshot(e.to_string()))
    }

    /// Validates shapes and finiteness and rebuilds the state.
    pub fn to_state(&self) -> Result<DistributionState, CmaError> {
        let d = self.mean.len();
        if d == 0 {
            return Err(CmaError::Snapshot("empty mean".into()));
        }
        if self.path_c.len() != d || self.path_sigma.len() != d || self.cov.len() != d {
            return Err(CmaError::Snapshot("inconsistent lengths".into()));
        }
        if self.cov.iter().any(|row| row.len() != d) {
            return Err(CmaError::Snapshot("covariance is not square".into()));
        }
        let all = self
            .mean
            .iter()
            .chain(&self.path_c)
            .chain(&self.path_sigma)
            .chain(self.cov.iter().flatten());
        if all.clone().any(|v| !v.is_finite()) || !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(CmaError::Snapshot("non-finite or non-positive entry".into()));
        }
        Ok(DistributionState {
            mean: DVector::from_column_slice(&self.mean),
            cov: DMatrix::from_fn(d, d, |i, j| self.cov[i][j]),
            sigma: self.sigma,
            path_c: DVector::from_column_slice(&self.path_c),
            path_sigma: DVector::from_column_slice(&self.path_sigma),
            generation: self.generation,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopulationConfig {
    /// Samples per generation, `M`.
    pub population: usize,
    /// Selected best samples, `K`.
    pub selected: usize,
}

/// `M = 4 + 3 floor(ln D)`, `K = floor(M / 2)`.
pub fn default_population(dimension: usize) -> PopulationConfig {
    let d = dimension.max(1) as f64;
    let population = 4 + 3 * d.ln().floor() as usize;
    PopulationConfig {
        population,
        selected: population / 2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmaHyperparams {
    pub weights: Vec<f64>,
    pub mu_eff: f64,
    pub c1: f64,
    pub c_sigma: f64,
    pub c_c: f64,
    pub c_mu: f64,
    pub d_sigma: f64,
}

/// Default hyperparameters for `dimension` and `selected` recombination weights.
pub fn default_hyperparams(dimension: usize, selected: usize) -> CmaHyperparams {
    let d = dimension as f64;
    let k = selected as f64;
    let raw: Vec<f64> = (1..=selected).map(|i| (k + 0.5).ln() - (i as f64).ln()).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
    let c1 = 2.0 / ((d + 1.3).powi(2) + mu_eff);
    let c_sigma = (mu_eff + 2.0) / (d + mu_eff + 5.0);
    let c_mu = (1.0 - c1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((d + 2.0).powi(2) + mu_eff));
    let c_c = (4.0 + mu_eff / d) / (d + 4.0 + 2.0 * mu_eff / d);
    let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (d + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
    CmaHyperparams {
        weights,
        mu_eff,
        c1,
        c_sigma,
        c_c,
        c_mu,
        d_sigma,
    }
}

/// Approximate `E||N(0, I_D)||`.
pub fn chi_mean(dimension: usize) -> f64 {
    let d = dimension as f64;
    d.sqrt() * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d))
}

/// Symmetrizes `m` and raises every eigenvalue to at least [`EIGEN_FLOOR`].
pub fn repair_shape(m: &DMatrix<f64>) -> Result<DMatrix<f64>, CmaError> {
    let sym = (m + m.transpose()) * 0.5;
    if sym.iter().any(|v| !v.is_finite()) {
        return Err(CmaError::NonFinite("shape matrix"));
    }
    let eig = SymmetricEigen::new(sym.clone());
    if eig.eigenvalues.iter().all(|&l| l >= EIGEN_FLOOR) {
        return Ok(sym);
    }
    let floored = eig.eigenvalues.map(|l| l.max(EIGEN_FLOOR));
    let rebuilt = &eig.eigenvectors * DMatrix::from_diagonal(&floored) * eig.eigenvectors.transpose();
    Ok((&rebuilt + rebuilt.transpose()) * 0.5)
}

/// Eigendecomposition with eigenvalues floored; fails on non-finite input.
pub(crate) fn floored_eigen(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>), CmaError> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(CmaError::NonFinite("eigendecomposition input"));
    }
    let eig = SymmetricEigen::new((m + m.transpose()) * 0.5);
    let values = eig.eigenvalues.map(|l| l.max(EIGEN_FLOOR));
    if values.iter().any(|v| !v.is_finite()) || eig.eigenvectors.iter().any(|v| !v.is_finite()) {
        return Err(CmaError::NonFinite("eigendecomposition"));
    }
    Ok((eig.eigenvectors, values))
}
