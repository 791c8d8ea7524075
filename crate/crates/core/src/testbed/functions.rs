//! The benchmark landscapes and the scaled-domain wrapper around them.
//!
//! Each function is stated in raw coordinates over its native box and is
//! exposed to the optimizers on `[0, 1]^D` through an affine map. Some raw
//! forms differ from the usual textbook variants: schwefel and ackley carry
//! no constant offsets and griewank uses `cos(sqrt|x|)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::TestbedError;

/// Names accepted by [`objective`], in table order.
pub const FUNCTION_NAMES: [&str; 9] = [
    "rastrigin",
    "ackley",
    "styblinski_tang",
    "schwefel",
    "griewank",
    "alpine01",
    "alpine02",
    "deflected_corrugated_spring",
    "wavy",
];

type RawFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// How a function decomposes over coordinates.
///
/// `Coordinatewise` lists per-coordinate terms `g_k` such that the function
/// is non-decreasing in every `sum_i g_k(x_i)`. A grid point that minimizes
/// every `g_k` in every coordinate at once is then a global grid minimizer,
/// which lets the optimum be located on grids far too large to scan.
#[derive(Clone, Copy)]
pub enum Structure {
    Coordinatewise(&'static [fn(f64) -> f64]),
    Opaque,
}

/// A named objective on a box, evaluated through the unit cube.
#[derive(Clone)]
pub struct ObjectiveSpec {
    name: String,
    lower: Vec<f64>,
    upper: Vec<f64>,
    raw: RawFn,
    structure: Structure,
}

impl fmt::Debug for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveSpec")
            .field("name", &self.name)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .finish_non_exhaustive()
    }
}

/// Serializable description of a spec (no evaluator).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionDescriptor {
    pub name: String,
    pub dimension: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ObjectiveSpec {
    /// In-process extension point for functions outside the built-in registry.
    pub fn custom<F>(
        name: impl Into<String>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        f: F,
    ) -> Result<Self, TestbedError>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::build(name.into(), lower, upper, Arc::new(f), Structure::Opaque)
    }

    fn build(
        name: String,
        lower: Vec<f64>,
        upper: Vec<f64>,
        raw: RawFn,
        structure: Structure,
    ) -> Result<Self, TestbedError> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(TestbedError::InvalidDomain(format!(
                "bounds of length {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(i) = (0..lower.len()).find(|&i| lower[i].is_nan() || upper[i].is_nan() || lower[i] >= upper[i]) {
            return Err(TestbedError::InvalidDomain(format!(
                "dimension {i}: lower {} is not below upper {}",
                lower[i], upper[i]
            )));
        }
        Ok(Self {
            name,
            lower,
            upper,
            raw,
            structure,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    /// Maps a point of the unit cube to raw function coordinates.
    pub fn to_raw(&self, scaled: &[f64]) -> Vec<f64> {
        scaled
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&x, (&lo, &hi))| lo + x * (hi - lo))
            .collect()
    }

    pub fn to_scaled(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&x, (&lo, &hi))| (x - lo) / (hi - lo))
            .collect()
    }

    /// Evaluates the function at a point of `[0, 1]^D`.
    pub fn evaluate(&self, scaled: &[f64]) -> f64 {
        debug_assert_eq!(scaled.len(), self.dimension());
        (self.raw)(&self.to_raw(scaled))
    }

    /// Evaluates the function directly in raw coordinates.
    pub fn evaluate_raw(&self, raw: &[f64]) -> f64 {
        (self.raw)(raw)
    }

    pub fn descriptor(&self) -> FunctionDescriptor {
        FunctionDescriptor {
            name: self.name.clone(),
            dimension: self.dimension(),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }
    }
}

/// Looks up a built-in function by its registry name.
pub fn objective(name: &str, dimension: usize) -> Result<ObjectiveSpec, TestbedError> {
    if dimension == 0 {
        return Err(TestbedError::InvalidDomain("dimension must be positive".into()));
    }
    let (lo, hi, raw, structure): (f64, f64, RawFn, Structure) = match name {
        "rastrigin" => (-5.12, 5.12, Arc::new(rastrigin), Structure::Coordinatewise(&[rastrigin_term])),
        "ackley" => (-4.0, 4.0, Arc::new(ackley), Structure::Coordinatewise(&[square, neg_cos_2pi])),
        "styblinski_tang" => (-5.0, 5.0, Arc::new(styblinski_tang), Structure::Coordinatewise(&[styblinski_term])),
        "schwefel" => (-500.0, 500.0, Arc::new(schwefel), Structure::Coordinatewise(&[schwefel_term])),
        "griewank" => (-512.0, 512.0, Arc::new(griewank), Structure::Opaque),
        "alpine01" => (-10.0, 10.0, Arc::new(alpine01), Structure::Coordinatewise(&[alpine01_term])),
        "alpine02" => (0.0, 10.0, Arc::new(alpine02), Structure::Opaque),
        "deflected_corrugated_spring" => (0.0, 10.0, Arc::new(deflected_corrugated_spring), Structure::Opaque),
        "wavy" => (-PI, PI, Arc::new(wavy), Structure::Coordinatewise(&[wavy_term])),
        other => return Err(TestbedError::UnknownFunction(other.to_string())),
    };
    ObjectiveSpec::build(
        name.to_string(),
        vec![lo; dimension],
        vec![hi; dimension],
        raw,
        structure,
    )
}

/// Descriptors of every registry function at the given dimension.
pub fn registry(dimension: usize) -> Vec<FunctionDescriptor> {
    FUNCTION_NAMES
        .iter()
        .map(|n| objective(n, dimension).expect("registry names are valid").descriptor())
        .collect()
}

fn square(x: f64) -> f64 {
    x * x
}

fn neg_cos_2pi(x: f64) -> f64 {
    -(2.0 * PI * x).cos()
}

fn rastrigin_term(x: f64) -> f64 {
    x * x - 10.0 * (2.0 * PI * x).cos()
}

fn styblinski_term(x: f64) -> f64 {
    0.5 * (x.powi(4) - 16.0 * x * x + 5.0 * x)
}

fn schwefel_term(x: f64) -> f64 {
    x * x.abs().sqrt().sin()
}

fn alpine01_term(x: f64) -> f64 {
    (x * x.sin() + 0.1 * x).abs()
}

fn wavy_term(x: f64) -> f64 {
    -(10.0 * x).cos() * (-x * x / 2.0).exp()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    x.iter().map(|&v| rastrigin_term(v)).sum()
}

pub fn ackley(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
    let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
    -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp()
}

pub fn styblinski_tang(x: &[f64]) -> f64 {
    x.iter().map(|&v| styblinski_term(v)).sum()
}

pub fn schwefel(x: &[f64]) -> f64 {
    x.iter().map(|&v| schwefel_term(v)).sum()
}

/// `sqrt` is taken of `|x_i|` so the listed form stays real on the negative half of the box.
pub fn griewank(x: &[f64]) -> f64 {
    let sq = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let prod = x.iter().map(|v| v.abs().sqrt().cos()).product::<f64>();
    sq - prod
}

pub fn alpine01(x: &[f64]) -> f64 {
    x.iter().map(|&v| alpine01_term(v)).sum()
}

pub fn alpine02(x: &[f64]) -> f64 {
    -x.iter().map(|v| v.sqrt() * v.sin()).product::<f64>()
}

pub fn deflected_corrugated_spring(x: &[f64]) -> f64 {
    let radius = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ripple = (5.0 * radius).cos();
    0.1 * x.iter().map(|v| v * v - ripple).sum::<f64>()
}

pub fn wavy(x: &[f64]) -> f64 {
    x.iter().map(|&v| wavy_term(v)).sum()
}
