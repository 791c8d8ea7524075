use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{floored_eigen, CmaError, DistributionState};

/// Draws per point before falling back to clamping the last draw.
pub const MAX_REJECTIONS: usize = 1000;

/// `N(mean, sigma^2 C)` truncated to the unit cube by rejection.
#[derive(Debug, Clone)]
pub struct TruncatedNormal {
    mean: DVector<f64>,
    factor: DMatrix<f64>,
}

impl TruncatedNormal {
    pub fn new(state: &DistributionState) -> Result<Self, CmaError> {
        let (vectors, values) = floored_eigen(&state.cov)?;
        let scale = values.map(|l| l.sqrt() * state.sigma);
        let factor = vectors * DMatrix::from_diagonal(&scale);
        if factor.iter().any(|v| !v.is_finite()) {
            return Err(CmaError::NonFinite("sampling factor"));
        }
        Ok(Self {
            mean: state.mean.clone(),
            factor,
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.mean.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.mean + &self.factor * z
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let mut x = self.draw(rng);
        for _ in 1..MAX_REJECTIONS {
            if in_unit_cube(&x) {
                return x;
            }
            x = self.draw(rng);
        }
        x.apply(|v| *v = v.clamp(0.0, 1.0));
        x
    }
}

fn in_unit_cube(x: &DVector<f64>) -> bool {
    x.iter().all(|v| (0.0..=1.0).contains(v))
}

/// `count` independent draws from the truncated search distribution.
pub fn sample_population<R: Rng + ?Sized>(
    state: &DistributionState,
    count: usize,
    rng: &mut R,
) -> Result<Vec<DVector<f64>>, CmaError> {
    let dist = TruncatedNormal::new(state)?;
    Ok((0..count).map(|_| dist.sample(rng)).collect())
}

/// Indices of the `k` smallest values, ascending; ties keep sample order.
pub fn select_best(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order.truncate(k);
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vanishing_step_returns_the_mean() {
        let state = DistributionState::new(DVector::from_vec(vec![0.3, 0.6]), 1e-300);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for x in sample_population(&state, 20, &mut rng).unwrap() {
            assert_eq!(x, state.mean);
        }
    }

    #[test]
    fn empirical_mean_matches_center() {
        let state = DistributionState::new(DVector::from_vec(vec![0.5, 0.5]), 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let xs = sample_population(&state, 100_000, &mut rng).unwrap();
        let mean = xs.iter().fold(DVector::zeros(2), |acc, x| acc + x) / xs.len() as f64;
        for i in 0..2 {
            assert!((mean[i] - 0.5).abs() < 0.005);
        }
    }

    #[test]
    fn corner_mean_stays_in_cube() {
        let state = DistributionState::new(DVector::from_vec(vec![0.0, 0.0]), 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for x in sample_population(&state, 5000, &mut rng).unwrap() {
            assert!(in_unit_cube(&x));
        }
    }

    #[test]
    fn clamp_fallback_when_mass_is_outside() {
        // Mean far outside the cube: essentially every draw is rejected.
        let state = DistributionState::new(DVector::from_vec(vec![50.0]), 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = sample_population(&state, 1, &mut rng).unwrap().remove(0);
        assert_eq!(x[0], 1.0);
    }

    #[test]
    fn degenerate_shape_is_an_error() {
        let mut state = DistributionState::new(DVector::from_vec(vec![0.5, 0.5]), 0.2);
        state.cov[(0, 0)] = f64::INFINITY;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(sample_population(&state, 1, &mut rng).is_err());
    }

    #[test]
    fn selection_order_and_ties() {
        assert_eq!(select_best(&[3.0, 1.0, 2.0], 2), vec![1, 2]);
        assert_eq!(select_best(&[5.0, 5.0, 5.0], 2), vec![0, 1]);
        assert_eq!(select_best(&[4.0, 2.0, 3.0, 1.0], 4), vec![3, 1, 2, 0]);
    }
}
