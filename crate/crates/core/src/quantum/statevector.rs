use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;

use super::QuantumError;
use crate::accounting::OracleCounter;
use crate::testbed::{Grid, GridValues};

/// Default refusal threshold for statevector length.
pub const DEFAULT_MAX_AMPLITUDES: u64 = 1 << 26;

/// Eigenvalue floor applied to the covariance before inversion.
pub const COVARIANCE_FLOOR: f64 = 1e-12;

/// Tolerated deviation of the Euclidean norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-9;

const CHUNK: usize = 1 << 14;

/// Real amplitudes over every point of a grid.
///
/// Every operator used here is real orthogonal and every prepared state is
/// real, so no imaginary parts are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    grid: Grid,
    amps: Vec<f64>,
}

fn check_size(grid: Grid, cap: u64) -> Result<usize, QuantumError> {
    let n = grid.total_points();
    if n > cap {
        return Err(QuantumError::TooLarge { amplitudes: n, cap });
    }
    Ok(n as usize)
}

impl Statevector {
    /// Builds a state from raw amplitudes; they must be finite and unit-norm.
    pub fn from_amplitudes(grid: Grid, amps: Vec<f64>) -> Result<Self, QuantumError> {
        if amps.len() as u64 != grid.total_points() {
            return Err(QuantumError::Length {
                expected: grid.total_points(),
                got: amps.len() as u64,
            });
        }
        let state = Self { grid, amps };
        state.check_norm()?;
        Ok(state)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Sum in index order, so the result never depends on scheduling.
    pub fn inner(&self, other: &Statevector) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a * a).collect()
    }

    /// Probability mass on points with value strictly below `theta`.
    pub fn good_mass(&self, values: &GridValues, theta: f64) -> f64 {
        self.amps
            .iter()
            .zip(values.values())
            .filter(|(_, &v)| v < theta)
            .map(|(a, _)| a * a)
            .sum()
    }

    pub fn check_norm(&self) -> Result<(), QuantumError> {
        if self.amps.iter().any(|a| !a.is_finite()) {
            return Err(QuantumError::NonFinite);
        }
        let n = self.norm();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(QuantumError::NormDrift(n));
        }
        Ok(())
    }

    /// Little-endian dump: `u64` amplitude count, then each amplitude as `f64`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 8 * self.amps.len());
        out.extend_from_slice(&(self.amps.len() as u64).to_le_bytes());
        for a in &self.amps {
            out.extend_from_slice(&a.to_le_bytes());
        }
        out
    }

    /// Parses a dump produced by [`Statevector::to_bytes`] for the given grid.
    pub fn from_bytes(grid: Grid, bytes: &[u8]) -> Result<Self, QuantumError> {
        let amps = decode_amplitudes(bytes)?;
        Self::from_amplitudes(grid, amps)
    }
}

/// Decodes the length-prefixed amplitude dump without interpreting it.
pub fn decode_amplitudes(bytes: &[u8]) -> Result<Vec<f64>, QuantumError> {
    let (head, body) = bytes
        .split_first_chunk::<8>()
        .ok_or(QuantumError::Truncated { needed: 8, got: bytes.len() as u64 })?;
    let count = u64::from_le_bytes(*head);
    let needed = count.checked_mul(8).ok_or(QuantumError::Truncated { needed: u64::MAX, got: bytes.len() as u64 })?;
    if body.len() as u64 != needed {
        return Err(QuantumError::Truncated {
            needed: needed.saturating_add(8),
            got: bytes.len() as u64,
        });
    }
    Ok(body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunks are 8 bytes")))
        .collect())
}

/// Equal amplitudes `2^(-D tau / 2)` over the whole grid.
pub fn prepare_uniform_state(grid: Grid, cap: u64) -> Result<Statevector, QuantumError> {
    let n = check_size(grid, cap)?;
    let a = (-(grid.index_bits() as f64) / 2.0).exp2();
    Ok(Statevector {
        grid,
        amps: vec![a; n],
    })
}

/// Amplitudes proportional to `sqrt(exp(-(x - mean)^T cov^-1 (x - mean) / 2))`.
///
/// The covariance is symmetrized and its eigenvalues floored before
/// inversion. Log-amplitudes are shifted by their maximum before
/// exponentiation so a narrow distribution far from every grid point still
/// normalizes.
pub fn prepare_gaussian_state(
    grid: Grid,
    mean: &[f64],
    cov: &DMatrix<f64>,
    cap: u64,
) -> Result<Statevector, QuantumError> {
    let n = check_size(grid, cap)?;
    let d = grid.dimension();
    if mean.len() != d || cov.nrows() != d || cov.ncols() != d {
        return Err(QuantumError::Dimension {
            expected: d,
            got: mean.len(),
        });
    }
    if cov.iter().chain(mean).any(|v| !v.is_finite()) {
        return Err(QuantumError::NotPositiveDefinite);
    }
    let eig = SymmetricEigen::new((cov + cov.transpose()) * 0.5);
    if eig.eigenvalues.max() <= 0.0 {
        return Err(QuantumError::NotPositiveDefinite);
    }
    let inv_vals = eig.eigenvalues.map(|l| 1.0 / l.max(COVARIANCE_FLOOR));
    let precision = &eig.eigenvectors * DMatrix::from_diagonal(&inv_vals) * eig.eigenvectors.transpose();
    if precision.iter().any(|v| !v.is_finite()) {
        return Err(QuantumError::NotPositiveDefinite);
    }
    let center = DVector::from_column_slice(mean);

    let mut amps = vec![0.0; n];
    amps.par_chunks_mut(CHUNK).enumerate().for_each(|(chunk, out)| {
        let mut x = vec![0.0; d];
        let mut diff = DVector::zeros(d);
        for (k, slot) in out.iter_mut().enumerate() {
            grid.fill_point((chunk * CHUNK + k) as u64, &mut x);
            for i in 0..d {
                diff[i] = x[i] - center[i];
            }
            *slot = -0.25 * diff.dot(&(&precision * &diff));
        }
    });
    let peak = amps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    amps.par_iter_mut().for_each(|a| *a = (*a - peak).exp());
    let norm = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(QuantumError::NonFinite);
    }
    amps.par_iter_mut().for_each(|a| *a /= norm);
    Ok(Statevector { grid, amps })
}

/// Negates every amplitude whose grid value is strictly below `theta`.
pub fn oracle_sign_flip(state: &mut Statevector, values: &GridValues, theta: f64) {
    state
        .amps
        .par_chunks_mut(CHUNK)
        .zip(values.values().par_chunks(CHUNK))
        .for_each(|(a, v)| {
            for (amp, &val) in a.iter_mut().zip(v) {
                if val < theta {
                    *amp = -*amp;
                }
            }
        });
}

/// `state <- 2 <state, psi0> psi0 - state`.
pub fn reflect_about_initial(state: &mut Statevector, psi0: &Statevector) {
    let overlap = 2.0 * state.inner(psi0);
    state
        .amps
        .par_chunks_mut(CHUNK)
        .zip(psi0.amps.par_chunks(CHUNK))
        .for_each(|(s, p)| {
            for (a, &b) in s.iter_mut().zip(p) {
                *a = overlap * b - *a;
            }
        });
}

/// Applies `rotations` Grover iterations to a copy of `psi0` and charges them.
pub fn grover_power(
    psi0: &Statevector,
    values: &GridValues,
    theta: f64,
    rotations: u64,
    counter: &mut OracleCounter,
) -> Result<Statevector, QuantumError> {
    let mut state = psi0.clone();
    rotate_in_place(&mut state, psi0, values, theta, rotations)?;
    counter.quantum_calls += rotations;
    Ok(state)
}

/// Uncounted iteration loop; `state` must start as a copy of `psi0`.
pub(crate) fn rotate_in_place(
    state: &mut Statevector,
    psi0: &Statevector,
    values: &GridValues,
    theta: f64,
    rotations: u64,
) -> Result<(), QuantumError> {
    for _ in 0..rotations {
        oracle_sign_flip(state, values, theta);
        reflect_about_initial(state, psi0);
        state.check_norm()?;
    }
    Ok(())
}

/// Samples an index with probability `amplitude^2` from a single uniform draw.
pub fn measure<R: Rng + ?Sized>(state: &Statevector, rng: &mut R) -> u64 {
    let total: f64 = state.amps.iter().map(|a| a * a).sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (j, a) in state.amps.iter().enumerate() {
        let p = a * a;
        if p > 0.0 {
            acc += p;
            last_nonzero = j;
            if acc > target {
                return j as u64;
            }
        }
    }
    last_nonzero as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(d: usize, b: u32) -> Grid {
        Grid::new(d, b).unwrap()
    }

    fn table(g: Grid, v: Vec<f64>) -> GridValues {
        GridValues::from_values(g, v).unwrap()
    }

    #[test]
    fn uniform_two_point_state() {
        let s = prepare_uniform_state(grid(1, 1), 16).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(s.amplitudes().iter().all(|a| (a - h).abs() < 1e-16));
    }

    #[test]
    fn uniform_norm_is_exact() {
        let s = prepare_uniform_state(grid(2, 8), DEFAULT_MAX_AMPLITUDES).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15 * 4.0);
    }

    #[test]
    fn memory_cap_is_enforced() {
        assert!(matches!(
            prepare_uniform_state(grid(3, 9), DEFAULT_MAX_AMPLITUDES),
            Err(QuantumError::TooLarge { .. })
        ));
    }

    #[test]
    fn flat_gaussian_is_uniform() {
        let g = grid(2, 4);
        let cov = DMatrix::identity(2, 2) * 1e12;
        let s = prepare_gaussian_state(g, &[0.3, 0.8], &cov, 1 << 20).unwrap();
        let u = prepare_uniform_state(g, 1 << 20).unwrap();
        let dev = s.amplitudes().iter().zip(u.amplitudes()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-6, "{dev}");
    }

    #[test]
    fn gaussian_symmetric_and_unimodal() {
        let cov = DMatrix::from_element(1, 1, 0.25);
        let s = prepare_gaussian_state(grid(1, 2), &[0.5], &cov, 16).unwrap();
        let a = s.amplitudes();
        assert!((a[0] - a[3]).abs() < 1e-15 && (a[1] - a[2]).abs() < 1e-15);
        assert!(a[1] > a[0]);
        assert!(a.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn gaussian_matches_discrete_density() {
        let g = grid(1, 8);
        let var = 0.01;
        let cov = DMatrix::from_element(1, 1, var);
        let s = prepare_gaussian_state(g, &[0.5], &cov, 1 << 10).unwrap();
        let dens: Vec<f64> = (0..256)
            .map(|j| {
                let x = (j as f64 + 0.5) / 256.0;
                (-(x - 0.5) * (x - 0.5) / (2.0 * var)).exp()
            })
            .collect();
        let z: f64 = dens.iter().sum();
        for (p, q) in s.probabilities().iter().zip(&dens) {
            assert!((p - q / z).abs() < 1e-12);
        }
    }

    #[test]
    fn narrow_gaussian_off_grid_still_normalizes() {
        let cov = DMatrix::identity(2, 2) * 1e-10;
        let s = prepare_gaussian_state(grid(2, 3), &[-5.0, 9.0], &cov, 1 << 10).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_rejects_bad_covariance() {
        let g = grid(2, 2);
        assert!(prepare_gaussian_state(g, &[0.5, 0.5], &DMatrix::from_element(2, 2, f64::NAN), 64).is_err());
        assert!(prepare_gaussian_state(g, &[0.5, 0.5], &(-DMatrix::identity(2, 2)), 64).is_err());
        assert!(prepare_gaussian_state(g, &[0.5], &DMatrix::identity(2, 2), 64).is_err());
    }

    #[test]
    fn sign_flip_cases() {
        let g = grid(1, 2);
        let t = table(g, vec![3.0, 1.0, 2.0, 4.0]);
        let mut s = prepare_uniform_state(g, 16).unwrap();
        oracle_sign_flip(&mut s, &t, 2.5);
        let signs: Vec<f64> = s.amplitudes().iter().map(|a| a.signum()).collect();
        assert_eq!(signs, vec![1.0, -1.0, -1.0, 1.0]);

        let mut s = prepare_uniform_state(g, 16).unwrap();
        oracle_sign_flip(&mut s, &t, 1.0);
        assert!(s.amplitudes().iter().all(|&a| a > 0.0));

        let before = prepare_uniform_state(g, 16).unwrap();
        let mut s = before.clone();
        oracle_sign_flip(&mut s, &t, 10.0);
        assert!(s.amplitudes().iter().all(|&a| a < 0.0));
        assert_eq!(s.probabilities(), before.probabilities());
    }

    #[test]
    fn reflection_fixed_point_and_orthogonal() {
        let g = grid(1, 1);
        let psi0 = prepare_uniform_state(g, 16).unwrap();
        let mut s = psi0.clone();
        reflect_about_initial(&mut s, &psi0);
        for (a, b) in s.amplitudes().iter().zip(psi0.amplitudes()) {
            assert!((a - b).abs() < 1e-15);
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut o = Statevector::from_amplitudes(g, vec![h, -h]).unwrap();
        reflect_about_initial(&mut o, &psi0);
        assert_eq!(o.amplitudes(), &[-h, h]);
    }

    #[test]
    fn reflection_matches_dense_matrix() {
        let g = grid(1, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let unit = |rng: &mut ChaCha8Rng| {
            let v: Vec<f64> = (0..16).map(|_| rng.random::<f64>() - 0.5).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / n).collect::<Vec<_>>()
        };
        let p = unit(&mut rng);
        let x = unit(&mut rng);
        let psi0 = Statevector::from_amplitudes(g, p.clone()).unwrap();
        let mut s = Statevector::from_amplitudes(g, x.clone()).unwrap();
        reflect_about_initial(&mut s, &psi0);
        let dense = DMatrix::from_fn(16, 16, |i, j| 2.0 * p[i] * p[j] - if i == j { 1.0 } else { 0.0 });
        let want = dense * DVector::from_vec(x);
        for (a, b) in s.amplitudes().iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_rotations_and_counting() {
        let g = grid(1, 4);
        let t = table(g, (0..16).map(f64::from).collect());
        let psi0 = prepare_uniform_state(g, 64).unwrap();
        let mut c = OracleCounter::default();
        assert_eq!(grover_power(&psi0, &t, 3.0, 0, &mut c).unwrap(), psi0);
        assert_eq!(c.quantum_calls, 0);
        grover_power(&psi0, &t, 3.0, 4, &mut c).unwrap();
        assert_eq!(c.quantum_calls, 4);
    }

    #[test]
    fn single_marked_point_follows_grover_law() {
        let g = grid(1, 4);
        let mut v = vec![1.0; 16];
        v[5] = 0.0;
        let t = table(g, v);
        let psi0 = prepare_uniform_state(g, 64).unwrap();
        let angle = (0.25f64).asin();
        for r in 0..=5u64 {
            let mut c = OracleCounter::default();
            let s = grover_power(&psi0, &t, 0.5, r, &mut c).unwrap();
            let want = ((2 * r + 1) as f64 * angle).sin().powi(2);
            assert!((s.good_mass(&t, 0.5) - want).abs() < 1e-10);
        }
    }

    #[test]
    fn measurement_edge_cases() {
        let g = grid(1, 3);
        let mut amps = vec![0.0; 8];
        amps[6] = 1.0;
        let s = Statevector::from_amplitudes(g, amps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..1000).all(|_| measure(&s, &mut rng) == 6));

        let mut amps = vec![0.0; 8];
        amps[1] = 0.6;
        amps[4] = 0.8;
        let s = Statevector::from_amplitudes(g, amps).unwrap();
        for _ in 0..100_000 {
            let j = measure(&s, &mut rng);
            assert!(j == 1 || j == 4);
        }

        let u = prepare_uniform_state(grid(1, 1), 4).unwrap();
        let zeros = (0..100_000).filter(|_| measure(&u, &mut rng) == 0).count();
        assert!((zeros as f64 / 1e5 - 0.5).abs() < 0.01);
    }

    #[test]
    fn measure_is_seed_deterministic() {
        let s = prepare_uniform_state(grid(2, 3), 64).unwrap();
        let a: Vec<u64> = {
            let mut r = ChaCha8Rng::seed_from_u64(5);
            (0..50).map(|_| measure(&s, &mut r)).collect()
        };
        let b: Vec<u64> = {
            let mut r = ChaCha8Rng::seed_from_u64(5);
            (0..50).map(|_| measure(&s, &mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn dump_round_trip_and_rejects_garbage() {
        let g = grid(1, 3);
        let s = prepare_gaussian_state(g, &[0.4], &DMatrix::from_element(1, 1, 0.05), 64).unwrap();
        let bytes = s.to_bytes();
        assert_eq!(&bytes[..8], &8u64.to_le_bytes());
        assert_eq!(Statevector::from_bytes(g, &bytes).unwrap(), s);
        assert!(decode_amplitudes(&bytes[..20]).is_err());
        assert!(decode_amplitudes(&[1, 2, 3]).is_err());
        assert!(Statevector::from_bytes(grid(1, 2), &bytes).is_err());
        let mut huge = u64::MAX.to_le_bytes().to_vec();
        huge.extend_from_slice(&[0; 8]);
        assert!(decode_amplitudes(&huge).is_err());
    }
}
