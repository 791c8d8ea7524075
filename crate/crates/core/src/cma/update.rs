use nalgebra::{DMatrix, DVector};

use super::{chi_mean, floored_eigen, repair_shape, CmaError, CmaHyperparams, DistributionState};

/// One CMA-ES generation from the selected points `selected`, best first.
///
/// Mean, conjugate path, step size, `h_sigma`, path, and shape are updated
/// in that order. The shape is symmetrized and eigenvalue-floored afterward.
pub fn cma_update(
    state: &DistributionState,
    selected: &[DVector<f64>],
    hp: &CmaHyperparams,
) -> Result<DistributionState, CmaError> {
    let d = state.dimension();
    if selected.len() != hp.weights.len() {
        return Err(CmaError::SelectionSize {
            expected: hp.weights.len(),
            got: selected.len(),
        });
    }
    if let Some(x) = selected.iter().find(|x| x.len() != d) {
        return Err(CmaError::Dimension {
            expected: d,
            got: x.len(),
        });
    }

    let steps: Vec<DVector<f64>> = selected
        .iter()
        .map(|x| (x - &state.mean) / state.sigma)
        .collect();
    let weighted_step = weighted_sum(&hp.weights, &steps, d);
    let mean = weighted_sum(&hp.weights, selected, d);

    let (vectors, values) = floored_eigen(&state.cov)?;
    let inv_sqrt = &vectors * DMatrix::from_diagonal(&values.map(|l| 1.0 / l.sqrt())) * vectors.transpose();
    let cs = hp.c_sigma;
    let path_sigma = &state.path_sigma * (1.0 - cs)
        + (&inv_sqrt * &weighted_step) * (cs * (2.0 - cs) * hp.mu_eff).sqrt();

    let chi = chi_mean(d);
    let ps_norm = path_sigma.norm();
    let sigma = state.sigma * ((cs / hp.d_sigma) * (ps_norm / chi - 1.0)).exp();

    let decay = 1.0 - (1.0 - cs).powf(2.0 * (state.generation as f64 + 1.0));
    let h_sigma = if ps_norm / decay.sqrt() < (1.4 + 2.0 / (d as f64 + 1.0)) * chi {
        1.0
    } else {
        0.0
    };

    let cc = hp.c_c;
    let path_c = &state.path_c * (1.0 - cc) + &weighted_step * (h_sigma * (cc * (2.0 - cc) * hp.mu_eff).sqrt());

    let stall = (1.0 - h_sigma) * cc * (2.0 - cc);
    let weight_sum: f64 = hp.weights.iter().sum();
    let mut cov = &state.cov * (1.0 + hp.c1 * stall - hp.c1 - hp.c_mu * weight_sum);
    cov += &path_c * path_c.transpose() * hp.c1;
    for (w, z) in hp.weights.iter().zip(&steps) {
        cov += z * z.transpose() * (hp.c_mu * w);
    }

    let finite = mean.iter().chain(path_sigma.iter()).chain(path_c.iter()).chain(cov.iter()).all(|v| v.is_finite());
    if !finite || !sigma.is_finite() || sigma <= 0.0 {
        return Err(CmaError::NonFinite("update"));
    }
    Ok(DistributionState {
        mean,
        cov: repair_shape(&cov)?,
        sigma,
        path_c,
        path_sigma,
        generation: state.generation + 1,
    })
}

fn weighted_sum(weights: &[f64], xs: &[DVector<f64>], d: usize) -> DVector<f64> {
    weights
        .iter()
        .zip(xs)
        .fold(DVector::zeros(d), |acc, (w, x)| acc + x * *w)
}

#[cfg(test)]
mod tests {
    use super::super::default_hyperparams;
    use super::*;
    use proptest::prelude::*;

    fn golden_state() -> DistributionState {
        DistributionState {
            mean: DVector::from_vec(vec![0.4, 0.6]),
            cov: DMatrix::from_row_slice(2, 2, &[1.2, 0.3, 0.3, 0.8]),
            sigma: 0.25,
            path_c: DVector::from_vec(vec![0.1, -0.2]),
            path_sigma: DVector::from_vec(vec![0.05, 0.3]),
            generation: 3,
        }
    }

    fn golden_samples() -> Vec<DVector<f64>> {
        vec![
            DVector::from_vec(vec![0.5, 0.45]),
            DVector::from_vec(vec![0.2, 0.9]),
        ]
    }

    /// The update step written out with plain arrays for the 2x2 case; shares no code
    /// with the implementation. `C^(-1/2)` uses the closed-form square root
    /// `sqrt(A) = (A + sqrt(det A) I) / sqrt(tr A + 2 sqrt(det A))`.
    #[allow(clippy::type_complexity)]
    fn oracle_step(
        m: [f64; 2],
        c: [[f64; 2]; 2],
        s: f64,
        pc: [f64; 2],
        ps: [f64; 2],
        g: f64,
        x: [[f64; 2]; 2],
    ) -> ([f64; 2], [[f64; 2]; 2], f64, [f64; 2], [f64; 2], f64) {
        let d = 2.0;
        let l = [(2.5f64).ln() - 1f64.ln(), (2.5f64).ln() - 2f64.ln()];
        let w = [l[0] / (l[0] + l[1]), l[1] / (l[0] + l[1])];
        let mu_eff = 1.0 / (w[0] * w[0] + w[1] * w[1]);
        let c1 = 2.0 / ((d + 1.3) * (d + 1.3) + mu_eff);
        let cs = (mu_eff + 2.0) / (d + mu_eff + 5.0);
        let cmu = f64::min(1.0 - c1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((d + 2.0) * (d + 2.0) + mu_eff));
        let cc = (4.0 + mu_eff / d) / (d + 4.0 + 2.0 * mu_eff / d);
        let ds = 1.0 + 2.0 * f64::max(0.0, ((mu_eff - 1.0) / (d + 1.0)).sqrt() - 1.0) + cs;
        let chi = d.sqrt() * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));

        let z = [
            [(x[0][0] - m[0]) / s, (x[0][1] - m[1]) / s],
            [(x[1][0] - m[0]) / s, (x[1][1] - m[1]) / s],
        ];
        let zw = [w[0] * z[0][0] + w[1] * z[1][0], w[0] * z[0][1] + w[1] * z[1][1]];
        let mean = [w[0] * x[0][0] + w[1] * x[1][0], w[0] * x[0][1] + w[1] * x[1][1]];

        let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        let sd = det.sqrt();
        let t = (c[0][0] + c[1][1] + 2.0 * sd).sqrt();
        let r = [[(c[0][0] + sd) / t, c[0][1] / t], [c[1][0] / t, (c[1][1] + sd) / t]];
        let rdet = r[0][0] * r[1][1] - r[0][1] * r[1][0];
        let ri = [[r[1][1] / rdet, -r[0][1] / rdet], [-r[1][0] / rdet, r[0][0] / rdet]];

        let a = (cs * (2.0 - cs) * mu_eff).sqrt();
        let ps_new = [
            (1.0 - cs) * ps[0] + a * (ri[0][0] * zw[0] + ri[0][1] * zw[1]),
            (1.0 - cs) * ps[1] + a * (ri[1][0] * zw[0] + ri[1][1] * zw[1]),
        ];
        let norm = (ps_new[0] * ps_new[0] + ps_new[1] * ps_new[1]).sqrt();
        let sigma = s * ((cs / ds) * (norm / chi - 1.0)).exp();
        let h = if norm / (1.0 - (1.0 - cs).powf(2.0 * (g + 1.0))).sqrt() < (1.4 + 2.0 / (d + 1.0)) * chi {
            1.0
        } else {
            0.0
        };
        let b = h * (cc * (2.0 - cc) * mu_eff).sqrt();
        let pc_new = [(1.0 - cc) * pc[0] + b * zw[0], (1.0 - cc) * pc[1] + b * zw[1]];
        let delta = (1.0 - h) * cc * (2.0 - cc);
        let keep = 1.0 + c1 * delta - c1 - cmu * (w[0] + w[1]);
        let mut cov = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                cov[i][j] = keep * c[i][j]
                    + c1 * pc_new[i] * pc_new[j]
                    + cmu * (w[0] * z[0][i] * z[0][j] + w[1] * z[1][i] * z[1][j]);
            }
        }
        (mean, cov, sigma, pc_new, ps_new, h)
    }

    fn check_against_oracle(state: &DistributionState, xs: &[DVector<f64>]) -> f64 {
        let hp = default_hyperparams(2, 2);
        let next = cma_update(state, xs, &hp).unwrap();
        let c = &state.cov;
        let (mean, cov, sigma, pc, ps, h) = oracle_step(
            [state.mean[0], state.mean[1]],
            [[c[(0, 0)], c[(0, 1)]], [c[(1, 0)], c[(1, 1)]]],
            state.sigma,
            [state.path_c[0], state.path_c[1]],
            [state.path_sigma[0], state.path_sigma[1]],
            state.generation as f64,
            [[xs[0][0], xs[0][1]], [xs[1][0], xs[1][1]]],
        );
        for i in 0..2 {
            assert!((next.mean[i] - mean[i]).abs() < 1e-12);
            assert!((next.path_c[i] - pc[i]).abs() < 1e-12);
            assert!((next.path_sigma[i] - ps[i]).abs() < 1e-12);
            for (j, c) in cov[i].iter().enumerate() {
                assert!((next.cov[(i, j)] - c).abs() < 1e-12);
            }
        }
        assert!((next.sigma - sigma).abs() < 1e-12);
        assert_eq!(next.generation, state.generation + 1);
        h
    }

    #[test]
    fn golden_step_matches_hand_execution() {
        let h = check_against_oracle(&golden_state(), &golden_samples());
        assert_eq!(h, 1.0);
    }

    #[test]
    fn stalled_path_branch_matches_hand_execution() {
        let mut state = golden_state();
        state.path_sigma = DVector::from_vec(vec![3.0, -2.5]);
        state.generation = 0;
        let h = check_against_oracle(&state, &golden_samples());
        assert_eq!(h, 0.0);
    }

    #[test]
    fn golden_step_matches_frozen_values() {
        // Produced once by an independent numpy transcription of the same step.
        let hp = default_hyperparams(2, 2);
        let next = cma_update(&golden_state(), &golden_samples(), &hp).unwrap();
        let frozen = crate::cma::tests_support::GOLDEN_D2_K2;
        let got = [
            next.mean[0], next.mean[1], next.cov[(0, 0)], next.cov[(0, 1)], next.cov[(1, 1)],
            next.sigma, next.path_c[0], next.path_c[1], next.path_sigma[0], next.path_sigma[1],
        ];
        for (g, f) in got.iter().zip(frozen) {
            assert!((g - f).abs() < 1e-12, "{g} vs {f}");
        }
    }

    #[test]
    fn single_selected_point_becomes_the_mean() {
        let hp = default_hyperparams(2, 1);
        let x = DVector::from_vec(vec![0.9, 0.1]);
        let next = cma_update(&golden_state(), std::slice::from_ref(&x), &hp).unwrap();
        assert_eq!(next.mean, x);
    }

    #[test]
    fn zero_displacement() {
        let hp = default_hyperparams(2, 2);
        let state = golden_state();
        let xs = vec![state.mean.clone(), state.mean.clone()];
        let next = cma_update(&state, &xs, &hp).unwrap();
        assert_eq!(next.mean, state.mean);
        let decayed = &state.path_sigma * (1.0 - hp.c_sigma);
        assert!((next.path_sigma - &decayed).norm() < 1e-15);
        let factor = ((hp.c_sigma / hp.d_sigma) * (decayed.norm() / chi_mean(2) - 1.0)).exp();
        assert!((next.sigma - state.sigma * factor).abs() < 1e-15);
    }

    #[test]
    fn wrong_selection_size() {
        let hp = default_hyperparams(2, 2);
        let err = cma_update(&golden_state(), &golden_samples()[..1], &hp).unwrap_err();
        assert_eq!(err, CmaError::SelectionSize { expected: 2, got: 1 });
    }

    #[test]
    fn non_finite_input_fails() {
        let hp = default_hyperparams(2, 2);
        let mut xs = golden_samples();
        xs[0][0] = f64::NAN;
        assert!(cma_update(&golden_state(), &xs, &hp).is_err());
    }

    fn arb_state(d: usize) -> impl Strategy<Value = (DistributionState, Vec<DVector<f64>>)> {
        let k = crate::cma::default_population(d).selected;
        (
            prop::collection::vec(0.0f64..1.0, d),
            prop::collection::vec(-0.5f64..0.5, d * d),
            0.01f64..0.6,
            prop::collection::vec(-1.0f64..1.0, 2 * d),
            prop::collection::vec(prop::collection::vec(0.0f64..1.0, d), k),
            0u64..50,
        )
            .prop_map(move |(m, a, sigma, paths, xs, g)| {
                let a = DMatrix::from_row_slice(d, d, &a);
                let cov = &a * a.transpose() + DMatrix::identity(d, d) * 0.05;
                let state = DistributionState {
                    mean: DVector::from_vec(m),
                    cov,
                    sigma,
                    path_c: DVector::from_column_slice(&paths[..d]),
                    path_sigma: DVector::from_column_slice(&paths[d..]),
                    generation: g,
                };
                (state, xs.into_iter().map(DVector::from_vec).collect())
            })
    }

    proptest! {
        #[test]
        fn shape_stays_symmetric_positive_definite((state, xs) in arb_state(3)) {
            let hp = default_hyperparams(3, xs.len());
            let next = cma_update(&state, &xs, &hp).unwrap();
            let asym = (&next.cov - next.cov.transpose()).abs().max();
            prop_assert!(asym <= 1e-12);
            let min_eig = nalgebra::SymmetricEigen::new(next.cov.clone()).eigenvalues.min();
            prop_assert!(min_eig >= 1e-12 * (1.0 - 1e-6));
            prop_assert!(next.sigma > 0.0);
        }

        #[test]
        fn translation_shifts_only_the_mean((state, xs) in arb_state(2), shift in prop::collection::vec(-2.0f64..2.0, 2)) {
            let hp = default_hyperparams(2, xs.len());
            let t = DVector::from_vec(shift);
            let a = cma_update(&state, &xs, &hp).unwrap();
            let mut moved = state.clone();
            moved.mean += &t;
            let xs_moved: Vec<_> = xs.iter().map(|x| x + &t).collect();
            let b = cma_update(&moved, &xs_moved, &hp).unwrap();
            prop_assert!((&b.mean - &a.mean - &t).amax() < 1e-12);
            prop_assert!((&b.cov - &a.cov).amax() < 1e-10);
            prop_assert!((b.sigma - a.sigma).abs() < 1e-12 * a.sigma.max(1.0));
            prop_assert!((&b.path_sigma - &a.path_sigma).amax() < 1e-10);
            prop_assert!((&b.path_c - &a.path_c).amax() < 1e-10);
        }

        #[test]
        fn equal_value_permutation_keeps_mean((state, xs) in arb_state(2)) {
            // Distinct points carry distinct weights, so only coincident points commute.
            let hp = default_hyperparams(2, xs.len());
            let mut dup = xs.clone();
            dup[1] = dup[0].clone();
            let mut swapped = dup.clone();
            swapped.swap(0, 1);
            let a = cma_update(&state, &dup, &hp).unwrap();
            let b = cma_update(&state, &swapped, &hp).unwrap();
            prop_assert_eq!(a.mean, b.mean);
        }
    }
}
