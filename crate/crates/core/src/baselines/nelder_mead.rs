use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NelderMeadConfig {
    /// Edge length of the starting simplex, scaled units.
    pub initial_step: f64,
    /// `None` uses `200 D`.
    pub max_iterations: Option<usize>,
    pub x_tol: f64,
    pub f_tol: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.05,
            max_iterations: None,
            x_tol: 1e-8,
            f_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: u64,
    /// False when the iteration cap ended the search.
    pub converged: bool,
}

fn project(x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b - a), projected onto the cube
    let mut x: Vec<f64> = a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect();
    project(&mut x);
    x
}

/// Nelder-Mead on the unit cube with every trial point projected back
/// inside.
///
/// `f0`, when given, is taken as the value at `x0` and not re-evaluated.
/// Errors from `f` abort the search and are passed through, which is how
/// budget exhaustion and global hits propagate.
pub fn local_minimize<F, E>(
    x0: &[f64],
    f0: Option<f64>,
    config: &NelderMeadConfig,
    mut f: F,
) -> Result<LocalResult, E>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let d = x0.len();
    let max_iter = config.max_iterations.unwrap_or(200 * d.max(1));
    let mut evaluations = 0u64;
    let mut eval = |x: &[f64], n: &mut u64| {
        *n += 1;
        f(x)
    };

    let mut start = x0.to_vec();
    project(&mut start);
    let v0 = match f0 {
        Some(v) if start == x0 => v,
        _ => eval(&start, &mut evaluations)?,
    };
    let mut simplex = vec![(start.clone(), v0)];
    for i in 0..d {
        let mut x = start.clone();
        x[i] = if x[i] + config.initial_step <= 1.0 {
            x[i] + config.initial_step
        } else {
            x[i] - config.initial_step
        };
        let v = eval(&x, &mut evaluations)?;
        simplex.push((x, v));
    }

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (&simplex[0], &simplex[d]);
        let spread_f = (worst.1 - best.1).abs();
        let spread_x = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&best.0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread_f <= config.f_tol && spread_x <= config.x_tol {
            let (point, value) = simplex.swap_remove(0);
            return Ok(LocalResult {
                point,
                value,
                evaluations,
                converged: true,
            });
        }

        let mut centroid = vec![0.0; d];
        for (x, _) in &simplex[..d] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / d as f64;
            }
        }
        let worst_x = simplex[d].0.clone();
        let reflected = affine(&centroid, &worst_x, -1.0);
        let fr = eval(&reflected, &mut evaluations)?;
        if fr < simplex[0].1 {
            let expanded = affine(&centroid, &worst_x, -2.0);
            let fe = eval(&expanded, &mut evaluations)?;
            simplex[d] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[d - 1].1 {
            simplex[d] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < simplex[d].1 {
            let c = affine(&centroid, &worst_x, -0.5);
            let v = eval(&c, &mut evaluations)?;
            (c, v)
        } else {
            let c = affine(&centroid, &worst_x, 0.5);
            let v = eval(&c, &mut evaluations)?;
            (c, v)
        };
        if fc < simplex[d].1.min(fr) {
            simplex[d] = (contracted, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = affine(&anchor, &vertex.0, 0.5);
            let v = eval(&x, &mut evaluations)?;
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (point, value) = simplex.swap_remove(0);
    Ok(LocalResult {
        point,
        value,
        evaluations,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testbed::styblinski_tang;
    use std::convert::Infallible;

    fn ok(v: f64) -> Result<f64, Infallible> {
        Ok(v)
    }

    #[test]
    fn minimizer_start_stays_put() {
        let f = |x: &[f64]| ok((x[0] - 0.4).powi(2) + 2.0 * (x[1] - 0.7).powi(2));
        let r = local_minimize(&[0.4, 0.7], None, &NelderMeadConfig::default(), f).unwrap();
        assert!(r.converged);
        assert!((r.point[0] - 0.4).abs() < 1e-6 && (r.point[1] - 0.7).abs() < 1e-6);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn styblinski_slice_matches_cubic_root() {
        // Newton on the derivative 2x^3 - 16x + 2.5 from the left basin.
        let mut root = -3.0f64;
        for _ in 0..50 {
            root -= (2.0 * root.powi(3) - 16.0 * root + 2.5) / (6.0 * root * root - 16.0);
        }
        let (lo, hi) = (-5.0, -1.0);
        let f = |x: &[f64]| ok(styblinski_tang(&[lo + x[0] * (hi - lo)]));
        let r = local_minimize(&[0.9], None, &NelderMeadConfig::default(), f).unwrap();
        let raw = lo + r.point[0] * (hi - lo);
        assert!((raw - root).abs() < 1e-4, "{raw} {root}");
        assert!(r.value <= styblinski_tang(&[lo + 0.9 * (hi - lo)]));
    }

    #[test]
    fn descent_toward_the_boundary_lands_on_the_face() {
        let f = |x: &[f64]| ok(x[0] + (x[1] - 0.5).powi(2));
        let r = local_minimize(&[0.6, 0.2], None, &NelderMeadConfig::default(), f).unwrap();
        assert_eq!(r.point[0], 0.0);
        assert!((r.point[1] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn errors_propagate_and_cap_is_flagged() {
        let mut calls = 0;
        let err = local_minimize(&[0.5], None, &NelderMeadConfig::default(), |_| {
            calls += 1;
            if calls > 3 { Err("stop") } else { Ok(calls as f64) }
        });
        assert_eq!(err.unwrap_err(), "stop");
        let cfg = NelderMeadConfig { max_iterations: Some(2), ..Default::default() };
        let r = local_minimize(&[0.9, 0.9], None, &cfg, |x: &[f64]| ok(x[0] + x[1])).unwrap();
        assert!(!r.converged);
        assert!(r.value <= 1.8);
    }
}
