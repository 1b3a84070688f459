//! Covariance matrix adaptation evolution strategy with box bounds, used as
//! the inner optimizer for acquisition maximization.
//!
//! Search runs in coordinates normalized to the unit box; `sigma0` is
//! relative to that box. Candidates falling outside are resampled up to ten
//! times, then clamped with a quadratic distance penalty on their ranking
//! fitness. Strategy parameters follow the standard defaults.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

const MIN_EIGENVALUE: f64 = 1e-14;
const BOUND_PENALTY: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct CmaesConfig {
    /// Candidates per generation; `None` uses `4 + floor(3 ln d)`.
    pub population_size: Option<usize>,
    /// Initial step size relative to the normalized unit box.
    pub sigma0: f64,
    pub max_evals: usize,
    /// Stop when the spread of per-generation best fitness over the
    /// stagnation window falls below this.
    pub tol_fun: f64,
    pub seed: u64,
    /// Start mean in original coordinates; `None` draws one uniformly.
    pub initial: Option<Vec<f64>>,
}

impl Default for CmaesConfig {
    fn default() -> Self {
        Self {
            population_size: None,
            sigma0: 0.3,
            max_evals: 4000,
            tol_fun: 1e-12,
            seed: 0,
            initial: None,
        }
    }
}

pub fn default_population_size(dim: usize) -> usize {
    (4 + (3.0 * (dim as f64).ln()).floor() as usize).max(4)
}

struct Strategy {
    mu: usize,
    weights: Vec<f64>,
    mu_eff: f64,
    c_sigma: f64,
    d_sigma: f64,
    c_c: f64,
    c_1: f64,
    c_mu: f64,
    expected_norm: f64,
}

impl Strategy {
    fn new(dim: usize, lambda: usize) -> Self {
        let n = dim as f64;
        let mu = lambda / 2;
        let raw: Vec<f64> = (0..mu)
            .map(|i| (mu as f64 + 0.5).ln() - ((i + 1) as f64).ln())
            .collect();
        let sum: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / sum).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

        let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
        let c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff);
        let c_mu = (2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0) * (n + 2.0) + mu_eff))
            .min(1.0 - c_1);
        let expected_norm = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

        Self {
            mu,
            weights,
            mu_eff,
            c_sigma,
            d_sigma,
            c_c,
            c_1,
            c_mu,
            expected_norm,
        }
    }
}

fn sanitize(f: f64) -> f64 {
    if f.is_finite() {
        f
    } else {
        f64::INFINITY
    }
}

/// Minimize `objective` over the box. Returns the best in-bounds point and
/// its raw objective value; deterministic for a fixed config.
pub fn minimize<F>(
    mut objective: F,
    bounds: &[(f64, f64)],
    config: &CmaesConfig,
) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = bounds.len();
    if dim == 0 {
        return Err(Error::EmptyInput("optimization bounds".into()));
    }
    for &(lo, hi) in bounds {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::InvalidArgument(format!(
                "bounds must be finite with lower < upper, got ({lo}, {hi})"
            )));
        }
    }
    if !(config.sigma0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma0 must be positive, got {}",
            config.sigma0
        )));
    }
    let lambda = config
        .population_size
        .unwrap_or_else(|| default_population_size(dim));
    if lambda < 4 {
        return Err(Error::InvalidArgument(format!(
            "population size must be at least 4, got {lambda}"
        )));
    }
    if config.max_evals < lambda {
        return Err(Error::InvalidArgument(format!(
            "eval budget {} is below one generation ({lambda})",
            config.max_evals
        )));
    }

    let widths: Vec<f64> = bounds.iter().map(|&(lo, hi)| hi - lo).collect();
    let to_raw = |z: &[f64]| -> Vec<f64> {
        z.iter()
            .enumerate()
            .map(|(i, v)| bounds[i].0 + v * widths[i])
            .collect()
    };

    let strat = Strategy::new(dim, lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut mean: DVector<f64> = match &config.initial {
        Some(x0) => {
            if x0.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: x0.len(),
                });
            }
            DVector::from_iterator(
                dim,
                x0.iter()
                    .enumerate()
                    .map(|(i, v)| ((v - bounds[i].0) / widths[i]).clamp(0.0, 1.0)),
            )
        }
        None => DVector::from_iterator(dim, (0..dim).map(|_| rng.gen_range(0.0..1.0))),
    };
    let mut sigma = config.sigma0;
    let mut covariance = DMatrix::<f64>::identity(dim, dim);
    let mut p_sigma = DVector::<f64>::zeros(dim);
    let mut p_c = DVector::<f64>::zeros(dim);
    let mut eigen_basis = DMatrix::<f64>::identity(dim, dim);
    let mut eigen_sqrt = DVector::<f64>::from_element(dim, 1.0);

    let mut best_x = to_raw(mean.as_slice())
        .iter()
        .enumerate()
        .map(|(i, v)| v.clamp(bounds[i].0, bounds[i].1))
        .collect::<Vec<f64>>();
    let mut best_f = f64::INFINITY;

    let stagnation_window = 10 + (30.0 * dim as f64 / lambda as f64).ceil() as usize;
    let mut history: Vec<f64> = Vec::new();
    let mut evals = 0usize;
    let mut generation = 0usize;

    while evals + lambda <= config.max_evals {
        let mut candidates: Vec<(DVector<f64>, f64)> = Vec::with_capacity(lambda);
        let mut gen_best = f64::INFINITY;
        for _ in 0..lambda {
            let mut y = DVector::<f64>::zeros(dim);
            let mut z_point = DVector::<f64>::zeros(dim);
            let mut in_bounds = false;
            for _attempt in 0..10 {
                let std_norm =
                    DVector::from_iterator(dim, (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)));
                y = &eigen_basis * std_norm.component_mul(&eigen_sqrt);
                z_point = &mean + sigma * &y;
                if z_point.iter().all(|v| (0.0..=1.0).contains(v)) {
                    in_bounds = true;
                    break;
                }
            }
            let clamped = DVector::from_iterator(
                dim,
                z_point.iter().map(|v| v.clamp(0.0, 1.0)),
            );
            let penalty = if in_bounds {
                0.0
            } else {
                (&z_point - &clamped).norm_squared() * BOUND_PENALTY
            };
            let x_eval = to_raw(clamped.as_slice());
            let f_raw = sanitize(objective(&x_eval));
            evals += 1;
            if f_raw < best_f {
                best_f = f_raw;
                best_x = x_eval;
            }
            let fitness = f_raw + penalty;
            gen_best = gen_best.min(fitness);
            candidates.push((y, fitness));
        }

        let mut order: Vec<usize> = (0..lambda).collect();
        order.sort_by(|&a, &b| {
            candidates[a]
                .1
                .partial_cmp(&candidates[b].1)
                .unwrap_or(std::cmp::Ordering::Equal)
        });

        // Weighted recombination in y-space keeps the update independent of
        // the current mean.
        let mut y_w = DVector::<f64>::zeros(dim);
        for (w_idx, &c_idx) in order.iter().take(strat.mu).enumerate() {
            y_w += strat.weights[w_idx] * &candidates[c_idx].0;
        }
        mean += sigma * &y_w;

        // C^{-1/2} y_w from the cached eigendecomposition.
        let mut c_inv_sqrt_y = DVector::<f64>::zeros(dim);
        for k in 0..dim {
            let col = eigen_basis.column(k);
            let proj = col.dot(&y_w) / eigen_sqrt[k];
            c_inv_sqrt_y += proj * col;
        }
        p_sigma = (1.0 - strat.c_sigma) * &p_sigma
            + (strat.c_sigma * (2.0 - strat.c_sigma) * strat.mu_eff).sqrt() * &c_inv_sqrt_y;

        let gen_factor = 1.0 - (1.0 - strat.c_sigma).powi(2 * (generation as i32 + 1));
        let h_sigma = if p_sigma.norm()
            < (1.4 + 2.0 / (dim as f64 + 1.0)) * strat.expected_norm * gen_factor.sqrt()
        {
            1.0
        } else {
            0.0
        };
        p_c = (1.0 - strat.c_c) * &p_c
            + h_sigma * (strat.c_c * (2.0 - strat.c_c) * strat.mu_eff).sqrt() * &y_w;

        let mut rank_mu = DMatrix::<f64>::zeros(dim, dim);
        for (w_idx, &c_idx) in order.iter().take(strat.mu).enumerate() {
            let y_i = &candidates[c_idx].0;
            rank_mu += strat.weights[w_idx] * y_i * y_i.transpose();
        }
        let delta_h = (1.0 - h_sigma) * strat.c_c * (2.0 - strat.c_c);
        covariance = (1.0 - strat.c_1 - strat.c_mu + strat.c_1 * delta_h) * &covariance
            + strat.c_1 * &p_c * p_c.transpose()
            + strat.c_mu * rank_mu;
        covariance = (&covariance + covariance.transpose()) * 0.5;

        sigma *= ((strat.c_sigma / strat.d_sigma)
            * (p_sigma.norm() / strat.expected_norm - 1.0))
            .exp();
        if !sigma.is_finite() || sigma < 1e-18 {
            break;
        }

        // Refresh the sampling basis and floor the spectrum so the
        // covariance stays positive definite.
        let eig = covariance.clone().symmetric_eigen();
        let floored = eig.eigenvalues.map(|v| v.max(MIN_EIGENVALUE));
        covariance = &eig.eigenvectors
            * DMatrix::from_diagonal(&floored)
            * eig.eigenvectors.transpose();
        covariance = (&covariance + covariance.transpose()) * 0.5;
        eigen_sqrt = floored.map(|v| v.sqrt());
        eigen_basis = eig.eigenvectors;

        history.push(gen_best);
        if history.len() >= stagnation_window {
            let window = &history[history.len() - stagnation_window..];
            let lo = window.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if hi.is_finite() && hi - lo <= config.tol_fun {
                break;
            }
        }
        generation += 1;
    }

    Ok((best_x, best_f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn sphere_reaches_tolerance() {
        let bounds = vec![(-5.0, 5.0); 5];
        let config = CmaesConfig {
            max_evals: 5000,
            seed: 1,
            ..CmaesConfig::default()
        };
        let (x, f) = minimize(sphere, &bounds, &config).unwrap();
        assert!(f < 1e-8, "f = {f:e} at {x:?}");
    }

    #[test]
    fn rosenbrock_reaches_optimum() {
        let rosen = |x: &[f64]| {
            100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
        };
        let bounds = vec![(-2.0, 2.0); 2];
        let config = CmaesConfig {
            max_evals: 20_000,
            seed: 3,
            ..CmaesConfig::default()
        };
        let (x, _) = minimize(rosen, &bounds, &config).unwrap();
        let dist = ((x[0] - 1.0).powi(2) + (x[1] - 1.0).powi(2)).sqrt();
        assert!(dist < 1e-3, "x = {x:?}");
    }

    #[test]
    fn linear_objective_respects_boundary() {
        let bounds = vec![(0.0, 1.0); 2];
        let config = CmaesConfig {
            max_evals: 4000,
            seed: 5,
            ..CmaesConfig::default()
        };
        let (x, _) = minimize(|x| x[0], &bounds, &config).unwrap();
        assert!(x[0] < 1e-3, "x = {x:?}");
        assert!(x.iter().zip(&bounds).all(|(v, (lo, hi))| v >= lo && v <= hi));
    }

    #[test]
    fn identical_seeds_are_bit_identical() {
        let bounds = vec![(-3.0, 3.0); 4];
        let config = CmaesConfig {
            max_evals: 2000,
            seed: 11,
            ..CmaesConfig::default()
        };
        let (x1, f1) = minimize(sphere, &bounds, &config).unwrap();
        let (x2, f2) = minimize(sphere, &bounds, &config).unwrap();
        assert_eq!(x1, x2);
        assert_eq!(f1.to_bits(), f2.to_bits());
    }

    #[test]
    fn non_finite_objectives_are_penalized_not_fatal() {
        let nasty = |x: &[f64]| {
            if x[0] < 0.0 {
                f64::NAN
            } else {
                (x[0] - 0.5).powi(2)
            }
        };
        let bounds = vec![(-1.0, 1.0)];
        let config = CmaesConfig {
            max_evals: 2000,
            seed: 7,
            ..CmaesConfig::default()
        };
        let (x, f) = minimize(nasty, &bounds, &config).unwrap();
        assert!(f.is_finite());
        assert!((x[0] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn running_best_is_monotone() {
        // Track the best values seen through a wrapper and confirm the final
        // reported value equals the minimum of all evaluations.
        let mut seen = Vec::new();
        let bounds = vec![(-5.0, 5.0); 3];
        let config = CmaesConfig {
            max_evals: 1500,
            seed: 2,
            ..CmaesConfig::default()
        };
        let (_, f) = minimize(
            |x| {
                let v = sphere(x);
                seen.push(v);
                v
            },
            &bounds,
            &config,
        )
        .unwrap();
        let min_seen = seen.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(f, min_seen);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bounds = vec![(0.0, 1.0)];
        assert!(minimize(sphere, &[], &CmaesConfig::default()).is_err());
        assert!(minimize(sphere, &[(1.0, 0.0)], &CmaesConfig::default()).is_err());
        let bad_sigma = CmaesConfig {
            sigma0: 0.0,
            ..CmaesConfig::default()
        };
        assert!(minimize(sphere, &bounds, &bad_sigma).is_err());
        let bad_pop = CmaesConfig {
            population_size: Some(2),
            ..CmaesConfig::default()
        };
        assert!(minimize(sphere, &bounds, &bad_pop).is_err());
    }

    #[test]
    fn default_population_follows_dimension() {
        assert_eq!(default_population_size(1), 4);
        assert_eq!(default_population_size(10), 4 + 6);
    }
}
