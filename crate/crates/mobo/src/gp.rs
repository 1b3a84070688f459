//! Gaussian process regression backed by Cholesky factorization.
//!
//! Models are built either directly from fixed hyperparameters
//! ([`GpModel::new`]) or by maximizing the log marginal likelihood over a
//! multi-start local search ([`GpModel::fit`]). Fitted models are immutable
//! and cheap to query from multiple threads.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dims, Error, Result};

const LN_2PI: f64 = 1.837877066409345483560659472811;

/// Stationary covariance kernel family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Matern12,
    Matern32,
    Matern52,
    SqExp,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::Matern12,
        KernelKind::Matern32,
        KernelKind::Matern52,
        KernelKind::SqExp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Matern12 => "matern12",
            KernelKind::Matern32 => "matern32",
            KernelKind::Matern52 => "matern52",
            KernelKind::SqExp => "sqexp",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "matern12" => Ok(KernelKind::Matern12),
            "matern32" => Ok(KernelKind::Matern32),
            "matern52" => Ok(KernelKind::Matern52),
            "sqexp" => Ok(KernelKind::SqExp),
            other => Err(Error::InvalidArgument(format!(
                "unknown kernel '{other}' (expected one of matern12, matern32, matern52, sqexp)"
            ))),
        }
    }
}

/// A kernel with its amplitude and per-dimension lengthscales.
///
/// The pairwise distance is `r = sqrt(sum_i ((a_i - b_i) / l_i)^2)`, so a
/// single repeated lengthscale recovers the isotropic form.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    kind: KernelKind,
    amplitude: f64,
    lengthscales: Vec<f64>,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, amplitude: f64, lengthscales: Vec<f64>) -> Result<Self> {
        if !(amplitude > 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "kernel amplitude must be positive and finite, got {amplitude}"
            )));
        }
        if lengthscales.is_empty() {
            return Err(Error::EmptyInput("kernel lengthscales".into()));
        }
        if lengthscales.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidArgument(
                "every lengthscale must be positive and finite".into(),
            ));
        }
        Ok(Self {
            kind,
            amplitude,
            lengthscales,
        })
    }

    /// Same lengthscale in every input dimension.
    pub fn isotropic(kind: KernelKind, amplitude: f64, lengthscale: f64, dim: usize) -> Result<Self> {
        Self::new(kind, amplitude, vec![lengthscale; dim])
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn lengthscales(&self) -> &[f64] {
        &self.lengthscales
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    fn scaled_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut sum = 0.0;
        for i in 0..a.len() {
            let t = (a[i] - b[i]) / self.lengthscales[i];
            sum += t * t;
        }
        sum.sqrt()
    }

    /// Covariance between two points.
    pub fn eval(&self, x: &[f64], x2: &[f64]) -> Result<f64> {
        check_dims(self.dim(), x.len())?;
        check_dims(self.dim(), x2.len())?;
        Ok(self.eval_unchecked(x, x2))
    }

    fn eval_unchecked(&self, x: &[f64], x2: &[f64]) -> f64 {
        let r = self.scaled_distance(x, x2);
        let a2 = self.amplitude * self.amplitude;
        match self.kind {
            KernelKind::Matern12 => a2 * (-r).exp(),
            KernelKind::Matern32 => {
                let t = 3.0_f64.sqrt() * r;
                a2 * (1.0 + t) * (-t).exp()
            }
            KernelKind::Matern52 => {
                let t = 5.0_f64.sqrt() * r;
                a2 * (1.0 + t + 5.0 * r * r / 3.0) * (-t).exp()
            }
            KernelKind::SqExp => a2 * (-0.5 * r * r).exp(),
        }
    }
}

/// Covariance between two points under `spec`.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], x2: &[f64]) -> Result<f64> {
    spec.eval(x, x2)
}

/// Posterior distribution of the latent function at a query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior {
    pub mean: f64,
    pub variance: f64,
}

/// Affine map per input dimension: `z = (x - offset) / scale`.
#[derive(Debug, Clone)]
struct InputScaler {
    offset: Vec<f64>,
    scale: Vec<f64>,
}

impl InputScaler {
    fn from_data(inputs: &[Vec<f64>]) -> Self {
        let d = inputs[0].len();
        let mut offset = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for x in inputs {
            for i in 0..d {
                offset[i] = offset[i].min(x[i]);
                hi[i] = hi[i].max(x[i]);
            }
        }
        let scale = (0..d)
            .map(|i| {
                let range = hi[i] - offset[i];
                if range > 1e-12 {
                    range
                } else {
                    1.0
                }
            })
            .collect();
        Self { offset, scale }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, v)| (v - self.offset[i]) / self.scale[i])
            .collect()
    }
}

/// Affine map on targets: `t = (y - offset) / scale`.
#[derive(Debug, Clone, Copy)]
struct TargetScaler {
    offset: f64,
    scale: f64,
}

/// A factorized Gaussian process regression model.
#[derive(Debug, Clone)]
pub struct GpModel {
    kernel: KernelSpec,
    noise_variance: f64,
    prior_mean: f64,
    /// Training inputs in model space (rows).
    train_inputs: Vec<Vec<f64>>,
    /// Training targets in model space.
    train_targets: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    input_scaler: Option<InputScaler>,
    target_scaler: Option<TargetScaler>,
}

fn build_gram(kernel: &KernelSpec, inputs: &[Vec<f64>], noise: f64) -> DMatrix<f64> {
    let n = inputs.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.eval_unchecked(&inputs[i], &inputs[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(i, i)] += noise;
    }
    k
}

fn try_factorize(
    kernel: &KernelSpec,
    inputs: &[Vec<f64>],
    noise: f64,
) -> Option<Cholesky<f64, Dyn>> {
    Cholesky::new(build_gram(kernel, inputs, noise))
}

/// Factorize `K + noise*I`, escalating a diagonal jitter from
/// `1e-10 * mean(diag K)` by doubling up to `1e-4 * mean(diag K)`.
fn factorize_with_jitter(
    kernel: &KernelSpec,
    inputs: &[Vec<f64>],
    noise: f64,
) -> Result<Cholesky<f64, Dyn>> {
    if let Some(c) = try_factorize(kernel, inputs, noise) {
        return Ok(c);
    }
    let mean_diag = kernel.amplitude * kernel.amplitude;
    let mut jitter = 1e-10 * mean_diag;
    let max_jitter = 1e-4 * mean_diag;
    while jitter <= max_jitter {
        if let Some(c) = try_factorize(kernel, inputs, noise + jitter) {
            return Ok(c);
        }
        jitter *= 2.0;
    }
    Err(Error::Factorization(format!(
        "covariance matrix is not positive definite (n = {}, noise = {noise:e})",
        inputs.len()
    )))
}

impl GpModel {
    /// Build a model from fixed hyperparameters. Targets and inputs are used
    /// as-is; a jitter ladder repairs marginally indefinite Gram matrices.
    pub fn new(
        kernel: KernelSpec,
        noise_variance: f64,
        prior_mean: f64,
        inputs: &[Vec<f64>],
        targets: &[f64],
    ) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::EmptyInput("GP training inputs".into()));
        }
        check_dims(inputs.len(), targets.len())?;
        for x in inputs {
            check_dims(kernel.dim(), x.len())?;
        }
        if noise_variance < 0.0 || !noise_variance.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be nonnegative and finite, got {noise_variance}"
            )));
        }
        let chol = factorize_with_jitter(&kernel, inputs, noise_variance)?;
        let residual = DVector::from_iterator(targets.len(), targets.iter().map(|y| y - prior_mean));
        let alpha = chol.solve(&residual);
        Ok(Self {
            kernel,
            noise_variance,
            prior_mean,
            train_inputs: inputs.to_vec(),
            train_targets: DVector::from_column_slice(targets),
            chol,
            alpha,
            input_scaler: None,
            target_scaler: None,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    pub fn len(&self) -> usize {
        self.train_inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.kernel.dim()
    }

    /// Lower-triangular Cholesky factor of `K + noise*I` (model space).
    pub fn chol_factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// `(K + noise*I)^{-1} (y - m)` in model space.
    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    /// Training inputs in model space (normalized when built by `fit`).
    pub fn train_inputs(&self) -> &[Vec<f64>] {
        &self.train_inputs
    }

    /// Training targets in model space.
    pub fn train_targets(&self) -> &DVector<f64> {
        &self.train_targets
    }

    /// Log marginal likelihood of the stored (model-space) data:
    /// `-(n/2) log 2pi - sum(log L_ii) - (y-m)^T alpha / 2`.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.train_inputs.len() as f64;
        let l = self.chol.l_dirty();
        let mut log_det_half = 0.0;
        for i in 0..self.train_inputs.len() {
            log_det_half += l[(i, i)].ln();
        }
        let residual = DVector::from_iterator(
            self.train_targets.len(),
            self.train_targets.iter().map(|y| y - self.prior_mean),
        );
        -0.5 * n * LN_2PI - log_det_half - 0.5 * residual.dot(&self.alpha)
    }

    /// Posterior mean and variance at a query point. The variance is clamped
    /// at zero after the floating-point subtraction.
    pub fn predict(&self, x: &[f64]) -> Result<Posterior> {
        check_dims(self.input_dim(), x.len())?;
        let z = match &self.input_scaler {
            Some(s) => s.apply(x),
            None => x.to_vec(),
        };
        let n = self.train_inputs.len();
        let k_vec = DVector::from_iterator(
            n,
            self.train_inputs
                .iter()
                .map(|xi| self.kernel.eval_unchecked(&z, xi)),
        );
        let mean = self.prior_mean + k_vec.dot(&self.alpha);
        let solved = self.chol.solve(&k_vec);
        let variance = (self.kernel.eval_unchecked(&z, &z) - k_vec.dot(&solved)).max(0.0);
        match self.target_scaler {
            Some(t) => Ok(Posterior {
                mean: t.offset + t.scale * mean,
                variance: t.scale * t.scale * variance,
            }),
            None => Ok(Posterior { mean, variance }),
        }
    }

    /// Fit hyperparameters by maximizing the log marginal likelihood.
    ///
    /// Inputs are normalized to the unit box and targets standardized to zero
    /// mean and unit variance internally; predictions are mapped back. The
    /// prior mean is the training-target mean. The search runs a bounded
    /// Nelder-Mead in log-space from `config.n_starts` start points and the
    /// returned model attains a likelihood at least as high as every start.
    pub fn fit(
        inputs: &[Vec<f64>],
        targets: &[f64],
        kind: KernelKind,
        config: &FitConfig,
    ) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::EmptyInput("GP training inputs".into()));
        }
        check_dims(inputs.len(), targets.len())?;
        let d = inputs[0].len();
        if d == 0 {
            return Err(Error::EmptyInput("GP input dimension".into()));
        }
        for x in inputs {
            check_dims(d, x.len())?;
        }
        if inputs.iter().flatten().any(|v| !v.is_finite())
            || targets.iter().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidArgument(
                "GP training data must be finite".into(),
            ));
        }

        let n = inputs.len();
        let input_scaler = InputScaler::from_data(inputs);
        let z: Vec<Vec<f64>> = inputs.iter().map(|x| input_scaler.apply(x)).collect();

        let mean = targets.iter().sum::<f64>() / n as f64;
        let var = targets.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n as f64;
        let std = var.sqrt();

        // Constant targets: amplitude pinned at its lower bound, predictions
        // fall back to the prior mean.
        if std < 1e-12 {
            let kernel = KernelSpec::isotropic(kind, config.amplitude_bounds.0, 1.0, d)?;
            let zeros = vec![0.0; n];
            let mut model =
                GpModel::new(kernel, config.noise_bounds.0.max(1e-12), 0.0, &z, &zeros)?;
            model.input_scaler = Some(input_scaler);
            model.target_scaler = Some(TargetScaler {
                offset: mean,
                scale: 1.0,
            });
            return Ok(model);
        }

        let t: Vec<f64> = targets.iter().map(|y| (y - mean) / std).collect();
        // In standardized space the target std is 1 and each normalized input
        // range is 1, so the configured relative bounds apply directly.
        let n_ls = if config.isotropic { 1 } else { d };
        let mut lo = Vec::with_capacity(2 + n_ls);
        let mut hi = Vec::with_capacity(2 + n_ls);
        lo.push(config.amplitude_bounds.0.ln());
        hi.push(config.amplitude_bounds.1.ln());
        lo.push(config.noise_bounds.0.ln());
        hi.push(config.noise_bounds.1.ln());
        for _ in 0..n_ls {
            lo.push(config.lengthscale_bounds.0.ln());
            hi.push(config.lengthscale_bounds.1.ln());
        }

        let kernel_of = |p: &[f64]| -> KernelSpec {
            let amplitude = p[0].exp();
            let ls: Vec<f64> = if config.isotropic {
                vec![p[2].exp(); d]
            } else {
                p[2..].iter().map(|v| v.exp()).collect()
            };
            KernelSpec::new(kind, amplitude, ls).expect("bounded parameters are positive")
        };
        let tz = t.clone();
        let zz = z.clone();
        // Negative log marginal likelihood; indefinite Gram matrices are an
        // infinite wall so the optimizer stays in well-conditioned territory.
        let objective = move |p: &[f64]| -> f64 {
            let kernel = kernel_of(p);
            let noise = p[1].exp();
            match try_factorize(&kernel, &zz, noise) {
                Some(chol) => {
                    let y = DVector::from_column_slice(&tz);
                    let alpha = chol.solve(&y);
                    let l = chol.l_dirty();
                    let mut log_det_half = 0.0;
                    for i in 0..tz.len() {
                        log_det_half += l[(i, i)].ln();
                    }
                    0.5 * tz.len() as f64 * LN_2PI + log_det_half + 0.5 * y.dot(&alpha)
                }
                None => f64::INFINITY,
            }
        };

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut starts = Vec::with_capacity(config.n_starts.max(1));
        let mut first = vec![0.0_f64, 1e-4_f64.ln()];
        first.extend(std::iter::repeat(0.5_f64.ln()).take(n_ls));
        starts.push(clamp_point(&first, &lo, &hi));
        while starts.len() < config.n_starts.max(1) {
            let p: Vec<f64> = lo
                .iter()
                .zip(hi.iter())
                .map(|(&a, &b)| rng.gen_range(a..=b))
                .collect();
            starts.push(p);
        }

        let mut best_p: Option<Vec<f64>> = None;
        let mut best_f = f64::INFINITY;
        for start in &starts {
            let (p, f) = nelder_mead(&objective, start, &lo, &hi, config.max_evals_per_start);
            if f < best_f {
                best_f = f;
                best_p = Some(p);
            }
        }
        let best_p = best_p.ok_or_else(|| {
            Error::Factorization("hyperparameter search found no factorizable model".into())
        })?;
        if !best_f.is_finite() {
            return Err(Error::Factorization(
                "hyperparameter search found no factorizable model".into(),
            ));
        }

        let kernel = kernel_of(&best_p);
        let noise = best_p[1].exp();
        let mut model = GpModel::new(kernel, noise, 0.0, &z, &t)?;
        model.input_scaler = Some(input_scaler);
        model.target_scaler = Some(TargetScaler {
            offset: mean,
            scale: std,
        });
        Ok(model)
    }
}

/// Controls for hyperparameter fitting. Bounds are relative to the
/// standardized data: lengthscales to the unit input range, amplitude to the
/// unit target std, and the noise ceiling to the unit target variance.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub n_starts: usize,
    pub max_evals_per_start: usize,
    pub seed: u64,
    pub isotropic: bool,
    pub lengthscale_bounds: (f64, f64),
    pub amplitude_bounds: (f64, f64),
    pub noise_bounds: (f64, f64),
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_starts: 5,
            max_evals_per_start: 80,
            seed: 0x6d6f_626f,
            isotropic: false,
            lengthscale_bounds: (1e-3, 1e3),
            amplitude_bounds: (1e-3, 1e3),
            noise_bounds: (1e-10, 1.0),
        }
    }
}

impl FitConfig {
    /// Configuration for GPs over exact binary labels: the noise ceiling is
    /// tightened so the surrogate interpolates the labels.
    pub fn for_classifier() -> Self {
        Self {
            noise_bounds: (1e-10, 1e-4),
            ..Self::default()
        }
    }
}

fn clamp_point(p: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    p.iter()
        .enumerate()
        .map(|(i, &v)| v.clamp(lo[i], hi[i]))
        .collect()
}

/// Bounded Nelder-Mead: proposals are clamped into the box before
/// evaluation. Returns the best point seen (including the start).
fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    start: &[f64],
    lo: &[f64],
    hi: &[f64],
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let dim = start.len();
    let evals = std::cell::Cell::new(0usize);
    let eval = |p: &[f64]| -> f64 {
        evals.set(evals.get() + 1);
        f(p)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let p0 = clamp_point(start, lo, hi);
    let f0 = eval(&p0);
    simplex.push((p0, f0));
    for i in 0..dim {
        let mut p = simplex[0].0.clone();
        let step = 0.5 * (hi[i] - lo[i]).min(2.0).max(0.2);
        p[i] = if p[i] + step <= hi[i] {
            p[i] + step
        } else {
            p[i] - step
        };
        let p = clamp_point(&p, lo, hi);
        let fp = eval(&p);
        simplex.push((p, fp));
    }

    let (mut best_p, mut best_f) = simplex[0].clone();
    for (p, fp) in &simplex {
        if *fp < best_f {
            best_f = *fp;
            best_p = p.clone();
        }
    }

    while evals.get() < max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        if simplex[0].1 < best_f {
            best_f = simplex[0].1;
            best_p = simplex[0].0.clone();
        }
        let spread = simplex[dim].1 - simplex[0].1;
        if spread.abs() < 1e-10 {
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|i| simplex[..dim].iter().map(|(p, _)| p[i]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let reflect: Vec<f64> = (0..dim)
            .map(|i| centroid[i] + (centroid[i] - worst.0[i]))
            .collect();
        let reflect = clamp_point(&reflect, lo, hi);
        let f_r = eval(&reflect);

        if f_r < simplex[0].1 {
            let expand: Vec<f64> = (0..dim)
                .map(|i| centroid[i] + 2.0 * (centroid[i] - worst.0[i]))
                .collect();
            let expand = clamp_point(&expand, lo, hi);
            let f_e = eval(&expand);
            simplex[dim] = if f_e < f_r { (expand, f_e) } else { (reflect, f_r) };
        } else if f_r < simplex[dim - 1].1 {
            simplex[dim] = (reflect, f_r);
        } else {
            let contract: Vec<f64> = (0..dim)
                .map(|i| centroid[i] + 0.5 * (worst.0[i] - centroid[i]))
                .collect();
            let contract = clamp_point(&contract, lo, hi);
            let f_c = eval(&contract);
            if f_c < worst.1 {
                simplex[dim] = (contract, f_c);
            } else {
                let anchor = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = (0..dim)
                        .map(|i| anchor[i] + 0.5 * (entry.0[i] - anchor[i]))
                        .collect();
                    let shrunk = clamp_point(&shrunk, lo, hi);
                    let f_s = eval(&shrunk);
                    *entry = (shrunk, f_s);
                }
            }
        }
    }
    for (p, fp) in &simplex {
        if *fp < best_f {
            best_f = *fp;
            best_p = p.clone();
        }
    }
    (best_p, best_f)
}
