//! Weight sampling and scalarization of objective vectors.

use rand::Rng;

use crate::error::{check_dims, Error, Result};

/// How a multi-objective vector collapses to a scalar.
///
/// All methods assume minimization. `RegularizedAugmentedTchebycheff` is the
/// augmented form without the ideal-point offset in the max term plus an
/// input-space ridge penalty `lambda * ||x||_2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarizationMethod {
    WeightedTchebycheff,
    WeightedSum,
    AugmentedTchebycheff,
    RegularizedAugmentedTchebycheff,
}

#[derive(Debug, Clone)]
pub struct ScalarizationSpec {
    pub method: ScalarizationMethod,
    pub rho: f64,
    pub lambda: f64,
    pub ideal_point: Vec<f64>,
}

impl ScalarizationSpec {
    pub fn new(
        method: ScalarizationMethod,
        rho: f64,
        lambda: f64,
        ideal_point: Vec<f64>,
    ) -> Result<Self> {
        if rho < 0.0 || !rho.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "rho must be nonnegative, got {rho}"
            )));
        }
        if lambda < 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda must be nonnegative, got {lambda}"
            )));
        }
        Ok(Self {
            method,
            rho,
            lambda,
            ideal_point,
        })
    }
}

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Build from explicit components in `[0, 1]` summing to 1 within
    /// 1e-12.
    pub fn from_components(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput("weight vector".into()));
        }
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidArgument(format!(
                "weights must lie in [0, 1], got {weights:?}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "weights must sum to 1, got {sum}"
            )));
        }
        Ok(Self(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Draw a weight vector uniformly from the `(s-1)`-simplex using sorted
/// uniform spacings.
pub fn sample_weights<R: Rng + ?Sized>(s: usize, rng: &mut R) -> Result<WeightVector> {
    if s == 0 {
        return Err(Error::InvalidArgument(
            "weight dimension must be at least 1".into(),
        ));
    }
    if s == 1 {
        return Ok(WeightVector(vec![1.0]));
    }
    let mut cuts: Vec<f64> = (0..s - 1).map(|_| rng.gen::<f64>()).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("uniform draws are finite"));
    let mut weights = Vec::with_capacity(s);
    let mut prev = 0.0;
    for c in &cuts {
        weights.push(c - prev);
        prev = *c;
    }
    weights.push(1.0 - prev);
    Ok(WeightVector(weights))
}

/// Collapse the objective vector `y` to a scalar under `spec` and weights
/// `w`. The input point `x` only enters via the ridge term of the
/// regularized method.
pub fn scalarize(
    spec: &ScalarizationSpec,
    w: &WeightVector,
    y: &[f64],
    x: &[f64],
) -> Result<f64> {
    let s = w.len();
    check_dims(s, y.len())?;
    match spec.method {
        ScalarizationMethod::WeightedSum => {
            Ok(w.as_slice().iter().zip(y).map(|(wi, yi)| wi * yi).sum())
        }
        ScalarizationMethod::WeightedTchebycheff => {
            check_dims(s, spec.ideal_point.len())?;
            Ok(weighted_max(w.as_slice(), y, &spec.ideal_point))
        }
        ScalarizationMethod::AugmentedTchebycheff => {
            check_dims(s, spec.ideal_point.len())?;
            let max_term = weighted_max(w.as_slice(), y, &spec.ideal_point);
            let sum_term: f64 = w.as_slice().iter().zip(y).map(|(wi, yi)| wi * yi).sum();
            Ok(max_term + spec.rho * sum_term)
        }
        ScalarizationMethod::RegularizedAugmentedTchebycheff => {
            let mut max_term = f64::NEG_INFINITY;
            let mut sum_term = 0.0;
            for (wi, yi) in w.as_slice().iter().zip(y) {
                max_term = max_term.max(wi * yi);
                sum_term += wi * yi;
            }
            let ridge = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            Ok(max_term + spec.rho * sum_term + spec.lambda * ridge)
        }
    }
}

fn weighted_max(w: &[f64], y: &[f64], ideal: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..w.len() {
        best = best.max(w[i] * (y[i] - ideal[i]));
    }
    best
}
