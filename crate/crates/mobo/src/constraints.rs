//! Known-constraint masking and the feasibility classifier for hidden
//! constraints.
//!
//! Known constraints are cheap predicates `g(x) <= 0` checked before any
//! expensive evaluation. Hidden constraints are only observed through
//! evaluation success or failure; their labels never change once assigned.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dims, Error, Result};
use crate::gp::{FitConfig, GpModel, KernelKind};

/// One known constraint; feasible means `g(x) <= 0`.
#[derive(Clone)]
pub enum KnownConstraint {
    /// `lower <= x[dim] <= upper`.
    Bound { dim: usize, lower: f64, upper: f64 },
    /// `coeffs . x - rhs <= 0`.
    Linear { coeffs: Vec<f64>, rhs: f64 },
    /// Arbitrary residual function, feasible when nonpositive.
    Custom(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl KnownConstraint {
    /// Constraint residual; nonpositive values are feasible.
    pub fn residual(&self, x: &[f64]) -> f64 {
        match self {
            KnownConstraint::Bound { dim, lower, upper } => {
                let v = x[*dim];
                (lower - v).max(v - upper)
            }
            KnownConstraint::Linear { coeffs, rhs } => {
                coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() - rhs
            }
            KnownConstraint::Custom(f) => f(x),
        }
    }
}

impl fmt::Debug for KnownConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KnownConstraint::Bound { dim, lower, upper } => f
                .debug_struct("Bound")
                .field("dim", dim)
                .field("lower", lower)
                .field("upper", upper)
                .finish(),
            KnownConstraint::Linear { coeffs, rhs } => f
                .debug_struct("Linear")
                .field("coeffs", coeffs)
                .field("rhs", rhs)
                .finish(),
            KnownConstraint::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Conjunction of known constraints. The empty set is vacuously feasible.
#[derive(Debug, Clone, Default)]
pub struct KnownConstraintSet {
    constraints: Vec<KnownConstraint>,
}

impl KnownConstraintSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(constraints: Vec<KnownConstraint>) -> Self {
        Self { constraints }
    }

    pub fn push(&mut self, c: KnownConstraint) {
        self.constraints.push(c);
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn is_satisfied(&self, x: &[f64]) -> bool {
        self.constraints.iter().all(|c| c.residual(x) <= 0.0)
    }
}

/// Indicator of Eq-style masking: 1 when every constraint holds, else 0.
pub fn known_indicator(cset: &KnownConstraintSet, x: &[f64]) -> u8 {
    if cset.is_satisfied(x) {
        1
    } else {
        0
    }
}

/// Probability model of evaluation success. Uniform label sets short-circuit
/// to the constant 0 or 1 instead of fitting a degenerate GP.
#[derive(Debug, Clone)]
pub enum FeasibilityClassifier {
    Constant(f64),
    Gp(GpModel),
}

/// Fit the hidden-constraint classifier from fixed binary labels.
pub fn fit_feasibility(
    inputs: &[Vec<f64>],
    labels: &[bool],
    kind: KernelKind,
    config: &FitConfig,
) -> Result<FeasibilityClassifier> {
    if inputs.is_empty() {
        return Err(Error::EmptyInput("feasibility observations".into()));
    }
    check_dims(inputs.len(), labels.len())?;
    if labels.iter().all(|&l| l) {
        return Ok(FeasibilityClassifier::Constant(1.0));
    }
    if labels.iter().all(|&l| !l) {
        return Ok(FeasibilityClassifier::Constant(0.0));
    }
    let targets: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();
    let gp = GpModel::fit(inputs, &targets, kind, config)?;
    Ok(FeasibilityClassifier::Gp(gp))
}

/// Clipped posterior probability that `x` passes the hidden constraints.
pub fn feasibility_probability(clf: &FeasibilityClassifier, x: &[f64]) -> Result<f64> {
    match clf {
        FeasibilityClassifier::Constant(p) => Ok(*p),
        FeasibilityClassifier::Gp(gp) => Ok(gp.predict(x)?.mean.clamp(0.0, 1.0)),
    }
}
