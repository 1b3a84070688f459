//! Pareto dominance, nondominated-set extraction, and the GP classifier
//! that learns the current front over input space.

use crate::error::{check_dims, Error, Result};
use crate::gp::{FitConfig, GpModel, KernelKind};

/// Weak dominance under minimization: `y1` is no worse everywhere and
/// strictly better somewhere.
pub fn dominates(y1: &[f64], y2: &[f64]) -> Result<bool> {
    check_dims(y1.len(), y2.len())?;
    let mut strict = false;
    for (a, b) in y1.iter().zip(y2) {
        if a > b {
            return Ok(false);
        }
        if a < b {
            strict = true;
        }
    }
    Ok(strict)
}

/// Label each objective vector with whether it is nondominated within the
/// set. Duplicate nondominated vectors are all labeled `true`.
///
/// Points are swept in lexicographic order; a point can only be dominated by
/// one that sorts before it, and by transitivity it suffices to test against
/// the nondominated prefix.
pub fn extract_front(objectives: &[Vec<f64>]) -> Result<Vec<bool>> {
    if objectives.is_empty() {
        return Err(Error::EmptyInput("objective set".into()));
    }
    let s = objectives[0].len();
    for y in objectives {
        check_dims(s, y.len())?;
    }

    let mut order: Vec<usize> = (0..objectives.len()).collect();
    order.sort_by(|&a, &b| {
        objectives[a]
            .partial_cmp(&objectives[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut labels = vec![false; objectives.len()];
    let mut front: Vec<usize> = Vec::new();
    for &idx in &order {
        let dominated = front
            .iter()
            .any(|&f| dominates(&objectives[f], &objectives[idx]).expect("dims checked"));
        if !dominated {
            labels[idx] = true;
            front.push(idx);
        }
    }
    Ok(labels)
}

/// GP trained on nondominated/dominated labels over input space.
#[derive(Debug, Clone)]
pub struct ParetoClassifier {
    gp: GpModel,
}

impl ParetoClassifier {
    pub fn gp(&self) -> &GpModel {
        &self.gp
    }
}

/// Fit the front classifier: labels are recomputed from scratch over the
/// feasible subset, infeasible points always carry label 0, and the GP is
/// trained on all inputs.
pub fn fit_pareto_classifier(
    inputs: &[Vec<f64>],
    feasible: &[bool],
    objectives: &[Option<Vec<f64>>],
    kind: KernelKind,
    config: &FitConfig,
) -> Result<ParetoClassifier> {
    check_dims(inputs.len(), feasible.len())?;
    check_dims(inputs.len(), objectives.len())?;
    let feasible_objs: Vec<Vec<f64>> = inputs
        .iter()
        .zip(feasible)
        .zip(objectives)
        .filter(|((_, &f), _)| f)
        .map(|((_, _), y)| {
            y.clone()
                .ok_or_else(|| Error::InvalidArgument("feasible point without objectives".into()))
        })
        .collect::<Result<_>>()?;
    if feasible_objs.is_empty() {
        return Err(Error::EmptyInput("feasible observations".into()));
    }
    let front = extract_front(&feasible_objs)?;

    let mut labels = Vec::with_capacity(inputs.len());
    let mut fi = 0;
    for &f in feasible {
        if f {
            labels.push(if front[fi] { 1.0 } else { 0.0 });
            fi += 1;
        } else {
            labels.push(0.0);
        }
    }
    let gp = GpModel::fit(inputs, &labels, kind, config)?;
    Ok(ParetoClassifier { gp })
}

/// Probability of lying on the current front, with the raw posterior
/// variance. The mean is clipped into `[0, 1]`.
pub fn pareto_probability(clf: &ParetoClassifier, x: &[f64]) -> Result<(f64, f64)> {
    let post = clf.gp.predict(x)?;
    Ok((post.mean.clamp(0.0, 1.0), post.variance))
}
