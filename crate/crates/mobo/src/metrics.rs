//! Front-quality metrics: generational distance, inverted generational
//! distance, exact hypervolume, and the log of relative hypervolume
//! difference.
//!
//! GD and IGD default to the square-root-of-summed-distances form; the
//! usual root-sum-of-squares variant is available through
//! [`DistanceAggregate`]. Hypervolume is an exact recursive
//! exclusive-volume computation under minimization.

use crate::error::{check_dims, Error, Result};
use crate::pareto::dominates;

/// How per-point nearest distances aggregate into GD/IGD.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceAggregate {
    /// `sqrt(sum d_i) / n`.
    SqrtOfSum,
    /// `sqrt(sum d_i^2) / n`.
    RootSumOfSquares,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn min_distance(point: &[f64], set: &[Vec<f64>]) -> f64 {
    set.iter()
        .map(|q| euclidean(point, q))
        .fold(f64::INFINITY, f64::min)
}

fn directed_distance(
    from: &[Vec<f64>],
    to: &[Vec<f64>],
    agg: DistanceAggregate,
) -> Result<f64> {
    if from.is_empty() {
        return Err(Error::EmptyInput("front".into()));
    }
    if to.is_empty() {
        return Err(Error::EmptyInput("reference front".into()));
    }
    let s = from[0].len();
    for p in from.iter().chain(to) {
        check_dims(s, p.len())?;
    }
    // Summation over sorted terms keeps the result exactly permutation
    // invariant.
    let mut terms: Vec<f64> = from
        .iter()
        .map(|p| {
            let d = min_distance(p, to);
            match agg {
                DistanceAggregate::SqrtOfSum => d,
                DistanceAggregate::RootSumOfSquares => d * d,
            }
        })
        .collect();
    terms.sort_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
    let sum: f64 = terms.iter().sum();
    Ok(sum.sqrt() / from.len() as f64)
}

/// Generational distance from the obtained front to the true front.
pub fn gd(front: &[Vec<f64>], true_front: &[Vec<f64>]) -> Result<f64> {
    gd_with(front, true_front, DistanceAggregate::SqrtOfSum)
}

pub fn gd_with(
    front: &[Vec<f64>],
    true_front: &[Vec<f64>],
    agg: DistanceAggregate,
) -> Result<f64> {
    directed_distance(front, true_front, agg)
}

/// Inverted generational distance: distances from each true-front point to
/// the obtained front.
pub fn igd(front: &[Vec<f64>], true_front: &[Vec<f64>]) -> Result<f64> {
    igd_with(front, true_front, DistanceAggregate::SqrtOfSum)
}

pub fn igd_with(
    front: &[Vec<f64>],
    true_front: &[Vec<f64>],
    agg: DistanceAggregate,
) -> Result<f64> {
    directed_distance(true_front, front, agg)
}

/// Exact hypervolume dominated by `front` relative to `reference` under
/// minimization. Every point must weakly dominate the reference.
pub fn hypervolume(front: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    if front.is_empty() {
        return Err(Error::EmptyInput("front".into()));
    }
    let s = reference.len();
    if s == 0 {
        return Err(Error::EmptyInput("reference point".into()));
    }
    for p in front {
        check_dims(s, p.len())?;
        if p.iter().zip(reference).any(|(v, r)| v > r) {
            return Err(Error::InvalidArgument(format!(
                "front point {p:?} exceeds the reference point {reference:?}"
            )));
        }
    }
    let pruned = nondominated_unique(front);
    Ok(wfg(&pruned, reference))
}

/// Keep one copy of each nondominated point, sorted by the first objective.
fn nondominated_unique(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut kept: Vec<Vec<f64>> = Vec::new();
    'outer: for p in points {
        for q in points {
            if dominates(q, p).expect("dims checked by caller") {
                continue 'outer;
            }
        }
        if !kept.iter().any(|k| k == p) {
            kept.push(p.clone());
        }
    }
    kept.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    kept
}

/// Sum of exclusive volumes, points processed in first-objective order.
fn wfg(sorted: &[Vec<f64>], reference: &[f64]) -> f64 {
    let mut total = 0.0;
    for (i, p) in sorted.iter().enumerate() {
        total += exclusive_volume(p, &sorted[i + 1..], reference);
    }
    total
}

fn box_volume(p: &[f64], reference: &[f64]) -> f64 {
    p.iter()
        .zip(reference)
        .map(|(v, r)| r - v)
        .product()
}

/// Volume dominated by `p` alone: its box minus the volume of the box
/// intersections with the remaining points.
fn exclusive_volume(p: &[f64], rest: &[Vec<f64>], reference: &[f64]) -> f64 {
    if rest.is_empty() {
        return box_volume(p, reference);
    }
    let limited: Vec<Vec<f64>> = rest
        .iter()
        .map(|q| {
            p.iter()
                .zip(q)
                .map(|(a, b)| a.max(*b))
                .collect::<Vec<f64>>()
        })
        .collect();
    let limited = nondominated_unique(&limited);
    box_volume(p, reference) - wfg(&limited, reference)
}

/// Log of absolute hypervolume difference; negative infinity marks an exact
/// match and is reported downstream as "exact".
pub fn lrhd(hv: f64, hv_ideal: f64) -> f64 {
    let diff = (hv - hv_ideal).abs();
    if diff == 0.0 {
        f64::NEG_INFINITY
    } else {
        diff.ln()
    }
}

/// Reference point policy: nadir of the true front plus a 10% margin of the
/// per-component front range (a unit margin where the range degenerates).
pub fn reference_from_front(true_front: &[Vec<f64>]) -> Result<Vec<f64>> {
    if true_front.is_empty() {
        return Err(Error::EmptyInput("reference front".into()));
    }
    let s = true_front[0].len();
    let mut nadir = vec![f64::NEG_INFINITY; s];
    let mut ideal = vec![f64::INFINITY; s];
    for p in true_front {
        check_dims(s, p.len())?;
        for i in 0..s {
            nadir[i] = nadir[i].max(p[i]);
            ideal[i] = ideal[i].min(p[i]);
        }
    }
    Ok((0..s)
        .map(|i| {
            let range = nadir[i] - ideal[i];
            let margin = if range > 1e-12 { range } else { 1.0 };
            nadir[i] + 0.1 * margin
        })
        .collect())
}

/// One metrics snapshot of an obtained front against the true front.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub gd: f64,
    pub igd: f64,
    pub hv: f64,
    pub lrhd: f64,
    pub front_size: usize,
    pub reference_point: Vec<f64>,
}

/// Evaluate all metrics at once. Obtained-front points beyond the reference
/// cannot enter the hypervolume box and are skipped there (they contribute
/// zero volume); GD/IGD always use the full front.
pub fn report(
    front: &[Vec<f64>],
    true_front: &[Vec<f64>],
    reference: &[f64],
) -> Result<MetricsReport> {
    if front.is_empty() {
        return Err(Error::EmptyInput("front".into()));
    }
    let gd_v = gd(front, true_front)?;
    let igd_v = igd(front, true_front)?;
    let within: Vec<Vec<f64>> = front
        .iter()
        .filter(|p| p.iter().zip(reference).all(|(v, r)| v <= r))
        .cloned()
        .collect();
    let hv_v = if within.is_empty() {
        0.0
    } else {
        hypervolume(&within, reference)?
    };
    let ideal_within: Vec<Vec<f64>> = true_front
        .iter()
        .filter(|p| p.iter().zip(reference).all(|(v, r)| v <= r))
        .cloned()
        .collect();
    let hv_ideal = if ideal_within.is_empty() {
        0.0
    } else {
        hypervolume(&ideal_within, reference)?
    };
    Ok(MetricsReport {
        gd: gd_v,
        igd: igd_v,
        hv: hv_v,
        lrhd: lrhd(hv_v, hv_ideal),
        front_size: front.len(),
        reference_point: reference.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gd_of_identical_fronts_is_zero() {
        let f = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(gd(&f, &f).unwrap(), 0.0);
    }

    #[test]
    fn gd_single_point_hand_value() {
        let front = vec![vec![0.0, 2.0]];
        let truth = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!((gd(&front, &truth).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn igd_hand_value() {
        let front = vec![vec![0.0, 0.0]];
        let truth = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let expected = 2.0_f64.sqrt() / 2.0;
        assert!((igd(&front, &truth).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn igd_zero_when_front_covers_truth() {
        let truth = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let front = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.8]];
        assert_eq!(igd(&front, &truth).unwrap(), 0.0);
    }

    #[test]
    fn gd_igd_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let front: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..3).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let truth: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..3).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let mut sum = 0.0;
        for p in &front {
            let mut best = f64::INFINITY;
            for q in &truth {
                let d: f64 = p
                    .iter()
                    .zip(q)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                best = best.min(d);
            }
            sum += best;
        }
        let oracle = sum.sqrt() / front.len() as f64;
        assert!((gd(&front, &truth).unwrap() - oracle).abs() < 1e-12);
        assert!((igd(&truth, &front).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn aggregate_forms_differ() {
        let front = vec![vec![0.0, 2.0], vec![3.0, 0.0]];
        let truth = vec![vec![0.0, 0.0]];
        let printed = gd_with(&front, &truth, DistanceAggregate::SqrtOfSum).unwrap();
        let conventional = gd_with(&front, &truth, DistanceAggregate::RootSumOfSquares).unwrap();
        assert!(((2.0_f64 + 3.0).sqrt() / 2.0 - printed).abs() < 1e-15);
        assert!(((4.0_f64 + 9.0).sqrt() / 2.0 - conventional).abs() < 1e-15);
    }

    #[test]
    fn unit_box_hypervolume() {
        let hv = hypervolume(&[vec![1.0, 1.0]], &[2.0, 2.0]).unwrap();
        assert!((hv - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_box_inclusion_exclusion() {
        let hv = hypervolume(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[2.0, 2.0]).unwrap();
        assert!((hv - 3.0).abs() < 1e-15);
    }

    #[test]
    fn dominated_and_duplicate_points_add_nothing() {
        let base = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let hv0 = hypervolume(&base, &[2.0, 2.0]).unwrap();
        let mut extended = base.clone();
        extended.push(vec![1.5, 1.5]);
        extended.push(vec![0.0, 1.0]);
        let hv1 = hypervolume(&extended, &[2.0, 2.0]).unwrap();
        assert_eq!(hv0, hv1);
    }

    #[test]
    fn point_beyond_reference_is_rejected() {
        let err = hypervolume(&[vec![3.0, 0.0]], &[2.0, 2.0]).unwrap_err();
        assert!(err.to_string().contains("3.0"));
    }

    #[test]
    fn adding_a_point_never_decreases_hypervolume() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let reference = vec![1.0, 1.0, 1.0];
            let pts: Vec<Vec<f64>> = (0..6)
                .map(|_| (0..3).map(|_| rng.gen_range(0.0..1.0)).collect())
                .collect();
            let hv0 = hypervolume(&pts[..5], &reference).unwrap();
            let hv1 = hypervolume(&pts, &reference).unwrap();
            assert!(hv1 >= hv0 - 1e-12);
        }
    }

    #[test]
    fn three_objective_matches_inclusion_exclusion() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let reference = vec![1.0, 1.0, 1.0];
        for _ in 0..20 {
            let pts: Vec<Vec<f64>> = (0..6)
                .map(|_| (0..3).map(|_| rng.gen_range(0.0..1.0)).collect())
                .collect();
            let hv = hypervolume(&pts, &reference).unwrap();
            let oracle = inclusion_exclusion(&pts, &reference);
            assert!((hv - oracle).abs() < 1e-10, "{hv} vs {oracle}");
        }
    }

    fn inclusion_exclusion(pts: &[Vec<f64>], reference: &[f64]) -> f64 {
        let n = pts.len();
        let mut total = 0.0;
        for mask in 1u32..(1 << n) {
            let mut corner = vec![f64::NEG_INFINITY; reference.len()];
            for i in 0..n {
                if mask & (1 << i) != 0 {
                    for (c, v) in corner.iter_mut().zip(&pts[i]) {
                        *c = c.max(*v);
                    }
                }
            }
            let vol: f64 = corner.iter().zip(reference).map(|(c, r)| r - c).product();
            if mask.count_ones() % 2 == 1 {
                total += vol;
            } else {
                total -= vol;
            }
        }
        total
    }

    #[test]
    fn sweep_line_agrees_for_two_objectives() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..20 {
            let pts: Vec<Vec<f64>> = (0..15)
                .map(|_| (0..2).map(|_| rng.gen_range(0.0..1.0)).collect())
                .collect();
            let reference = vec![1.5, 1.5];
            let hv = hypervolume(&pts, &reference).unwrap();
            let sweep = sweep_line_2d(&pts, &reference);
            assert!((hv - sweep).abs() < 1e-12);
        }
    }

    fn sweep_line_2d(pts: &[Vec<f64>], reference: &[f64]) -> f64 {
        let mut sorted = pts.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut hv = 0.0;
        let mut best_f2 = reference[1];
        for p in &sorted {
            if p[1] < best_f2 {
                hv += (reference[0] - p[0]) * (best_f2 - p[1]);
                best_f2 = p[1];
            }
        }
        hv
    }

    #[test]
    fn lrhd_hand_values() {
        assert_eq!(lrhd(2.0, 1.0), 0.0);
        assert_eq!(lrhd(1.0, 1.0), f64::NEG_INFINITY);
        assert!((lrhd(1.1, 1.0) - 0.1_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut front: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..2).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let truth: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..2).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let g0 = gd(&front, &truth).unwrap();
        let i0 = igd(&front, &truth).unwrap();
        front.reverse();
        assert_eq!(gd(&front, &truth).unwrap(), g0);
        assert_eq!(igd(&front, &truth).unwrap(), i0);
    }

    #[test]
    fn reference_policy_adds_margin() {
        let truth = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let r = reference_from_front(&truth).unwrap();
        assert!((r[0] - 1.1).abs() < 1e-12);
        assert!((r[1] - 1.1).abs() < 1e-12);
    }

    #[test]
    fn report_skips_points_beyond_reference() {
        let truth = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let reference = reference_from_front(&truth).unwrap();
        let front = vec![vec![0.5, 0.5], vec![5.0, 5.0]];
        let rep = report(&front, &truth, &reference).unwrap();
        assert_eq!(rep.front_size, 2);
        let hv_clean = hypervolume(&[vec![0.5, 0.5]], &reference).unwrap();
        assert_eq!(rep.hv, hv_clean);
        assert!(rep.gd > 0.0);
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(gd(&[], &[vec![0.0]]).is_err());
        assert!(igd(&[vec![0.0]], &[]).is_err());
        assert!(hypervolume(&[], &[1.0]).is_err());
    }
}
