//! Analytical multi-objective test problems and their discretized true
//! fronts.
//!
//! The DTLZ family is implemented with the 0.5 prefactor on every objective
//! and the slot conventions used by the benchmark protocol this library
//! targets; `canonical: true` switches to the usual Deb et al. forms for
//! cross-checking. ZDT problems are bi-objective; DTLZ supports any `m >= 2`
//! with `d = m + k - 1`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{check_dims, Error, Result};
use crate::pareto::extract_front;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchmarkName {
    Zdt1,
    Zdt2,
    Zdt3,
    Zdt4,
    Zdt6,
    Dtlz1,
    Dtlz2,
    Dtlz3,
    Dtlz4,
    Dtlz5,
    Dtlz6,
}

impl BenchmarkName {
    pub const ALL: [BenchmarkName; 11] = [
        BenchmarkName::Zdt1,
        BenchmarkName::Zdt2,
        BenchmarkName::Zdt3,
        BenchmarkName::Zdt4,
        BenchmarkName::Zdt6,
        BenchmarkName::Dtlz1,
        BenchmarkName::Dtlz2,
        BenchmarkName::Dtlz3,
        BenchmarkName::Dtlz4,
        BenchmarkName::Dtlz5,
        BenchmarkName::Dtlz6,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkName::Zdt1 => "ZDT1",
            BenchmarkName::Zdt2 => "ZDT2",
            BenchmarkName::Zdt3 => "ZDT3",
            BenchmarkName::Zdt4 => "ZDT4",
            BenchmarkName::Zdt6 => "ZDT6",
            BenchmarkName::Dtlz1 => "DTLZ1",
            BenchmarkName::Dtlz2 => "DTLZ2",
            BenchmarkName::Dtlz3 => "DTLZ3",
            BenchmarkName::Dtlz4 => "DTLZ4",
            BenchmarkName::Dtlz5 => "DTLZ5",
            BenchmarkName::Dtlz6 => "DTLZ6",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let up = s.to_ascii_uppercase();
        Self::ALL
            .iter()
            .find(|n| n.name() == up)
            .copied()
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|n| n.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown benchmark '{s}' (valid names: {})",
                    names.join(", ")
                ))
            })
    }

    pub fn is_zdt(&self) -> bool {
        matches!(
            self,
            BenchmarkName::Zdt1
                | BenchmarkName::Zdt2
                | BenchmarkName::Zdt3
                | BenchmarkName::Zdt4
                | BenchmarkName::Zdt6
        )
    }

    /// Protocol defaults: `(d, m)` of 3/2 for ZDT and 4/3 for DTLZ.
    pub fn default_dims(&self) -> (usize, usize) {
        if self.is_zdt() {
            (3, 2)
        } else {
            (4, 3)
        }
    }
}

impl std::fmt::Display for BenchmarkName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub name: BenchmarkName,
    pub d: usize,
    pub m: usize,
    /// DTLZ4 exponent on the cosine slots.
    pub alpha: f64,
    /// Use the standard Deb et al. DTLZ forms instead of the defaults.
    pub canonical: bool,
}

/// Discretized true front.
#[derive(Debug, Clone)]
pub struct TrueFront {
    pub points: Vec<Vec<f64>>,
    pub resolution: usize,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

impl BenchmarkSpec {
    pub fn new(name: BenchmarkName, d: usize, m: usize) -> Result<Self> {
        if name.is_zdt() {
            if m != 2 {
                return Err(Error::InvalidArgument(format!(
                    "{name} is bi-objective, got m = {m}"
                )));
            }
            if d < 2 {
                return Err(Error::InvalidArgument(format!(
                    "{name} needs d >= 2, got {d}"
                )));
            }
        } else {
            if m < 2 {
                return Err(Error::InvalidArgument(format!(
                    "{name} needs m >= 2, got {m}"
                )));
            }
            if d < m {
                return Err(Error::InvalidArgument(format!(
                    "{name} needs d = m + k - 1 with k >= 1, got d = {d}, m = {m}"
                )));
            }
        }
        Ok(Self {
            name,
            d,
            m,
            alpha: 1.0,
            canonical: false,
        })
    }

    pub fn with_defaults(name: BenchmarkName) -> Self {
        let (d, m) = name.default_dims();
        Self::new(name, d, m).expect("defaults are valid")
    }

    /// Number of tail variables feeding the DTLZ distance function.
    pub fn k(&self) -> usize {
        self.d - self.m + 1
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        match self.name {
            BenchmarkName::Zdt4 => {
                let mut b = vec![(0.0, 1.0)];
                b.extend(std::iter::repeat((-5.0, 5.0)).take(self.d - 1));
                b
            }
            _ => vec![(0.0, 1.0); self.d],
        }
    }

    fn check_bounds(&self, x: &[f64]) -> Result<()> {
        check_dims(self.d, x.len())?;
        for (i, (&v, (lo, hi))) in x.iter().zip(self.bounds()).enumerate() {
            if !(lo..=hi).contains(&v) {
                return Err(Error::InvalidArgument(format!(
                    "x[{i}] = {v} outside [{lo}, {hi}] for {}",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Objective vector at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_bounds(x)?;
        Ok(match self.name {
            BenchmarkName::Zdt1 => self.zdt(x, |f1, g| 1.0 - (f1 / g).sqrt()),
            BenchmarkName::Zdt2 => self.zdt(x, |f1, g| 1.0 - (f1 / g).powi(2)),
            BenchmarkName::Zdt3 => self.zdt(x, |f1, g| {
                1.0 - (f1 / g).sqrt() - (f1 / g) * (10.0 * PI * f1).sin()
            }),
            BenchmarkName::Zdt4 => {
                let f1 = x[0];
                let g = 1.0
                    + 10.0 * (self.d - 1) as f64
                    + x[1..]
                        .iter()
                        .map(|&v| v * v - 10.0 * (4.0 * PI * v).cos())
                        .sum::<f64>();
                let h = 1.0 - (f1 / g).sqrt();
                vec![f1, g * h]
            }
            BenchmarkName::Zdt6 => {
                let f1 = zdt6_f1(x[0]);
                let tail: f64 = x[1..].iter().map(|v| v / (self.d - 1) as f64).sum();
                let g = 1.0 + 9.0 * tail.powf(0.25);
                let h = 1.0 - (f1 / g).powi(2);
                vec![f1, g * h]
            }
            BenchmarkName::Dtlz1 => {
                let g = self.dtlz1_g(x);
                self.dtlz1_objectives(&x[..self.m - 1], g)
            }
            _ => {
                let g = self.dtlz_g(x);
                let (cos_slots, sin_slots) = self.dtlz_slots(&x[..self.m - 1], g);
                self.dtlz_objectives(&cos_slots, &sin_slots, g)
            }
        })
    }

    fn zdt(&self, x: &[f64], h: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let f1 = x[0];
        let g = 1.0 + 9.0 * x[1..].iter().map(|v| v / (self.d - 1) as f64).sum::<f64>();
        vec![f1, g * h(f1, g)]
    }

    fn dtlz1_g(&self, x: &[f64]) -> f64 {
        let phi = |v: f64| (v - 0.5) * (v - 0.5) - (20.0 * PI * (v - 0.5)).cos();
        if self.canonical {
            100.0 * (self.k() as f64 + x[self.m - 1..].iter().map(|&v| phi(v)).sum::<f64>())
        } else {
            100.0 * (self.d as f64 + x.iter().map(|&v| phi(v)).sum::<f64>())
        }
    }

    fn dtlz_g(&self, x: &[f64]) -> f64 {
        let tail = &x[self.m - 1..];
        match self.name {
            BenchmarkName::Dtlz2 | BenchmarkName::Dtlz4 | BenchmarkName::Dtlz5 => {
                tail.iter().map(|&v| (v - 0.5) * (v - 0.5)).sum()
            }
            BenchmarkName::Dtlz3 => {
                let phi = |v: f64| (v - 0.5) * (v - 0.5) - (20.0 * PI * (v - 0.5)).cos();
                100.0 * (self.k() as f64 + tail.iter().map(|&v| phi(v)).sum::<f64>())
            }
            BenchmarkName::Dtlz6 => tail.iter().map(|&v| v.powf(0.1)).sum(),
            _ => unreachable!("dtlz_g only serves DTLZ2-6"),
        }
    }

    /// Values entering `cos(. * pi/2)` and `sin(. * pi/2)` for each of the
    /// `m - 1` position variables.
    fn dtlz_slots(&self, pos: &[f64], g: f64) -> (Vec<f64>, Vec<f64>) {
        match self.name {
            BenchmarkName::Dtlz2 | BenchmarkName::Dtlz3 => (pos.to_vec(), pos.to_vec()),
            BenchmarkName::Dtlz4 => {
                let warped: Vec<f64> = pos.iter().map(|v| v.powf(self.alpha)).collect();
                if self.canonical {
                    (warped.clone(), warped)
                } else {
                    (warped, pos.to_vec())
                }
            }
            BenchmarkName::Dtlz5 | BenchmarkName::Dtlz6 => {
                let angle = |v: f64| {
                    if self.canonical {
                        // theta_i in units of pi/2.
                        (1.0 + 2.0 * g * v) / (2.0 * (1.0 + g))
                    } else {
                        PI * (1.0 + 2.0 * g * v) / (4.0 * (1.0 + g))
                    }
                };
                let mut cos_slots = Vec::with_capacity(pos.len());
                for (i, &v) in pos.iter().enumerate() {
                    cos_slots.push(if i == 0 { v } else { angle(v) });
                }
                let sin_slots = if self.canonical {
                    cos_slots.clone()
                } else {
                    pos.to_vec()
                };
                (cos_slots, sin_slots)
            }
            _ => unreachable!("slots only serve DTLZ2-6"),
        }
    }

    fn prefactor(&self) -> f64 {
        if self.canonical && self.name != BenchmarkName::Dtlz1 {
            1.0
        } else {
            0.5
        }
    }

    fn dtlz_objectives(&self, cos_slots: &[f64], sin_slots: &[f64], g: f64) -> Vec<f64> {
        let m = self.m;
        let scale = self.prefactor() * (1.0 + g);
        let cosv: Vec<f64> = cos_slots.iter().map(|&v| (v * PI / 2.0).cos()).collect();
        let sinv: Vec<f64> = sin_slots.iter().map(|&v| (v * PI / 2.0).sin()).collect();
        let mut f = Vec::with_capacity(m);
        f.push(scale * cosv.iter().product::<f64>());
        for k in 2..m {
            let prod: f64 = cosv[..m - k].iter().product();
            f.push(scale * prod * sinv[m - k]);
        }
        f.push(scale * sinv[0]);
        f
    }

    fn dtlz1_objectives(&self, pos: &[f64], g: f64) -> Vec<f64> {
        let m = self.m;
        let scale = 0.5 * (1.0 + g);
        let mut f = Vec::with_capacity(m);
        f.push(scale * pos.iter().product::<f64>());
        for k in 2..m {
            let prod: f64 = pos[..m - k].iter().product();
            f.push(scale * prod * (1.0 - pos[m - k]));
        }
        f.push(scale * (1.0 - pos[0]));
        f
    }

    /// Discretize the analytical front with roughly `resolution` points.
    pub fn true_front(&self, resolution: usize) -> Result<TrueFront> {
        if resolution < 2 {
            return Err(Error::InvalidArgument(format!(
                "front resolution must be at least 2, got {resolution}"
            )));
        }
        let points = match self.name {
            BenchmarkName::Zdt1 | BenchmarkName::Zdt4 => linspace(0.0, 1.0, resolution)
                .into_iter()
                .map(|f1| vec![f1, 1.0 - f1.sqrt()])
                .collect(),
            BenchmarkName::Zdt2 => linspace(0.0, 1.0, resolution)
                .into_iter()
                .map(|f1| vec![f1, 1.0 - f1 * f1])
                .collect(),
            BenchmarkName::Zdt6 => {
                let f1_min = zdt6_f1_minimum();
                linspace(f1_min, 1.0, resolution)
                    .into_iter()
                    .map(|f1| vec![f1, 1.0 - f1 * f1])
                    .collect()
            }
            BenchmarkName::Zdt3 => {
                // The discontinuous front has no closed intervals; dominance-
                // filter a dense curve and thin it to the requested size.
                let dense = resolution.max(10_000);
                let curve: Vec<Vec<f64>> = linspace(0.0, 1.0, dense)
                    .into_iter()
                    .map(|f1| vec![f1, 1.0 - f1.sqrt() - f1 * (10.0 * PI * f1).sin()])
                    .collect();
                let labels = extract_front(&curve)?;
                let kept: Vec<Vec<f64>> = curve
                    .into_iter()
                    .zip(labels)
                    .filter(|(_, l)| *l)
                    .map(|(p, _)| p)
                    .collect();
                let stride = (kept.len() / resolution).max(1);
                kept.into_iter().step_by(stride).collect()
            }
            BenchmarkName::Dtlz1 => {
                let total = if self.canonical { 0.5 } else { 0.25 };
                simplex_lattice(self.m, resolution)
                    .into_iter()
                    .map(|u| u.into_iter().map(|v| v * total).collect())
                    .collect()
            }
            BenchmarkName::Dtlz2 | BenchmarkName::Dtlz3 | BenchmarkName::Dtlz4 => {
                let per_axis = if self.m == 2 {
                    resolution
                } else {
                    (resolution as f64)
                        .powf(1.0 / (self.m - 1) as f64)
                        .ceil()
                        .max(2.0) as usize
                };
                let grid = linspace(0.0, 1.0, per_axis);
                let mut points = Vec::new();
                let mut pos = vec![0.0; self.m - 1];
                cartesian(&grid, &mut pos, 0, &mut |pos| {
                    let (c, s) = self.dtlz_slots(pos, 0.0);
                    points.push(self.dtlz_objectives(&c, &s, 0.0));
                });
                nondominated_unique(points)?
            }
            BenchmarkName::Dtlz5 | BenchmarkName::Dtlz6 => {
                let mut points = Vec::new();
                for x1 in linspace(0.0, 1.0, resolution) {
                    let mut pos = vec![0.0; self.m - 1];
                    pos[0] = x1;
                    let (c, s) = self.dtlz_slots(&pos, 0.0);
                    points.push(self.dtlz_objectives(&c, &s, 0.0));
                }
                nondominated_unique(points)?
            }
        };
        Ok(TrueFront { points, resolution })
    }
}

fn nondominated_unique(mut points: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    let labels = extract_front(&points)?;
    let mut kept: Vec<Vec<f64>> = points
        .drain(..)
        .zip(labels)
        .filter(|(_, l)| *l)
        .map(|(p, _)| p)
        .collect();
    kept.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    kept.dedup();
    Ok(kept)
}

fn cartesian(grid: &[f64], pos: &mut [f64], depth: usize, emit: &mut impl FnMut(&[f64])) {
    if depth == pos.len() {
        emit(pos);
        return;
    }
    for &v in grid {
        pos[depth] = v;
        cartesian(grid, pos, depth + 1, emit);
    }
}

/// Barycentric lattice on the unit simplex with at least `min_points`
/// points.
fn simplex_lattice(m: usize, min_points: usize) -> Vec<Vec<f64>> {
    let mut steps = 1usize;
    loop {
        let count = compositions_count(steps, m);
        if count >= min_points {
            break;
        }
        steps += 1;
    }
    let mut out = Vec::new();
    let mut current = vec![0usize; m];
    compositions(steps, m, 0, steps, &mut current, &mut out);
    out.into_iter()
        .map(|c| c.into_iter().map(|v| v as f64 / steps as f64).collect())
        .collect()
}

fn compositions_count(steps: usize, parts: usize) -> usize {
    // C(steps + parts - 1, parts - 1)
    let mut num = 1usize;
    for i in 0..parts - 1 {
        num = num * (steps + i + 1) / (i + 1);
    }
    num
}

fn compositions(
    steps: usize,
    parts: usize,
    idx: usize,
    remaining: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if idx == parts - 1 {
        current[idx] = remaining;
        out.push(current.clone());
        return;
    }
    for v in 0..=remaining {
        current[idx] = v;
        compositions(steps, parts, idx + 1, remaining - v, current, out);
    }
}

fn zdt6_f1(x1: f64) -> f64 {
    1.0 - (-4.0 * x1).exp() * (6.0 * PI * x1).sin().powi(6)
}

/// Smallest attainable first objective of ZDT6, found numerically once.
fn zdt6_f1_minimum() -> f64 {
    static MIN: OnceLock<f64> = OnceLock::new();
    *MIN.get_or_init(|| {
        let mut best_x = 0.0;
        let mut best = f64::INFINITY;
        for i in 0..=200_000 {
            let x = i as f64 / 200_000.0;
            let v = zdt6_f1(x);
            if v < best {
                best = v;
                best_x = x;
            }
        }
        // Golden-section refinement around the grid minimum.
        let mut a: f64 = (best_x - 1e-5).max(0.0);
        let mut b: f64 = (best_x + 1e-5).min(1.0);
        let inv_phi = 0.618_033_988_749_894_9;
        for _ in 0..80 {
            let c = b - inv_phi * (b - a);
            let d = a + inv_phi * (b - a);
            if zdt6_f1(c) < zdt6_f1(d) {
                b = d;
            } else {
                a = c;
            }
        }
        zdt6_f1(0.5 * (a + b))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pareto::dominates;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_point(spec: &BenchmarkSpec, rng: &mut impl Rng) -> Vec<f64> {
        spec.bounds()
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..hi))
            .collect()
    }

    #[test]
    fn zdt1_hand_values() {
        let spec = BenchmarkSpec::new(BenchmarkName::Zdt1, 3, 2).unwrap();
        let f = spec.evaluate(&[1.0, 0.0, 0.0]).unwrap();
        assert!((f[0] - 1.0).abs() < 1e-15);
        assert!(f[1].abs() < 1e-15);
        let f = spec.evaluate(&[0.0, 0.0, 0.0]).unwrap();
        assert!(f[0].abs() < 1e-15);
        assert!((f[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zdt4_hand_value() {
        let spec = BenchmarkSpec::new(BenchmarkName::Zdt4, 3, 2).unwrap();
        let f = spec.evaluate(&[0.5, 0.0, 0.0]).unwrap();
        assert!((f[0] - 0.5).abs() < 1e-15);
        assert!((f[1] - (1.0 - 0.5_f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn dtlz2_hand_value() {
        let spec = BenchmarkSpec::new(BenchmarkName::Dtlz2, 4, 3).unwrap();
        let f = spec.evaluate(&[0.0, 0.0, 0.5, 0.5]).unwrap();
        assert!((f[0] - 0.5).abs() < 1e-15);
        assert!(f[1].abs() < 1e-15);
        assert!(f[2].abs() < 1e-15);
    }

    #[test]
    fn out_of_bounds_rejected() {
        let spec = BenchmarkSpec::new(BenchmarkName::Zdt1, 3, 2).unwrap();
        assert!(spec.evaluate(&[1.5, 0.0, 0.0]).is_err());
        assert!(spec.evaluate(&[0.5, 0.0]).is_err());
        let zdt4 = BenchmarkSpec::new(BenchmarkName::Zdt4, 3, 2).unwrap();
        assert!(zdt4.evaluate(&[0.5, -4.0, 4.0]).is_ok());
        assert!(zdt4.evaluate(&[0.5, -6.0, 0.0]).is_err());
    }

    #[test]
    fn invalid_shapes_rejected() {
        assert!(BenchmarkSpec::new(BenchmarkName::Zdt1, 3, 3).is_err());
        assert!(BenchmarkSpec::new(BenchmarkName::Zdt1, 1, 2).is_err());
        assert!(BenchmarkSpec::new(BenchmarkName::Dtlz2, 2, 3).is_err());
        assert!(BenchmarkName::parse("ZDT5").is_err());
        assert_eq!(BenchmarkName::parse("dtlz3").unwrap(), BenchmarkName::Dtlz3);
    }

    #[test]
    fn all_benchmarks_finite_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for name in BenchmarkName::ALL {
            let spec = BenchmarkSpec::with_defaults(name);
            for _ in 0..1000 {
                let x = random_point(&spec, &mut rng);
                let f = spec.evaluate(&x).unwrap();
                assert_eq!(f.len(), spec.m);
                assert!(f.iter().all(|v| v.is_finite()), "{name} at {x:?} -> {f:?}");
            }
        }
    }

    #[test]
    fn zdt_first_objective_ignores_tail_variables() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for name in [
            BenchmarkName::Zdt1,
            BenchmarkName::Zdt2,
            BenchmarkName::Zdt3,
            BenchmarkName::Zdt4,
            BenchmarkName::Zdt6,
        ] {
            let spec = BenchmarkSpec::with_defaults(name);
            for _ in 0..50 {
                let mut x = random_point(&spec, &mut rng);
                let f1 = spec.evaluate(&x).unwrap()[0];
                let bounds = spec.bounds();
                for i in 1..spec.d {
                    x[i] = rng.gen_range(bounds[i].0..bounds[i].1);
                }
                let f1_perturbed = spec.evaluate(&x).unwrap()[0];
                assert_eq!(f1, f1_perturbed, "{name}");
            }
        }
    }

    #[test]
    fn dtlz_sphere_radius_at_zero_g() {
        // With the tail pinned at 0.5 the distance function vanishes and the
        // objectives lie on the sphere of radius 0.5.
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for name in [BenchmarkName::Dtlz2, BenchmarkName::Dtlz3, BenchmarkName::Dtlz4] {
            let spec = BenchmarkSpec::new(name, 4, 3).unwrap();
            for _ in 0..100 {
                let mut x = vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), 0.5, 0.5];
                if name == BenchmarkName::Dtlz3 {
                    x[2] = 0.5;
                    x[3] = 0.5;
                }
                let f = spec.evaluate(&x).unwrap();
                let r2: f64 = f.iter().map(|v| v * v).sum();
                assert!((r2 - 0.25).abs() < 1e-12, "{name}: {f:?}");
            }
        }
    }

    #[test]
    fn canonical_dtlz2_has_unit_radius() {
        let mut spec = BenchmarkSpec::new(BenchmarkName::Dtlz2, 4, 3).unwrap();
        spec.canonical = true;
        let f = spec.evaluate(&[0.3, 0.7, 0.5, 0.5]).unwrap();
        let r2: f64 = f.iter().map(|v| v * v).sum();
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dtlz1_forms_differ_in_distance_function() {
        let printed = BenchmarkSpec::new(BenchmarkName::Dtlz1, 4, 3).unwrap();
        let mut canonical = printed.clone();
        canonical.canonical = true;
        // At the all-0.5 point both distance functions vanish.
        let x = vec![0.5; 4];
        let fp = printed.evaluate(&x).unwrap();
        let fc = canonical.evaluate(&x).unwrap();
        assert_eq!(fp, fc);
        // Moving a position variable inflates only the form whose sum spans
        // every coordinate.
        let x = vec![0.4, 0.5, 0.5, 0.5];
        let fp = printed.evaluate(&x).unwrap();
        let fc = canonical.evaluate(&x).unwrap();
        assert!(fp.iter().sum::<f64>() > fc.iter().sum::<f64>());
    }

    #[test]
    fn zdt1_front_hand_point() {
        let spec = BenchmarkSpec::new(BenchmarkName::Zdt1, 3, 2).unwrap();
        let front = spec.true_front(5).unwrap();
        assert!(front
            .points
            .iter()
            .any(|p| (p[0] - 0.25).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12));
    }

    #[test]
    fn zdt3_front_is_already_nondominated() {
        let spec = BenchmarkSpec::new(BenchmarkName::Zdt3, 3, 2).unwrap();
        let front = spec.true_front(300).unwrap();
        let labels = extract_front(&front.points).unwrap();
        assert!(labels.iter().all(|&l| l));
        // The curve itself is partly dominated, so filtering must have
        // removed something relative to the dense curve.
        assert!(front.points.len() >= 100);
    }

    #[test]
    fn dtlz2_front_contains_corner() {
        let spec = BenchmarkSpec::new(BenchmarkName::Dtlz2, 4, 3).unwrap();
        let front = spec.true_front(200).unwrap();
        assert!(front
            .points
            .iter()
            .any(|p| (p[0] - 0.5).abs() < 1e-12 && p[1].abs() < 1e-12 && p[2].abs() < 1e-12));
    }

    #[test]
    fn every_front_is_internally_nondominated() {
        for name in BenchmarkName::ALL {
            let spec = BenchmarkSpec::with_defaults(name);
            let front = spec.true_front(150).unwrap();
            assert!(!front.points.is_empty(), "{name}");
            let labels = extract_front(&front.points).unwrap();
            assert!(labels.iter().all(|&l| l), "{name} front has dominated points");
        }
    }

    #[test]
    fn zdt6_front_starts_at_the_transform_minimum() {
        let spec = BenchmarkSpec::new(BenchmarkName::Zdt6, 3, 2).unwrap();
        let front = spec.true_front(100).unwrap();
        let min_f1 = front
            .points
            .iter()
            .map(|p| p[0])
            .fold(f64::INFINITY, f64::min);
        // Known location of the global minimum of the ZDT6 transform.
        assert!((min_f1 - zdt6_f1_minimum()).abs() < 1e-12);
        assert!(min_f1 > 0.28 && min_f1 < 0.29, "min f1 = {min_f1}");
    }

    #[test]
    fn dtlz1_front_sums_match_form() {
        let printed = BenchmarkSpec::new(BenchmarkName::Dtlz1, 4, 3).unwrap();
        let front = printed.true_front(100).unwrap();
        for p in &front.points {
            assert!((p.iter().sum::<f64>() - 0.25).abs() < 1e-12);
        }
        let mut canonical = printed.clone();
        canonical.canonical = true;
        let front = canonical.true_front(100).unwrap();
        for p in &front.points {
            assert!((p.iter().sum::<f64>() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn dtlz5_front_is_a_curve_reachable_by_evaluate() {
        let spec = BenchmarkSpec::new(BenchmarkName::Dtlz5, 4, 3).unwrap();
        let front = spec.true_front(64).unwrap();
        // Each front point must be the image of an input with zero distance
        // function.
        for p in front.points.iter().take(8) {
            let mut found = false;
            for x1 in linspace(0.0, 1.0, 64) {
                let f = spec.evaluate(&[x1, 0.0, 0.5, 0.5]).unwrap();
                if f.iter().zip(p).all(|(a, b)| (a - b).abs() < 1e-9) {
                    found = true;
                    break;
                }
            }
            assert!(found, "front point {p:?} not in the g = 0 image");
        }
        for p in &front.points {
            assert!(!dominates(&front.points[0], p).unwrap() || p == &front.points[0]);
        }
    }

    #[test]
    fn dtlz6_zero_tail_reaches_zero_distance() {
        let spec = BenchmarkSpec::new(BenchmarkName::Dtlz6, 4, 3).unwrap();
        assert_eq!(spec.dtlz_g(&[0.3, 0.4, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn simplex_lattice_covers_the_simplex() {
        let pts = simplex_lattice(3, 100);
        assert!(pts.len() >= 100);
        for p in &pts {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}
