//! Acquisition functions over fitted surrogates and the composite product
//! that drives candidate selection.
//!
//! Everything here uses the maximization convention: the driver negates the
//! scalarized objective before fitting, so larger posterior means are
//! better. UCB can be negative, which would corrupt a product of factors;
//! callers shift it by the minimum over their probe set and floor at zero
//! (see [`CompositeSettings`]).

use statrs::function::erf::erfc;

use crate::cmaes::{self, CmaesConfig};
use crate::error::{Error, Result};
use crate::gp::Posterior;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.39894228040143267793994605993438;

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

fn normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Single-surrogate acquisition family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcqKind {
    Pi,
    Ei,
    Ucb,
}

impl AcqKind {
    pub fn name(&self) -> &'static str {
        match self {
            AcqKind::Pi => "PI",
            AcqKind::Ei => "EI",
            AcqKind::Ucb => "UCB",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PI" => Ok(AcqKind::Pi),
            "EI" => Ok(AcqKind::Ei),
            "UCB" => Ok(AcqKind::Ucb),
            other => Err(Error::InvalidArgument(format!(
                "unknown acquisition '{other}' (expected PI, EI, or UCB)"
            ))),
        }
    }
}

/// The variant space: acquisition kinds for the objective and front
/// surrogates plus the scalarization regularization switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionSpec {
    pub objective_acq: AcqKind,
    pub pareto_acq: AcqKind,
    pub ucb_kappa: f64,
    pub regularized: bool,
}

impl AcquisitionSpec {
    pub fn new(objective_acq: AcqKind, pareto_acq: AcqKind, regularized: bool) -> Self {
        Self {
            objective_acq,
            pareto_acq,
            ucb_kappa: 2.0,
            regularized,
        }
    }

    /// Canonical variant name, e.g. `Reg-UCB-EI`.
    pub fn variant_name(&self) -> String {
        format!(
            "{}-{}-{}",
            if self.regularized { "Reg" } else { "NoReg" },
            self.objective_acq.name(),
            self.pareto_acq.name()
        )
    }

    /// Parse a `Reg/NoReg-{PI,EI,UCB}-{PI,EI,UCB}` variant name.
    pub fn parse_variant(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('-').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "variant '{s}' must look like Reg-UCB-EI"
            )));
        }
        let regularized = match parts[0] {
            "Reg" => true,
            "NoReg" => false,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "variant prefix '{other}' must be Reg or NoReg"
                )))
            }
        };
        Ok(Self::new(
            AcqKind::parse(parts[1])?,
            AcqKind::parse(parts[2])?,
            regularized,
        ))
    }

    /// All 18 variants in lexicographic order of their names.
    pub fn all_variants() -> Vec<Self> {
        let kinds = [AcqKind::Ei, AcqKind::Pi, AcqKind::Ucb];
        let mut out = Vec::with_capacity(18);
        for reg in [false, true] {
            for obj in kinds {
                for par in kinds {
                    out.push(Self::new(obj, par, reg));
                }
            }
        }
        out.sort_by_key(|v| v.variant_name());
        out
    }
}

/// Closed-form acquisition value for one surrogate posterior.
///
/// EI and PI are nonnegative; UCB is returned raw (`mean + kappa * sd`) and
/// must be shifted by the caller before entering a product.
pub fn base_acquisition(
    kind: AcqKind,
    mean: f64,
    variance: f64,
    incumbent: f64,
    kappa: f64,
) -> Result<f64> {
    if variance < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "variance must be nonnegative, got {variance}"
        )));
    }
    let sd = variance.sqrt();
    Ok(match kind {
        AcqKind::Ei => {
            if sd <= 0.0 {
                (mean - incumbent).max(0.0)
            } else {
                let z = (mean - incumbent) / sd;
                ((mean - incumbent) * normal_cdf(z) + sd * normal_pdf(z)).max(0.0)
            }
        }
        AcqKind::Pi => {
            if sd <= 0.0 {
                if mean > incumbent {
                    1.0
                } else if mean < incumbent {
                    0.0
                } else {
                    0.5
                }
            } else {
                normal_cdf((mean - incumbent) / sd)
            }
        }
        AcqKind::Ucb => mean + kappa * sd,
    })
}

fn shifted_acquisition(
    kind: AcqKind,
    post: &Posterior,
    incumbent: f64,
    kappa: f64,
    ucb_shift: f64,
) -> f64 {
    let raw = base_acquisition(kind, post.mean, post.variance.max(0.0), incumbent, kappa)
        .expect("variance clamped nonnegative");
    match kind {
        AcqKind::Ucb => (raw - ucb_shift).max(0.0),
        _ => raw.max(0.0),
    }
}

/// Per-iteration context for the composite acquisition: incumbents for the
/// two surrogates and the UCB shifts computed over the current probe set.
#[derive(Debug, Clone, Copy)]
pub struct CompositeSettings {
    pub spec: AcquisitionSpec,
    pub objective_incumbent: f64,
    pub pareto_incumbent: f64,
    pub objective_ucb_shift: f64,
    pub pareto_ucb_shift: f64,
}

/// Four-factor product: objective acquisition, front-classifier
/// acquisition, hidden-constraint probability, known-constraint indicator.
/// Exactly zero whenever the indicator is zero.
pub fn composite_acquisition(
    settings: &CompositeSettings,
    objective: &Posterior,
    pareto: &Posterior,
    feasibility_probability: f64,
    known_indicator: u8,
) -> f64 {
    if known_indicator == 0 {
        return 0.0;
    }
    let a_obj = shifted_acquisition(
        settings.spec.objective_acq,
        objective,
        settings.objective_incumbent,
        settings.spec.ucb_kappa,
        settings.objective_ucb_shift,
    );
    let a_par = shifted_acquisition(
        settings.spec.pareto_acq,
        pareto,
        settings.pareto_incumbent,
        settings.spec.ucb_kappa,
        settings.pareto_ucb_shift,
    );
    a_obj * a_par * feasibility_probability
}

/// Knobs for [`maximize_acquisition`].
#[derive(Debug, Clone)]
pub struct MaximizeConfig {
    /// Independent inner-optimizer restarts; the first starts from the best
    /// probe.
    pub restarts: usize,
    /// Random probe count when the caller does not supply probes.
    pub n_probes: usize,
    /// Eval budget per restart.
    pub evals_per_restart: usize,
    pub seed: u64,
}

impl Default for MaximizeConfig {
    fn default() -> Self {
        Self {
            restarts: 3,
            n_probes: 1024,
            evals_per_restart: 600,
            seed: 0,
        }
    }
}

/// Draw `n` uniform points in the box.
pub fn uniform_probes<R: rand::Rng + ?Sized>(
    n: usize,
    bounds: &[(f64, f64)],
    rng: &mut R,
) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            bounds
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..hi))
                .collect()
        })
        .collect()
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Maximize a nonnegative acquisition over the box: evaluate every probe,
/// run the evolution strategy from `restarts` starts, and return the best
/// point found (ties break toward the lexicographically smallest point).
///
/// When everything evaluates to zero the probes are re-ranked by `fallback`
/// so the loop can still make progress.
pub fn maximize_acquisition<F>(
    acq: F,
    bounds: &[(f64, f64)],
    config: &MaximizeConfig,
    fallback: Option<&dyn Fn(&[f64]) -> f64>,
) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64,
{
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
    let probes = uniform_probes(config.n_probes.max(1), bounds, &mut rng);
    maximize_acquisition_with_probes(acq, bounds, config, &probes, fallback)
}

/// As [`maximize_acquisition`] but over a caller-supplied probe set (the
/// driver shares its probes with the UCB shift computation).
///
/// The inner optimizer sees the acquisition divided by the best probe
/// value, so selection and termination behave identically under positive
/// rescaling of the acquisition.
pub fn maximize_acquisition_with_probes<F>(
    acq: F,
    bounds: &[(f64, f64)],
    config: &MaximizeConfig,
    probes: &[Vec<f64>],
    fallback: Option<&dyn Fn(&[f64]) -> f64>,
) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64,
{
    if probes.is_empty() {
        return Err(Error::EmptyInput("acquisition probes".into()));
    }
    let probe_values: Vec<f64> = probes
        .iter()
        .map(|p| {
            let v = acq(p);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        })
        .collect();

    fn consider(best: &mut Option<(Vec<f64>, f64)>, x: &[f64], v: f64) {
        let replace = match best {
            None => true,
            Some((bx, bv)) => v > *bv || (v == *bv && lex_less(x, bx)),
        };
        if replace {
            *best = Some((x.to_vec(), v));
        }
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    let best_probe_value = probe_values.iter().cloned().fold(0.0, f64::max);
    let scale = if best_probe_value > 0.0 {
        best_probe_value
    } else {
        1.0
    };
    for (p, &v) in probes.iter().zip(&probe_values) {
        consider(&mut best, p, v / scale);
    }
    let best_probe = best.clone().expect("at least one probe");

    for restart in 0..config.restarts.max(1) {
        let initial = if restart == 0 {
            Some(best_probe.0.clone())
        } else {
            None
        };
        let cma = CmaesConfig {
            max_evals: config.evals_per_restart,
            seed: config
                .seed
                .wrapping_add(0x9e37_79b9_7f4a_7c15)
                .wrapping_mul(restart as u64 + 1),
            initial,
            ..CmaesConfig::default()
        };
        let (x, neg_v) = cmaes::minimize(
            |x| {
                let v = acq(x);
                if v.is_finite() {
                    -v / scale
                } else {
                    f64::INFINITY
                }
            },
            bounds,
            &cma,
        )?;
        if neg_v.is_finite() {
            consider(&mut best, &x, -neg_v);
        }
    }

    let (x, v) = best.expect("probes are nonempty");
    if v > 0.0 {
        let raw = acq(&x);
        return Ok((x, if raw.is_finite() { raw } else { 0.0 }));
    }

    // Fully masked acquisition: rank the probes by the fallback score.
    let mut fb_best: Option<(Vec<f64>, f64)> = None;
    for p in probes {
        let score = fallback.map(|f| f(p)).unwrap_or(0.0);
        let score = if score.is_finite() { score } else { f64::NEG_INFINITY };
        let replace = match &fb_best {
            None => true,
            Some((bx, bv)) => score > *bv || (score == *bv && lex_less(p, bx)),
        };
        if replace {
            fb_best = Some((p.clone(), score));
        }
    }
    Ok((fb_best.expect("probes are nonempty").0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ei_deterministic_improvement_limit() {
        let v = base_acquisition(AcqKind::Ei, 1.0, 0.0, 0.0, 2.0).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn pi_at_incumbent_is_half() {
        let v = base_acquisition(AcqKind::Pi, 0.0, 1.0, 0.0, 2.0).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ei_at_incumbent_is_pdf_at_zero() {
        let v = base_acquisition(AcqKind::Ei, 0.0, 1.0, 0.0, 2.0).unwrap();
        assert!((v - INV_SQRT_2PI).abs() < 1e-12);
    }

    #[test]
    fn negative_variance_rejected() {
        assert!(base_acquisition(AcqKind::Ei, 0.0, -1.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn ei_pi_nondecreasing_in_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for kind in [AcqKind::Ei, AcqKind::Pi] {
            for _ in 0..200 {
                let incumbent = rng.gen_range(-2.0..2.0);
                let var = rng.gen_range(0.01..4.0);
                let m1 = rng.gen_range(-3.0..3.0);
                let m2 = m1 + rng.gen_range(0.0..2.0);
                let a1 = base_acquisition(kind, m1, var, incumbent, 2.0).unwrap();
                let a2 = base_acquisition(kind, m2, var, incumbent, 2.0).unwrap();
                assert!(a2 >= a1 - 1e-12);
            }
        }
    }

    #[test]
    fn ucb_nondecreasing_in_mean_and_sd() {
        let a = base_acquisition(AcqKind::Ucb, 0.0, 1.0, 0.0, 2.0).unwrap();
        let b = base_acquisition(AcqKind::Ucb, 0.5, 1.0, 0.0, 2.0).unwrap();
        let c = base_acquisition(AcqKind::Ucb, 0.0, 2.0, 0.0, 2.0).unwrap();
        assert!(b > a);
        assert!(c > a);
    }

    fn settings(obj: AcqKind, par: AcqKind) -> CompositeSettings {
        CompositeSettings {
            spec: AcquisitionSpec::new(obj, par, true),
            objective_incumbent: 0.0,
            pareto_incumbent: 0.5,
            objective_ucb_shift: 0.0,
            pareto_ucb_shift: 0.0,
        }
    }

    #[test]
    fn known_violation_annihilates_composite() {
        let s = settings(AcqKind::Ei, AcqKind::Ei);
        let post = Posterior {
            mean: 10.0,
            variance: 1.0,
        };
        let v = composite_acquisition(&s, &post, &post, 1.0, 0);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn unit_factors_leave_base_product() {
        let s = settings(AcqKind::Ei, AcqKind::Pi);
        let obj = Posterior {
            mean: 0.4,
            variance: 0.25,
        };
        let par = Posterior {
            mean: 0.8,
            variance: 0.01,
        };
        let expected = base_acquisition(AcqKind::Ei, 0.4, 0.25, 0.0, 2.0).unwrap()
            * base_acquisition(AcqKind::Pi, 0.8, 0.01, 0.5, 2.0).unwrap();
        let v = composite_acquisition(&s, &obj, &par, 1.0, 1);
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn composite_equals_term_by_term_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let s = settings(AcqKind::Ucb, AcqKind::Ei);
            let obj = Posterior {
                mean: rng.gen_range(-1.0..1.0),
                variance: rng.gen_range(0.0..1.0),
            };
            let par = Posterior {
                mean: rng.gen_range(0.0..1.0),
                variance: rng.gen_range(0.0..0.3),
            };
            let feas = rng.gen_range(0.0..1.0);
            let v = composite_acquisition(&s, &obj, &par, feas, 1);
            let a = shifted_acquisition(AcqKind::Ucb, &obj, 0.0, 2.0, 0.0);
            let b = shifted_acquisition(AcqKind::Ei, &par, 0.5, 2.0, 0.0);
            assert!((v - a * b * feas).abs() <= 1e-12 * (1.0 + v.abs()));
            assert!(v >= 0.0);
        }
    }

    #[test]
    fn maximizer_finds_quadratic_peak() {
        let bounds = vec![(0.0, 1.0); 3];
        let acq = |x: &[f64]| -(x.iter().map(|v| (v - 0.5) * (v - 0.5)).sum::<f64>()) + 1.0;
        let config = MaximizeConfig {
            seed: 4,
            ..MaximizeConfig::default()
        };
        let (x, v) = maximize_acquisition(acq, &bounds, &config, None).unwrap();
        assert!(x.iter().all(|&c| (c - 0.5).abs() < 1e-3), "{x:?}");
        assert!(v > 0.999);
    }

    #[test]
    fn result_beats_every_probe() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let bounds = vec![(0.0, 1.0); 2];
        // A bumpy but cheap surrogate-like landscape.
        let acq = |x: &[f64]| {
            ((6.0 * x[0]).sin() * (5.0 * x[1]).cos() + 1.0).max(0.0)
        };
        let config = MaximizeConfig {
            seed: 8,
            ..MaximizeConfig::default()
        };
        let (_, v) = maximize_acquisition(&acq, &bounds, &config, None).unwrap();
        for _ in 0..10_000 {
            let p: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..1.0)).collect();
            assert!(v >= acq(&p) - 1e-9);
        }
    }

    #[test]
    fn masked_region_respected() {
        // Acquisition is zero on x0 > 0.5; the maximizer must stay feasible.
        let bounds = vec![(0.0, 1.0); 2];
        let acq = |x: &[f64]| if x[0] > 0.5 { 0.0 } else { 1.0 + x[1] };
        let config = MaximizeConfig {
            seed: 12,
            ..MaximizeConfig::default()
        };
        let (x, _) = maximize_acquisition(acq, &bounds, &config, None).unwrap();
        assert!(x[0] <= 0.5);
    }

    #[test]
    fn fully_masked_falls_back_to_score() {
        let bounds = vec![(0.0, 1.0); 2];
        let acq = |_: &[f64]| 0.0;
        let fallback = |x: &[f64]| 1.0 - (x[0] - 0.25).abs();
        let config = MaximizeConfig {
            seed: 21,
            ..MaximizeConfig::default()
        };
        let (x, v) = maximize_acquisition(acq, &bounds, &config, Some(&fallback)).unwrap();
        assert_eq!(v, 0.0);
        assert!((x[0] - 0.25).abs() < 0.2, "{x:?}");
    }

    #[test]
    fn positive_scaling_preserves_argmax() {
        // Power-of-two scale keeps the normalized landscape bit-identical.
        let bounds = vec![(0.0, 1.0); 2];
        let base = |x: &[f64]| ((3.0 * x[0]).sin() + 1.2) * ((2.0 * x[1]).cos() + 1.1);
        let scaled = |x: &[f64]| 64.0 * base(x);
        let config = MaximizeConfig {
            seed: 99,
            ..MaximizeConfig::default()
        };
        let (x1, _) = maximize_acquisition(&base, &bounds, &config, None).unwrap();
        let (x2, _) = maximize_acquisition(&scaled, &bounds, &config, None).unwrap();
        assert_eq!(x1, x2);
    }

    #[test]
    fn variant_names_round_trip() {
        let all = AcquisitionSpec::all_variants();
        assert_eq!(all.len(), 18);
        for spec in &all {
            let name = spec.variant_name();
            let parsed = AcquisitionSpec::parse_variant(&name).unwrap();
            assert_eq!(parsed.variant_name(), name);
        }
        assert!(AcquisitionSpec::parse_variant("Reg-XX-EI").is_err());
        assert!(AcquisitionSpec::parse_variant("Sometimes-EI-EI").is_err());
    }
}
