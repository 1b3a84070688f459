//! The sequential optimization loop: scalarize, fit the three surrogates,
//! maximize the composite acquisition, evaluate, repeat.
//!
//! [`Optimizer`] exposes ask/tell semantics for embedding; [`run`] wires an
//! evaluator and optional metric checkpoints into a complete budgeted run.
//! Each iteration derives its own RNG stream from the master seed and the
//! dataset size, so `ask` is deterministic for a given state and repeated
//! calls without an intervening `tell` return the same candidate.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::acquisition::{
    base_acquisition, composite_acquisition, maximize_acquisition_with_probes, uniform_probes,
    AcqKind, AcquisitionSpec, CompositeSettings, MaximizeConfig,
};
use crate::constraints::{
    feasibility_probability, fit_feasibility, known_indicator, KnownConstraintSet,
};
use crate::error::{check_dims, Error, Result};
use crate::gp::{FitConfig, GpModel, KernelKind, Posterior};
use crate::metrics::{report, MetricsReport};
use crate::pareto::{extract_front, fit_pareto_classifier, pareto_probability};
use crate::scalarize::{sample_weights, scalarize, ScalarizationMethod, ScalarizationSpec};

/// Outcome of one black-box evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Evaluation {
    Feasible(Vec<f64>),
    Infeasible,
}

/// One evaluated design. Objectives are present exactly when the evaluation
/// succeeded; `scalarized` caches the value under the most recent weight
/// vector and is refreshed every iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationRecord {
    pub x: Vec<f64>,
    pub objectives: Option<Vec<f64>>,
    pub feasible: bool,
    pub iteration: usize,
    pub scalarized: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub bounds: Vec<(f64, f64)>,
    pub n_objectives: usize,
    pub n_init: usize,
    pub seed: u64,
    pub acquisition: AcquisitionSpec,
    pub rho: f64,
    pub lambda: f64,
    pub kernel: KernelKind,
    pub objective_fit: FitConfig,
    pub classifier_fit: FitConfig,
    pub known_constraints: KnownConstraintSet,
    /// Inner-optimizer restarts per iteration.
    pub restarts: usize,
    /// Random probe count per iteration.
    pub n_probes: usize,
    /// Inner-optimizer eval budget per restart.
    pub evals_per_restart: usize,
}

impl OptimizerConfig {
    pub fn new(bounds: Vec<(f64, f64)>, n_objectives: usize) -> Self {
        Self {
            bounds,
            n_objectives,
            n_init: 5,
            seed: 0,
            acquisition: AcquisitionSpec::new(AcqKind::Ucb, AcqKind::Ei, true),
            rho: 0.65,
            lambda: 0.01,
            kernel: KernelKind::Matern52,
            objective_fit: FitConfig::default(),
            classifier_fit: FitConfig::for_classifier(),
            known_constraints: KnownConstraintSet::empty(),
            restarts: 3,
            n_probes: 1024,
            evals_per_restart: 600,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Ask/tell state: an append-only dataset plus the immutable run
/// configuration.
#[derive(Debug, Clone)]
pub struct Optimizer {
    config: OptimizerConfig,
    records: Vec<ObservationRecord>,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig) -> Result<Self> {
        if config.bounds.is_empty() {
            return Err(Error::EmptyInput("optimization bounds".into()));
        }
        for &(lo, hi) in &config.bounds {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidArgument(format!(
                    "bounds must be finite with lower < upper, got ({lo}, {hi})"
                )));
            }
        }
        if config.n_objectives == 0 {
            return Err(Error::InvalidArgument("need at least one objective".into()));
        }
        if config.n_init == 0 {
            return Err(Error::InvalidArgument(
                "need at least one initial point".into(),
            ));
        }
        Ok(Self {
            config,
            records: Vec::new(),
        })
    }

    /// Draw and evaluate the initial design. Errors when every initial
    /// evaluation fails, since no surrogate can be built from an empty
    /// feasible set.
    pub fn initialize(
        config: OptimizerConfig,
        evaluator: &mut dyn FnMut(&[f64]) -> Evaluation,
    ) -> Result<Self> {
        let mut opt = Self::new(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(opt.config.seed ^ 0x696e_6974));
        for _ in 0..opt.config.n_init {
            let x = opt.random_known_feasible(&mut rng);
            let outcome = evaluator(&x);
            opt.tell(x, outcome)?;
        }
        if !opt.records.iter().any(|r| r.feasible) {
            return Err(Error::Evaluation(format!(
                "all {} initial evaluations failed",
                opt.config.n_init
            )));
        }
        Ok(opt)
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn records(&self) -> &[ObservationRecord] {
        &self.records
    }

    /// Indices of feasible records currently on the front.
    pub fn front_indices(&self) -> Vec<usize> {
        let feasible: Vec<usize> = (0..self.records.len())
            .filter(|&i| self.records[i].feasible)
            .collect();
        if feasible.is_empty() {
            return Vec::new();
        }
        let objs: Vec<Vec<f64>> = feasible
            .iter()
            .map(|&i| self.records[i].objectives.clone().expect("feasible record"))
            .collect();
        let labels = extract_front(&objs).expect("nonempty feasible set");
        feasible
            .into_iter()
            .zip(labels)
            .filter(|(_, l)| *l)
            .map(|(i, _)| i)
            .collect()
    }

    /// Objective vectors of the current front.
    pub fn front_objectives(&self) -> Vec<Vec<f64>> {
        self.front_indices()
            .into_iter()
            .map(|i| self.records[i].objectives.clone().expect("front is feasible"))
            .collect()
    }

    fn iteration_seed(&self, stream: u64) -> u64 {
        splitmix64(
            self.config
                .seed
                .wrapping_add(splitmix64(self.records.len() as u64))
                .wrapping_add(stream.wrapping_mul(0x51_7cc1_b727_220a95)),
        )
    }

    fn random_in_box(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.config
            .bounds
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..hi))
            .collect()
    }

    /// Uniform sample satisfying the known constraints, falling back to a
    /// plain box sample if rejection fails.
    fn random_known_feasible(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        if self.config.known_constraints.is_empty() {
            return self.random_in_box(rng);
        }
        for _ in 0..100_000 {
            let x = self.random_in_box(rng);
            if self.config.known_constraints.is_satisfied(&x) {
                return x;
            }
        }
        log::warn!("rejection sampling found no point satisfying the known constraints");
        self.random_in_box(rng)
    }

    fn ensure_known_feasible(&self, x: Vec<f64>, rng: &mut ChaCha8Rng) -> Vec<f64> {
        if self.config.known_constraints.is_satisfied(&x) {
            return x;
        }
        log::warn!("acquisition maximizer returned a constraint-violating point; resampling");
        self.random_known_feasible(rng)
    }

    /// Sample this iteration's weight vector and rebuild every feasible
    /// record's scalarized cache. Objectives are min-max normalized over the
    /// feasible set first so the weights are commensurate; the empirical
    /// ideal point is then the zero vector. Returns the objective-surrogate
    /// training set with negated targets for the maximization convention.
    fn scalarize_current(
        &mut self,
        rng: &mut ChaCha8Rng,
        feasible_idx: &[usize],
    ) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let s = self.config.n_objectives;
        let weights = sample_weights(s, rng)?;

        let mut lo = vec![f64::INFINITY; s];
        let mut hi = vec![f64::NEG_INFINITY; s];
        for &i in feasible_idx {
            let y = self.records[i].objectives.as_ref().expect("feasible");
            for j in 0..s {
                lo[j] = lo[j].min(y[j]);
                hi[j] = hi[j].max(y[j]);
            }
        }
        let range: Vec<f64> = (0..s)
            .map(|j| {
                let r = hi[j] - lo[j];
                if r > 1e-12 {
                    r
                } else {
                    1.0
                }
            })
            .collect();

        let method = if self.config.acquisition.regularized {
            ScalarizationMethod::RegularizedAugmentedTchebycheff
        } else {
            ScalarizationMethod::AugmentedTchebycheff
        };
        let scal_spec = ScalarizationSpec::new(
            method,
            self.config.rho,
            self.config.lambda,
            vec![0.0; s],
        )?;

        let mut xs: Vec<Vec<f64>> = Vec::with_capacity(feasible_idx.len());
        let mut targets: Vec<f64> = Vec::with_capacity(feasible_idx.len());
        for &i in feasible_idx {
            let record = &self.records[i];
            let y = record.objectives.as_ref().expect("feasible");
            let y_norm: Vec<f64> = (0..s).map(|j| (y[j] - lo[j]) / range[j]).collect();
            let value = scalarize(&scal_spec, &weights, &y_norm, &record.x)?;
            xs.push(record.x.clone());
            targets.push(-value);
            self.records[i].scalarized = Some(value);
        }
        Ok((xs, targets))
    }

    /// Refresh the scalarization caches under the next iteration's weight
    /// vector without proposing a point. `run` calls this after the final
    /// evaluation so the last record's cache is filled for reporting.
    pub fn refresh_scalarization(&mut self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.iteration_seed(0));
        let feasible_idx: Vec<usize> = (0..self.records.len())
            .filter(|&i| self.records[i].feasible)
            .collect();
        if feasible_idx.is_empty() {
            return Ok(());
        }
        self.scalarize_current(&mut rng, &feasible_idx)?;
        Ok(())
    }

    /// Propose the next evaluation point.
    ///
    /// Only the per-record scalarization caches are touched; the observed
    /// data never changes here. With fewer than two feasible observations
    /// the loop explores for feasibility instead of modeling objectives.
    pub fn ask(&mut self) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.iteration_seed(0));
        let feasible_idx: Vec<usize> = (0..self.records.len())
            .filter(|&i| self.records[i].feasible)
            .collect();
        if feasible_idx.len() < 2 {
            return self.explore_for_feasibility(&mut rng);
        }

        let (xs, targets) = self.scalarize_current(&mut rng, &feasible_idx)?;

        let objective_gp = match GpModel::fit(&xs, &targets, self.config.kernel, &self.config.objective_fit)
        {
            Ok(m) => m,
            Err(e) => {
                log::warn!("objective surrogate fit failed ({e}); sampling at random");
                return Ok(self.random_known_feasible(&mut rng));
            }
        };
        let objective_incumbent = targets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

        let all_inputs: Vec<Vec<f64>> = self.records.iter().map(|r| r.x.clone()).collect();
        let feasible_mask: Vec<bool> = self.records.iter().map(|r| r.feasible).collect();
        let all_objectives: Vec<Option<Vec<f64>>> =
            self.records.iter().map(|r| r.objectives.clone()).collect();
        let pareto_clf = match fit_pareto_classifier(
            &all_inputs,
            &feasible_mask,
            &all_objectives,
            self.config.kernel,
            &self.config.classifier_fit,
        ) {
            Ok(c) => c,
            Err(e) => {
                log::warn!("front classifier fit failed ({e}); sampling at random");
                return Ok(self.random_known_feasible(&mut rng));
            }
        };
        let pareto_incumbent = all_inputs
            .iter()
            .map(|x| pareto_probability(&pareto_clf, x).expect("training input dims").0)
            .fold(f64::NEG_INFINITY, f64::max);

        let feasibility_clf = match fit_feasibility(
            &all_inputs,
            &feasible_mask,
            self.config.kernel,
            &self.config.classifier_fit,
        ) {
            Ok(c) => c,
            Err(e) => {
                log::warn!("feasibility classifier fit failed ({e}); sampling at random");
                return Ok(self.random_known_feasible(&mut rng));
            }
        };

        let probes = uniform_probes(self.config.n_probes, &self.config.bounds, &mut rng);
        let kappa = self.config.acquisition.ucb_kappa;
        let objective_ucb_shift = if self.config.acquisition.objective_acq == AcqKind::Ucb {
            probes
                .iter()
                .map(|p| {
                    let post = objective_gp.predict(p).expect("probe dims");
                    base_acquisition(AcqKind::Ucb, post.mean, post.variance, 0.0, kappa)
                        .expect("nonnegative variance")
                })
                .fold(f64::INFINITY, f64::min)
        } else {
            0.0
        };
        let pareto_ucb_shift = if self.config.acquisition.pareto_acq == AcqKind::Ucb {
            probes
                .iter()
                .map(|p| {
                    let (prob, var) = pareto_probability(&pareto_clf, p).expect("probe dims");
                    base_acquisition(AcqKind::Ucb, prob, var, 0.0, kappa)
                        .expect("nonnegative variance")
                })
                .fold(f64::INFINITY, f64::min)
        } else {
            0.0
        };

        let settings = CompositeSettings {
            spec: self.config.acquisition,
            objective_incumbent,
            pareto_incumbent,
            objective_ucb_shift,
            pareto_ucb_shift,
        };
        let constraints = &self.config.known_constraints;
        let acq = |x: &[f64]| -> f64 {
            if known_indicator(constraints, x) == 0 {
                return 0.0;
            }
            let obj_post = objective_gp.predict(x).expect("candidate dims");
            let (prob, var) = pareto_probability(&pareto_clf, x).expect("candidate dims");
            let par_post = Posterior {
                mean: prob,
                variance: var,
            };
            let feas = feasibility_probability(&feasibility_clf, x).expect("candidate dims");
            composite_acquisition(&settings, &obj_post, &par_post, feas, 1)
        };
        let fallback = |x: &[f64]| -> f64 {
            if known_indicator(constraints, x) == 0 {
                return -1.0;
            }
            feasibility_probability(&feasibility_clf, x).expect("candidate dims")
        };

        let maximize_config = MaximizeConfig {
            restarts: self.config.restarts,
            n_probes: self.config.n_probes,
            evals_per_restart: self.config.evals_per_restart,
            seed: self.iteration_seed(1),
        };
        let (x_next, _) = maximize_acquisition_with_probes(
            acq,
            &self.config.bounds,
            &maximize_config,
            &probes,
            Some(&fallback),
        )?;
        Ok(self.ensure_known_feasible(x_next, &mut rng))
    }

    /// Cold-start path: too few feasible points to model objectives, so
    /// chase feasibility probability (or sample at random when the labels
    /// carry no signal yet).
    fn explore_for_feasibility(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let any_feasible = self.records.iter().any(|r| r.feasible);
        let any_infeasible = self.records.iter().any(|r| !r.feasible);
        if self.records.is_empty() || !any_feasible || !any_infeasible {
            return Ok(self.random_known_feasible(rng));
        }
        let inputs: Vec<Vec<f64>> = self.records.iter().map(|r| r.x.clone()).collect();
        let labels: Vec<bool> = self.records.iter().map(|r| r.feasible).collect();
        let clf = match fit_feasibility(
            &inputs,
            &labels,
            self.config.kernel,
            &self.config.classifier_fit,
        ) {
            Ok(c) => c,
            Err(e) => {
                log::warn!("feasibility classifier fit failed ({e}); sampling at random");
                return Ok(self.random_known_feasible(rng));
            }
        };
        let constraints = &self.config.known_constraints;
        let score = |x: &[f64]| -> f64 {
            if known_indicator(constraints, x) == 0 {
                return 0.0;
            }
            feasibility_probability(&clf, x).expect("candidate dims")
        };
        let fallback = |x: &[f64]| -> f64 {
            if known_indicator(constraints, x) == 0 {
                -1.0
            } else {
                feasibility_probability(&clf, x).expect("candidate dims")
            }
        };
        let probes = uniform_probes(self.config.n_probes, &self.config.bounds, rng);
        let maximize_config = MaximizeConfig {
            restarts: self.config.restarts,
            n_probes: self.config.n_probes,
            evals_per_restart: self.config.evals_per_restart,
            seed: self.iteration_seed(2),
        };
        let (x, _) = maximize_acquisition_with_probes(
            score,
            &self.config.bounds,
            &maximize_config,
            &probes,
            Some(&fallback),
        )?;
        Ok(self.ensure_known_feasible(x, rng))
    }

    /// Record an evaluation. Rejects dimension mismatches without touching
    /// the state; feasibility labels are final once stored.
    pub fn tell(&mut self, x: Vec<f64>, outcome: Evaluation) -> Result<()> {
        check_dims(self.config.bounds.len(), x.len())?;
        let (objectives, feasible) = match outcome {
            Evaluation::Feasible(y) => {
                check_dims(self.config.n_objectives, y.len())?;
                (Some(y), true)
            }
            Evaluation::Infeasible => (None, false),
        };
        self.records.push(ObservationRecord {
            x,
            objectives,
            feasible,
            iteration: self.records.len(),
            scalarized: None,
        });
        Ok(())
    }
}

/// Metric checkpointing context for benchmark runs with a known front.
#[derive(Debug, Clone)]
pub struct MetricsContext {
    pub true_front: Vec<Vec<f64>>,
    pub reference: Vec<f64>,
    /// Checkpoint every this many evaluations (counting initial points).
    pub cadence: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub evaluations: usize,
    pub report: MetricsReport,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub records: Vec<ObservationRecord>,
    /// Indices into `records` of the final front.
    pub front: Vec<usize>,
    pub checkpoints: Vec<Checkpoint>,
}

/// Run the full loop: initialize, then ask/tell until `budget` evaluations
/// beyond the initial design. Evaluator failures become infeasible records
/// and the loop continues.
pub fn run(
    config: OptimizerConfig,
    evaluator: &mut dyn FnMut(&[f64]) -> Evaluation,
    budget: usize,
    metrics: Option<&MetricsContext>,
) -> Result<RunResult> {
    let mut optimizer = Optimizer::initialize(config, evaluator)?;
    let mut checkpoints = Vec::new();
    let maybe_checkpoint = |opt: &Optimizer, force: bool, out: &mut Vec<Checkpoint>| {
        let Some(ctx) = metrics else { return };
        let n = opt.records.len();
        let due = force || (ctx.cadence > 0 && n % ctx.cadence == 0);
        if !due || out.last().map(|c| c.evaluations) == Some(n) {
            return;
        }
        let front = opt.front_objectives();
        if front.is_empty() {
            return;
        }
        if let Ok(rep) = report(&front, &ctx.true_front, &ctx.reference) {
            out.push(Checkpoint {
                evaluations: n,
                report: rep,
            });
        }
    };

    maybe_checkpoint(&optimizer, false, &mut checkpoints);
    for step in 0..budget {
        let x = optimizer.ask()?;
        let outcome = evaluator(&x);
        optimizer.tell(x, outcome)?;
        maybe_checkpoint(&optimizer, step + 1 == budget, &mut checkpoints);
    }
    optimizer.refresh_scalarization()?;
    Ok(RunResult {
        front: optimizer.front_indices(),
        records: optimizer.records,
        checkpoints,
    })
}
