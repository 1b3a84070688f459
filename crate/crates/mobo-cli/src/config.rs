//! Experiment configuration: TOML schema, validation, and the resolved
//! manifest written next to the results.
//!
//! A manifest is itself a valid configuration file with every default made
//! explicit, so re-running `mobo run <output>/manifest.toml` reproduces the
//! experiment.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use mobo::acquisition::AcquisitionSpec;
use mobo::benchmarks::{BenchmarkName, BenchmarkSpec};
use mobo::gp::KernelKind;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn default_n_init() -> usize {
    5
}
fn default_budget() -> usize {
    1500
}
fn default_repeats() -> usize {
    5
}
fn default_rho() -> f64 {
    0.65
}
fn default_lambda() -> f64 {
    0.01
}
fn default_kappa() -> f64 {
    2.0
}
fn default_kernel() -> String {
    "matern52".into()
}
fn default_cadence() -> usize {
    10
}
fn default_front_resolution() -> usize {
    500
}
fn default_alpha() -> f64 {
    1.0
}
fn default_timeout() -> u64 {
    3600
}
fn default_restarts() -> usize {
    3
}
fn default_probes() -> usize {
    1024
}
fn default_inner_evals() -> usize {
    600
}
fn default_fit_starts() -> usize {
    5
}
fn default_fit_evals() -> usize {
    80
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalConfig {
    /// Program and arguments; one process is spawned per evaluation.
    pub command: Vec<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

/// `coeffs . x <= rhs`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearConstraintConfig {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

/// Fixed algorithm policies recorded in every manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Policies {
    pub objective_normalization: String,
    pub ideal_point: String,
    pub reference_point_policy: String,
    pub infeasible_objectives: String,
}

impl Default for Policies {
    fn default() -> Self {
        Self {
            objective_normalization:
                "min-max over feasible observations, recomputed every iteration".into(),
            ideal_point: "componentwise minimum of normalized feasible objectives".into(),
            reference_point_policy:
                "true-front nadir plus 10% of the per-component front range, unless overridden"
                    .into(),
            infeasible_objectives: "failed evaluations carry no objective values".into(),
        }
    }
}

/// On-disk experiment description. Optional fields are resolved by
/// [`FileConfig::resolve`]; unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external: Option<ExternalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default = "default_n_init")]
    pub n_init: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Base seed; runs use `seed, seed+1, ..` unless `seeds` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variants: Option<Vec<String>>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_kernel")]
    pub kernel: String,
    #[serde(default = "default_cadence")]
    pub metric_cadence: usize,
    #[serde(default = "default_front_resolution")]
    pub front_resolution: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_point: Option<Vec<f64>>,
    #[serde(default)]
    pub canonical_dtlz: bool,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Parallel runs; 0 means one per logical core. `MOBO_WORKERS`
    /// overrides.
    #[serde(default)]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub known_constraints: Vec<LinearConstraintConfig>,
    #[serde(default = "default_restarts")]
    pub acquisition_restarts: usize,
    #[serde(default = "default_probes")]
    pub acquisition_probes: usize,
    #[serde(default = "default_inner_evals")]
    pub acquisition_evals_per_restart: usize,
    #[serde(default = "default_fit_starts")]
    pub fit_starts: usize,
    #[serde(default = "default_fit_evals")]
    pub fit_evals_per_start: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policies: Option<Policies>,
}

/// What the experiment evaluates.
#[derive(Debug, Clone)]
pub enum Target {
    Benchmark(BenchmarkSpec),
    External(ExternalConfig),
}

/// Fully resolved experiment: every default applied and validated.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub output_dir: PathBuf,
    pub target: Target,
    pub d: usize,
    pub m: usize,
    pub n_init: usize,
    pub budget: usize,
    pub seeds: Vec<u64>,
    pub variants: Vec<AcquisitionSpec>,
    pub rho: f64,
    pub lambda: f64,
    pub kernel: KernelKind,
    pub metric_cadence: usize,
    pub front_resolution: usize,
    pub reference_point: Option<Vec<f64>>,
    pub workers: usize,
    pub known_constraints: Vec<LinearConstraintConfig>,
    pub acquisition_restarts: usize,
    pub acquisition_probes: usize,
    pub acquisition_evals_per_restart: usize,
    pub fit_starts: usize,
    pub fit_evals_per_start: usize,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        if self.output_dir.as_os_str().is_empty() {
            return Err(ConfigError("output_dir must not be empty".into()));
        }
        if self.budget == 0 {
            return Err(ConfigError("budget must be at least 1".into()));
        }
        if self.n_init == 0 {
            return Err(ConfigError("n_init must be at least 1".into()));
        }
        if self.repeats == 0 {
            return Err(ConfigError("repeats must be at least 1".into()));
        }
        if self.rho < 0.0 || self.lambda < 0.0 {
            return Err(ConfigError("rho and lambda must be nonnegative".into()));
        }
        if self.kappa <= 0.0 {
            return Err(ConfigError("kappa must be positive".into()));
        }
        if self.metric_cadence == 0 {
            return Err(ConfigError("metric_cadence must be at least 1".into()));
        }

        let kernel =
            KernelKind::parse(&self.kernel).map_err(|e| ConfigError(format!("kernel: {e}")))?;

        let target = match (&self.benchmark, &self.external) {
            (Some(_), Some(_)) => {
                return Err(ConfigError(
                    "set either benchmark or [external], not both".into(),
                ))
            }
            (None, None) => {
                return Err(ConfigError(
                    "one of benchmark or [external] is required".into(),
                ))
            }
            (Some(name), None) => {
                let name = BenchmarkName::parse(name)
                    .map_err(|e| ConfigError(format!("benchmark: {e}")))?;
                let (dd, dm) = name.default_dims();
                let d = self.d.unwrap_or(dd);
                let m = self.m.unwrap_or(dm);
                let mut spec = BenchmarkSpec::new(name, d, m)
                    .map_err(|e| ConfigError(format!("benchmark: {e}")))?;
                spec.canonical = self.canonical_dtlz;
                spec.alpha = self.alpha;
                Target::Benchmark(spec)
            }
            (None, Some(ext)) => {
                if ext.command.is_empty() {
                    return Err(ConfigError("external.command must not be empty".into()));
                }
                if self.d.is_none() || self.m.is_none() {
                    return Err(ConfigError(
                        "external evaluators require explicit d and m".into(),
                    ));
                }
                Target::External(ext.clone())
            }
        };
        let (d, m) = match &target {
            Target::Benchmark(spec) => (spec.d, spec.m),
            Target::External(_) => (self.d.unwrap(), self.m.unwrap()),
        };

        let seeds = match &self.seeds {
            Some(list) if !list.is_empty() => list.clone(),
            Some(_) => return Err(ConfigError("seeds must not be empty".into())),
            None => {
                let base = self.seed.unwrap_or(0);
                (0..self.repeats as u64).map(|i| base + i).collect()
            }
        };

        let mut names: Vec<String> = Vec::new();
        if let Some(v) = &self.variant {
            names.push(v.clone());
        }
        if let Some(vs) = &self.variants {
            names.extend(vs.iter().cloned());
        }
        if names.is_empty() {
            return Err(ConfigError(
                "at least one variant is required (e.g. variant = \"Reg-UCB-EI\")".into(),
            ));
        }
        let mut variants = Vec::with_capacity(names.len());
        for name in &names {
            let mut spec = AcquisitionSpec::parse_variant(name)
                .map_err(|e| ConfigError(format!("variant: {e}")))?;
            spec.ucb_kappa = self.kappa;
            variants.push(spec);
        }

        if let Some(r) = &self.reference_point {
            if r.len() != m {
                return Err(ConfigError(format!(
                    "reference_point has {} components, expected {m}",
                    r.len()
                )));
            }
        }
        for (i, c) in self.known_constraints.iter().enumerate() {
            if c.coeffs.len() != d {
                return Err(ConfigError(format!(
                    "known_constraints[{i}].coeffs has {} components, expected {d}",
                    c.coeffs.len()
                )));
            }
        }
        if self.front_resolution < 2 {
            return Err(ConfigError("front_resolution must be at least 2".into()));
        }

        Ok(Resolved {
            output_dir: self.output_dir.clone(),
            target,
            d,
            m,
            n_init: self.n_init,
            budget: self.budget,
            seeds,
            variants,
            rho: self.rho,
            lambda: self.lambda,
            kernel,
            metric_cadence: self.metric_cadence,
            front_resolution: self.front_resolution,
            reference_point: self.reference_point.clone(),
            workers: self.workers,
            known_constraints: self.known_constraints.clone(),
            acquisition_restarts: self.acquisition_restarts,
            acquisition_probes: self.acquisition_probes,
            acquisition_evals_per_restart: self.acquisition_evals_per_restart,
            fit_starts: self.fit_starts,
            fit_evals_per_start: self.fit_evals_per_start,
        })
    }

    /// The manifest: this config with every resolved value written out.
    pub fn manifest(&self, resolved: &Resolved, reference: Option<&[f64]>) -> FileConfig {
        let mut out = self.clone();
        out.d = Some(resolved.d);
        out.m = Some(resolved.m);
        out.seeds = Some(resolved.seeds.clone());
        out.seed = None;
        out.variant = None;
        out.variants = Some(
            resolved
                .variants
                .iter()
                .map(|v| v.variant_name())
                .collect(),
        );
        out.reference_point = reference.map(|r| r.to_vec());
        out.policies = Some(Policies::default());
        out
    }
}
