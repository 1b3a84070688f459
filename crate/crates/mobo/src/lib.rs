//! Multi-objective Bayesian optimization with three stacked Gaussian
//! processes.
//!
//! Each iteration draws a random weight vector, collapses the observed
//! objectives to a scalar with an (optionally ridge-regularized) augmented
//! Tchebycheff function, and fits three surrogates: a regression GP on the
//! scalarized objective, a clipped-regression GP classifying membership of
//! the current Pareto front, and a clipped-regression GP predicting
//! evaluation feasibility. The next candidate maximizes the product of an
//! acquisition on the objective GP, an acquisition on the front GP, the
//! feasibility probability, and a known-constraint indicator, using a
//! restarted evolution strategy.
//!
//! The crate also ships the ZDT and DTLZ benchmark families with
//! discretized true fronts, and GD / IGD / hypervolume / LRHD quality
//! metrics, so the whole loop can be exercised end to end:
//!
//! ```
//! use mobo::benchmarks::{BenchmarkName, BenchmarkSpec};
//! use mobo::driver::{run, Evaluation, OptimizerConfig};
//!
//! let problem = BenchmarkSpec::new(BenchmarkName::Zdt1, 3, 2).unwrap();
//! let mut config = OptimizerConfig::new(problem.bounds(), 2);
//! config.seed = 42;
//! let mut evaluator =
//!     |x: &[f64]| Evaluation::Feasible(problem.evaluate(x).unwrap());
//! let result = run(config, &mut evaluator, 3, None).unwrap();
//! assert_eq!(result.records.len(), 8); // 5 initial + 3 iterations
//! ```

pub mod acquisition;
pub mod benchmarks;
pub mod cmaes;
pub mod constraints;
pub mod driver;
mod error;
pub mod gp;
pub mod metrics;
pub mod pareto;
pub mod scalarize;

pub use error::{Error, Result};
