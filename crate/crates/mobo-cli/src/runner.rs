//! Experiment orchestration: one run per (variant, seed) pair, executed in a
//! bounded worker pool, each owning its own output directory.
//!
//! Per run: `results.csv` (one row per evaluation, checkpoint metric columns
//! filled at the configured cadence) and `summary.json` (final metrics). At
//! the experiment root: `manifest.toml` (the fully resolved, re-runnable
//! configuration) and `summary.json` (all runs). Nothing written here
//! carries a timestamp, so identical configurations produce byte-identical
//! outputs.

use std::fs;
use std::io::Write as _;
use std::panic::AssertUnwindSafe;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use mobo::acquisition::AcquisitionSpec;
use mobo::constraints::{KnownConstraint, KnownConstraintSet};
use mobo::driver::{run, Evaluation, MetricsContext, OptimizerConfig, RunResult};
use mobo::gp::FitConfig;
use mobo::metrics::reference_from_front;

use crate::config::{FileConfig, Resolved, Target};
use crate::external::ExternalEvaluator;

/// Final metrics of one run as serialized into summaries. A null `lrhd`
/// stands for the negative-infinity "exact" sentinel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinalMetrics {
    pub gd: f64,
    pub igd: f64,
    pub hv: f64,
    pub lrhd: Option<f64>,
    pub front_size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub variant: String,
    pub benchmark: String,
    pub seed: u64,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub evaluations: usize,
    pub front_size: usize,
    pub final_metrics: Option<FinalMetrics>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ExperimentSummary {
    runs: Vec<RunSummary>,
}

struct RunTask {
    run_id: String,
    variant: AcquisitionSpec,
    variant_name: String,
    seed: u64,
    dir: PathBuf,
}

fn fmt_f64(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "exact".into()
    } else {
        format!("{v}")
    }
}

fn worker_count(configured: usize) -> usize {
    if let Ok(s) = std::env::var("MOBO_WORKERS") {
        if let Ok(n) = s.trim().parse::<usize>() {
            if n > 0 {
                return n;
            }
        }
        log::warn!("ignoring invalid MOBO_WORKERS value '{s}'");
    }
    if configured > 0 {
        configured
    } else {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    }
}

/// Execute a parsed experiment. Returns the process exit code: 0 when every
/// run succeeded, 1 otherwise.
pub fn run_experiment(file: &FileConfig, resolved: &Resolved) -> Result<i32> {
    fs::create_dir_all(&resolved.output_dir).with_context(|| {
        format!("creating output directory {}", resolved.output_dir.display())
    })?;

    // Shared metric context for benchmark targets.
    let metrics: Option<MetricsContext> = match &resolved.target {
        Target::Benchmark(spec) => {
            let front = spec
                .true_front(resolved.front_resolution)
                .context("discretizing the true front")?;
            let reference = match &resolved.reference_point {
                Some(r) => r.clone(),
                None => reference_from_front(&front.points)
                    .context("deriving the reference point")?,
            };
            Some(MetricsContext {
                true_front: front.points,
                reference,
                cadence: resolved.metric_cadence,
            })
        }
        Target::External(_) => None,
    };

    let manifest = file.manifest(resolved, metrics.as_ref().map(|m| m.reference.as_slice()));
    let manifest_text =
        toml::to_string_pretty(&manifest).context("serializing the manifest")?;
    fs::write(resolved.output_dir.join("manifest.toml"), manifest_text)
        .context("writing manifest.toml")?;

    let benchmark_label = match &resolved.target {
        Target::Benchmark(spec) => spec.name.name().to_string(),
        Target::External(_) => "external".to_string(),
    };
    let mut tasks = Vec::new();
    for variant in &resolved.variants {
        let variant_name = variant.variant_name();
        for &seed in &resolved.seeds {
            let run_id = format!("{variant_name}-{benchmark_label}-s{seed}");
            tasks.push(RunTask {
                run_id: run_id.clone(),
                variant: *variant,
                variant_name: variant_name.clone(),
                seed,
                dir: resolved.output_dir.join(&run_id),
            });
        }
    }

    let workers = worker_count(resolved.workers).min(tasks.len().max(1));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("building worker pool")?;
    let summaries: Vec<RunSummary> = pool.install(|| {
        use rayon::prelude::*;
        tasks
            .par_iter()
            .map(|task| execute_run(task, resolved, &benchmark_label, metrics.as_ref()))
            .collect()
    });

    for s in &summaries {
        println!(
            "run {}: {}{}",
            s.run_id,
            s.status,
            s.error
                .as_deref()
                .map(|e| format!(" ({e})"))
                .unwrap_or_default()
        );
    }
    let failed = summaries.iter().filter(|s| s.status != "ok").count();
    let summary = ExperimentSummary { runs: summaries };
    let text = serde_json::to_string_pretty(&summary).context("serializing summary")?;
    fs::write(resolved.output_dir.join("summary.json"), text)
        .context("writing summary.json")?;

    Ok(if failed > 0 { 1 } else { 0 })
}

fn execute_run(
    task: &RunTask,
    resolved: &Resolved,
    benchmark_label: &str,
    metrics: Option<&MetricsContext>,
) -> RunSummary {
    let mut summary = RunSummary {
        run_id: task.run_id.clone(),
        variant: task.variant_name.clone(),
        benchmark: benchmark_label.to_string(),
        seed: task.seed,
        status: "error".into(),
        error: None,
        evaluations: 0,
        front_size: 0,
        final_metrics: None,
    };
    if let Err(e) = fs::create_dir_all(&task.dir) {
        summary.error = Some(format!("creating run directory: {e}"));
        return summary;
    }

    let outcome = std::panic::catch_unwind(AssertUnwindSafe(|| {
        try_run(task, resolved, metrics)
    }));
    let result = match outcome {
        Ok(Ok(r)) => r,
        Ok(Err(e)) => {
            let msg = format!("{e:#}");
            let _ = fs::write(task.dir.join("error.txt"), &msg);
            summary.error = Some(msg);
            return summary;
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "run panicked".into());
            let _ = fs::write(task.dir.join("error.txt"), &msg);
            summary.error = Some(msg);
            return summary;
        }
    };

    summary.evaluations = result.records.len();
    summary.front_size = result.front.len();
    summary.final_metrics = result.checkpoints.last().map(|c| FinalMetrics {
        gd: c.report.gd,
        igd: c.report.igd,
        hv: c.report.hv,
        lrhd: if c.report.lrhd.is_finite() {
            Some(c.report.lrhd)
        } else {
            None
        },
        front_size: c.report.front_size,
    });

    summary.status = "ok".into();
    if let Err(e) = write_outputs(task, resolved, benchmark_label, &result, &summary) {
        summary.status = "error".into();
        summary.error = Some(format!("{e:#}"));
    }
    summary
}

fn try_run(
    task: &RunTask,
    resolved: &Resolved,
    metrics: Option<&MetricsContext>,
) -> Result<RunResult> {
    let bounds = match &resolved.target {
        Target::Benchmark(spec) => spec.bounds(),
        Target::External(_) => vec![(0.0, 1.0); resolved.d],
    };
    let mut config = OptimizerConfig::new(bounds, resolved.m);
    config.n_init = resolved.n_init;
    config.seed = task.seed;
    config.acquisition = task.variant;
    config.rho = resolved.rho;
    config.lambda = resolved.lambda;
    config.kernel = resolved.kernel;
    config.objective_fit = FitConfig {
        n_starts: resolved.fit_starts,
        max_evals_per_start: resolved.fit_evals_per_start,
        ..FitConfig::default()
    };
    config.classifier_fit = FitConfig {
        n_starts: resolved.fit_starts,
        max_evals_per_start: resolved.fit_evals_per_start,
        ..FitConfig::for_classifier()
    };
    config.known_constraints = KnownConstraintSet::new(
        resolved
            .known_constraints
            .iter()
            .map(|c| KnownConstraint::Linear {
                coeffs: c.coeffs.clone(),
                rhs: c.rhs,
            })
            .collect(),
    );
    config.restarts = resolved.acquisition_restarts;
    config.n_probes = resolved.acquisition_probes;
    config.evals_per_restart = resolved.acquisition_evals_per_restart;

    let mut evaluator: Box<dyn FnMut(&[f64]) -> Evaluation> = match &resolved.target {
        Target::Benchmark(spec) => {
            let spec = spec.clone();
            Box::new(move |x: &[f64]| match spec.evaluate(x) {
                Ok(y) => Evaluation::Feasible(y),
                Err(e) => {
                    log::warn!("benchmark evaluation failed: {e}");
                    Evaluation::Infeasible
                }
            })
        }
        Target::External(ext) => {
            let evaluator = ExternalEvaluator::new(
                ext.command.clone(),
                Duration::from_secs(ext.timeout_secs),
                resolved.m,
            );
            Box::new(move |x: &[f64]| evaluator.evaluate(x))
        }
    };

    run(config, &mut evaluator, resolved.budget, metrics).map_err(Into::into)
}

fn write_outputs(
    task: &RunTask,
    resolved: &Resolved,
    benchmark_label: &str,
    result: &RunResult,
    summary: &RunSummary,
) -> Result<()> {
    let csv_path = task.dir.join("results.csv");
    let mut out = String::new();
    let mut header = String::from("run_id,variant,benchmark,seed,eval_index,feasible");
    for j in 1..=resolved.m {
        header.push_str(&format!(",f{j}"));
    }
    header.push_str(",scalarized,gd,igd,hv,lrhd\n");
    out.push_str(&header);

    for record in &result.records {
        let checkpoint = result
            .checkpoints
            .iter()
            .find(|c| c.evaluations == record.iteration + 1);
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            task.run_id,
            task.variant_name,
            benchmark_label,
            task.seed,
            record.iteration,
            record.feasible
        ));
        for j in 0..resolved.m {
            match &record.objectives {
                Some(y) => out.push_str(&format!(",{}", fmt_f64(y[j]))),
                None => out.push(','),
            }
        }
        match record.scalarized {
            Some(v) => out.push_str(&format!(",{}", fmt_f64(v))),
            None => out.push(','),
        }
        match checkpoint {
            Some(c) => out.push_str(&format!(
                ",{},{},{},{}\n",
                fmt_f64(c.report.gd),
                fmt_f64(c.report.igd),
                fmt_f64(c.report.hv),
                fmt_f64(c.report.lrhd)
            )),
            None => out.push_str(",,,,\n"),
        }
    }
    let mut f = fs::File::create(&csv_path)
        .with_context(|| format!("creating {}", csv_path.display()))?;
    f.write_all(out.as_bytes())
        .with_context(|| format!("writing {}", csv_path.display()))?;

    let text = serde_json::to_string_pretty(summary).context("serializing run summary")?;
    fs::write(task.dir.join("summary.json"), text).context("writing run summary")?;
    Ok(())
}

/// Export a benchmark's discretized true front as CSV.
pub fn write_front_csv(
    spec: &mobo::benchmarks::BenchmarkSpec,
    resolution: usize,
    out: &mut dyn std::io::Write,
) -> Result<()> {
    let front = spec.true_front(resolution)?;
    let header: Vec<String> = (1..=spec.m).map(|j| format!("f{j}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for p in &front.points {
        let row: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Long-format plot table from completed run directories.
pub fn emit_plot_data(run_dirs: &[PathBuf], out: &mut dyn std::io::Write) -> Result<usize> {
    let mut rows: Vec<(String, String, u64, &'static str, String)> = Vec::new();
    for dir in run_dirs {
        let path = dir.join("summary.json");
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                continue;
            }
        };
        let summary: RunSummary = match serde_json::from_str(&text) {
            Ok(s) => s,
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                continue;
            }
        };
        let Some(fin) = &summary.final_metrics else {
            log::warn!("skipping {}: no final metrics", path.display());
            continue;
        };
        let log_or_exact = |v: f64| {
            if v == 0.0 {
                "exact".to_string()
            } else {
                format!("{}", v.ln())
            }
        };
        rows.push((
            summary.variant.clone(),
            summary.benchmark.clone(),
            summary.seed,
            "log_gd",
            log_or_exact(fin.gd),
        ));
        rows.push((
            summary.variant.clone(),
            summary.benchmark.clone(),
            summary.seed,
            "log_igd",
            log_or_exact(fin.igd),
        ));
        rows.push((
            summary.variant.clone(),
            summary.benchmark.clone(),
            summary.seed,
            "lrhd",
            fin.lrhd
                .map(|v| format!("{v}"))
                .unwrap_or_else(|| "exact".to_string()),
        ));
    }
    rows.sort_by(|a, b| {
        (&a.0, &a.1, a.2, a.3).cmp(&(&b.0, &b.1, b.2, b.3))
    });
    writeln!(out, "variant,benchmark,seed,metric,value")?;
    let count = rows.len();
    for (variant, benchmark, seed, metric, value) in rows {
        writeln!(out, "{variant},{benchmark},{seed},{metric},{value}")?;
    }
    Ok(count)
}
