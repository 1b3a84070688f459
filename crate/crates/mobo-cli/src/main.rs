//! Command-line harness for multi-objective Bayesian optimization
//! experiments.
//!
//! Exit codes: 0 on success, 1 on runtime failure (including any failed
//! run), 2 on configuration errors.

mod config;
mod external;
mod runner;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mobo::benchmarks::{BenchmarkName, BenchmarkSpec};

#[derive(Parser)]
#[command(
    name = "mobo",
    version,
    about = "Multi-objective Bayesian optimization benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the experiment described by a TOML configuration file.
    Run { config: PathBuf },
    /// Parse and validate a configuration file without running it.
    ValidateConfig { config: PathBuf },
    /// Export the discretized true front of a benchmark as CSV.
    Front {
        /// Benchmark name, e.g. ZDT1 or DTLZ2.
        benchmark: String,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        objectives: Option<usize>,
        #[arg(long, default_value_t = 500)]
        resolution: usize,
        /// Use the standard Deb et al. DTLZ forms.
        #[arg(long)]
        canonical: bool,
        /// DTLZ4 exponent.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Collect final metrics from run directories into a long-format CSV.
    PlotData {
        /// Run directories (each containing summary.json).
        run_dirs: Vec<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn load_config(path: &PathBuf) -> Result<(config::FileConfig, config::Resolved), String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("reading {}: {e}", path.display()))?;
    let file = config::FileConfig::parse(&text).map_err(|e| e.to_string())?;
    let resolved = file.resolve().map_err(|e| e.to_string())?;
    Ok((file, resolved))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => match load_config(&config) {
            Ok((file, resolved)) => match runner::run_experiment(&file, &resolved) {
                Ok(0) => ExitCode::SUCCESS,
                Ok(_) => ExitCode::from(EXIT_RUNTIME),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(EXIT_RUNTIME)
                }
            },
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
        Command::ValidateConfig { config } => match load_config(&config) {
            Ok((_, resolved)) => {
                println!(
                    "ok: {} variant(s) x {} seed(s), budget {}",
                    resolved.variants.len(),
                    resolved.seeds.len(),
                    resolved.budget
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
        Command::Front {
            benchmark,
            dim,
            objectives,
            resolution,
            canonical,
            alpha,
            output,
        } => {
            let name = match BenchmarkName::parse(&benchmark) {
                Ok(n) => n,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            let (dd, dm) = name.default_dims();
            let mut spec = match BenchmarkSpec::new(name, dim.unwrap_or(dd), objectives.unwrap_or(dm))
            {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            spec.canonical = canonical;
            spec.alpha = alpha;
            let result = match output {
                Some(path) => fs::File::create(&path)
                    .map_err(anyhow::Error::from)
                    .and_then(|mut f| runner::write_front_csv(&spec, resolution, &mut f)),
                None => runner::write_front_csv(&spec, resolution, &mut std::io::stdout()),
            };
            match result {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(EXIT_RUNTIME)
                }
            }
        }
        Command::PlotData { run_dirs, output } => {
            if run_dirs.is_empty() {
                eprintln!("plot-data needs at least one run directory");
                return ExitCode::from(EXIT_CONFIG);
            }
            let result = match output {
                Some(path) => fs::File::create(&path)
                    .map_err(anyhow::Error::from)
                    .and_then(|mut f| runner::emit_plot_data(&run_dirs, &mut f)),
                None => runner::emit_plot_data(&run_dirs, &mut std::io::stdout()),
            };
            match result {
                Ok(rows) => {
                    if rows == 0 {
                        eprintln!("warning: no usable run summaries found");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(EXIT_RUNTIME)
                }
            }
        }
    }
}
