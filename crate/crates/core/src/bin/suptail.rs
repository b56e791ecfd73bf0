use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use suptail::bounds::{BoundParams, DenseClass};
use suptail::cli::{
    self, BoundsRequest, CliError, CliResult, LowerBoundRequest, ModulusRequest, RunManifest,
    SimulateOverrides, SimulateRecord,
};
use suptail::verify::{VerifyOptions, DEFAULT_SEED};

#[derive(Parser)]
#[command(name = "suptail", version, about = "Tail bounds and simulations for suprema of normalized partial sums")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Output {
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Manifest destination; defaults to `<out>.manifest.json` when `--out` is given.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

impl Output {
    fn manifest_path(&self) -> Option<PathBuf> {
        self.manifest.clone().or_else(|| {
            self.out.as_ref().map(|p| {
                let mut s = p.clone().into_os_string();
                s.push(".manifest.json");
                PathBuf::from(s)
            })
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate thresholds and bounds over an (n, sigma2) grid.
    Bounds {
        /// Sample sizes: `a,b,c` or `logspace:lo:hi:count`.
        #[arg(long)]
        n: String,
        /// Variance bounds, same syntax.
        #[arg(long)]
        sigma2: String,
        #[arg(long = "L", default_value_t = 1.0)]
        exponent: f64,
        #[arg(long = "D", default_value_t = 1.0)]
        parameter: f64,
        /// Constant overrides, `name=value,...`.
        #[arg(long)]
        constants: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Estimate tail probabilities of the grid-class supremum from a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        constants: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Lower-bound experiments: empirical, Poisson and analytic.
    LowerBound {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        sigma2: f64,
        #[arg(long, default_value_t = 1_000)]
        reps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long)]
        constants: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Distribution of the modulus of continuity of G_n.
    Modulus {
        #[arg(long)]
        n: String,
        #[arg(long)]
        delta: String,
        #[arg(long, default_value_t = 1_000)]
        reps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        constants: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Run the invariant suite.
    Verify {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Constant overrides; not validated up front so bad values show up as failures.
        #[arg(long)]
        constants: Option<String>,
        /// Run only this check; repeatable.
        #[arg(long = "check")]
        only: Vec<String>,
    },
}

fn params(overrides: Option<&str>) -> CliResult<BoundParams> {
    match overrides {
        Some(spec) => BoundParams::default()
            .with_overrides(spec)
            .map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(BoundParams::default()),
    }
}

fn emit(
    output: &Output,
    header: &[&str],
    rows: &[Vec<String>],
    manifest: impl FnOnce() -> CliResult<RunManifest>,
) -> CliResult<()> {
    match &output.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Runtime(format!("creating {}: {e}", path.display())))?;
            cli::write_csv(io::BufWriter::new(file), header, rows)?;
        }
        None => cli::write_csv(io::stdout().lock(), header, rows)?,
    }
    if let Some(path) = output.manifest_path() {
        manifest()?.write(Path::new(&path))?;
    }
    Ok(())
}

fn run(command: Command) -> CliResult<ExitCode> {
    let started = cli::timestamp();
    match command {
        Command::Bounds {
            n,
            sigma2,
            exponent,
            parameter,
            constants,
            output,
        } => {
            let req = BoundsRequest {
                n: cli::parse_n_grid(&n)?,
                sigma2: cli::parse_grid(&sigma2)?,
                dims: DenseClass::new(parameter, exponent)
                    .map_err(|e| CliError::Usage(e.to_string()))?,
                params: params(constants.as_deref())?,
            };
            let rows = cli::bounds_rows(&req)?;
            emit(&output, &cli::BOUNDS_HEADER, &rows, || {
                RunManifest::new("bounds", &req, None, started)
            })?;
        }
        Command::Simulate {
            config,
            seed,
            reps,
            constants,
            output,
        } => {
            let overrides = SimulateOverrides {
                seed,
                reps,
                constants,
            };
            let config = cli::apply_overrides(cli::load_config(&config)?, &overrides)?;
            let (levels, rows) = cli::simulate(&config)?;
            let record = SimulateRecord {
                config: &config,
                resolved_levels: levels,
            };
            emit(&output, &cli::SIMULATE_HEADER, &cli::simulate_rows(&rows), || {
                RunManifest::new("simulate", &record, Some(config.master_seed), started)
            })?;
        }
        Command::LowerBound {
            n,
            sigma2,
            reps,
            seed,
            delta,
            constants,
            output,
        } => {
            let req = LowerBoundRequest {
                n,
                sigma2,
                reps,
                seed,
                delta,
                params: params(constants.as_deref())?,
            };
            let rows = cli::lower_bound_rows(&req)?;
            emit(&output, &cli::LOWER_BOUND_HEADER, &rows, || {
                RunManifest::new("lower-bound", &req, Some(seed), started)
            })?;
        }
        Command::Modulus {
            n,
            delta,
            reps,
            seed,
            constants,
            output,
        } => {
            let req = ModulusRequest {
                n: cli::parse_n_grid(&n)?,
                delta: cli::parse_grid(&delta)?,
                reps,
                seed,
                params: params(constants.as_deref())?,
            };
            let rows = cli::modulus_rows(&req)?;
            emit(&output, &cli::MODULUS_HEADER, &rows, || {
                RunManifest::new("modulus", &req, Some(seed), started)
            })?;
        }
        Command::Verify {
            seed,
            constants,
            only,
        } => {
            let mut params = BoundParams::default();
            if let Some(spec) = constants {
                params
                    .apply_overrides(&spec)
                    .map_err(|e| CliError::Usage(e.to_string()))?;
            }
            let failed = cli::verify(&VerifyOptions { seed, params, only }, io::stdout().lock())?;
            if !failed.is_empty() {
                let _ = writeln!(io::stderr(), "failed: {}", failed.join(", "));
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
