use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use sdnn_core::reference::{
    burgers_exact_grid, nls_spectral_solve, DEFAULT_DT, DEFAULT_MODES, DEFAULT_N_QUAD,
};
use sdnn_core::{linspace, sparsity_report, Checkpoint};
use sdnn_experiments::config::resolve_output;
use sdnn_experiments::runner::SparsitySummary;
use sdnn_experiments::{
    compare, evaluate, grid_search, run, Error, Result, RunConfig, SearchSpec, TestSpec,
};

#[derive(Parser)]
#[command(
    name = "sdnn",
    version,
    about = "Train and evaluate layer-wise L1 sparse networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one run configuration.
    Train { config: PathBuf },
    /// Score a checkpoint against a test spec.
    Evaluate {
        checkpoint: PathBuf,
        test_spec: PathBuf,
    },
    /// Compute a reference solution on a grid.
    Reference {
        #[command(subcommand)]
        which: Reference,
    },
    /// Layer-by-layer search over the L1 weights.
    Gridsearch {
        config: PathBuf,
        candidates: PathBuf,
    },
    /// Train two configs differing only in alpha and tabulate them.
    Compare {
        config_a: PathBuf,
        config_b: PathBuf,
        /// Output directory, under the output root when relative.
        #[arg(long, default_value = "compare")]
        out: PathBuf,
    },
    /// Per-layer sparsity of a checkpoint.
    Sparsity {
        checkpoint: PathBuf,
        #[arg(long, default_value_t = sdnn_core::DEFAULT_EPSILON)]
        epsilon: f64,
    },
}

#[derive(Subcommand)]
enum Reference {
    /// Cole-Hopf solution on `[0, 1] × [−1, 1]`.
    Burgers {
        #[arg(long, default_value_t = 101)]
        nt: usize,
        #[arg(long, default_value_t = 256)]
        nx: usize,
        #[arg(long, default_value_t = DEFAULT_N_QUAD)]
        n_quad: usize,
        #[arg(long, default_value = "reference")]
        out: PathBuf,
    },
    /// Fourier RK4 solution on `[0, π/2] × [−5, 5)`.
    Nls {
        #[arg(long, default_value_t = DEFAULT_MODES)]
        modes: usize,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        /// Number of equally spaced output times after t = 0.
        #[arg(long, default_value_t = 200)]
        nt: usize,
        #[arg(long, default_value = "reference")]
        out: PathBuf,
    },
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into())
}

fn execute(cli: Cli) -> Result<serde_json::Value> {
    match cli.command {
        Command::Train { config } => {
            let cfg = RunConfig::load(&config)?;
            let r = run(&cfg)?;
            Ok(json!({
                "relative_l2": r.relative_l2,
                "relative_l2_raw": r.relative_l2_raw,
                "nonzero": r.nonzero,
                "zero_percent": r.sparsity.zero_percent,
                "epochs_run": r.epochs_run,
                "checkpoint": r.checkpoint,
                "metrics": r.metrics,
            }))
        }
        Command::Evaluate {
            checkpoint,
            test_spec,
        } => {
            let spec = TestSpec::load(&test_spec)?;
            let (err, sparsity) = evaluate(&checkpoint, &spec)?;
            Ok(json!({
                "relative_l2": err,
                "sparsity": SparsitySummary::from(&sparsity),
            }))
        }
        Command::Reference { which } => {
            let (name, field) = match which {
                Reference::Burgers {
                    nt,
                    nx,
                    n_quad,
                    out,
                } => {
                    if nt < 2 || nx < 2 {
                        return Err(Error::Config("nt and nx must be at least 2".into()));
                    }
                    let f = burgers_exact_grid(
                        &linspace(0.0, 1.0, nt),
                        &linspace(-1.0, 1.0, nx),
                        n_quad,
                    )?;
                    (resolve_output(&out).join("burgers"), f)
                }
                Reference::Nls { modes, dt, nt, out } => {
                    if nt == 0 {
                        return Err(Error::Config("nt must be positive".into()));
                    }
                    let t_end = std::f64::consts::FRAC_PI_2;
                    let times: Vec<f64> = (1..=nt).map(|k| t_end * k as f64 / nt as f64).collect();
                    let sol = nls_spectral_solve(modes, dt, t_end, &times)?;
                    (resolve_output(&out).join("nls"), sol.field)
                }
            };
            let dir = name.parent().expect("joined path").to_path_buf();
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let csv = name.with_extension("csv");
            let bin = name.with_extension("bin");
            field.write_csv(&csv)?;
            field.save(&bin)?;
            Ok(json!({ "csv": csv, "binary": bin, "points": field.t().len() * field.x().len() }))
        }
        Command::Gridsearch { config, candidates } => {
            let base = RunConfig::load(&config)?;
            let search = SearchSpec::load(&candidates)?;
            let r = grid_search(&base, &search)?;
            Ok(json!({
                "alpha": r.best.alpha_vec(),
                "runs": r.trace.len(),
                "trace": r.trace_path,
            }))
        }
        Command::Compare {
            config_a,
            config_b,
            out,
        } => {
            let a = RunConfig::load(&config_a)?;
            let b = RunConfig::load(&config_b)?;
            let (la, mut lb) = (stem(&config_a), stem(&config_b));
            if la == lb {
                lb.push_str("-b");
            }
            let c = compare(&a, &b, [&la, &lb], &resolve_output(&out))?;
            print!("{}", c.text);
            Ok(json!({ "table": c.csv_path }))
        }
        Command::Sparsity {
            checkpoint,
            epsilon,
        } => {
            if !(epsilon.is_finite() && epsilon >= 0.0) {
                return Err(Error::Config(
                    "epsilon must be finite and nonnegative".into(),
                ));
            }
            let ck = Checkpoint::load(&checkpoint)?;
            Ok(serde_json::to_value(SparsitySummary::from(
                &sparsity_report(&ck.net, epsilon),
            ))?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let message = e.render().to_string();
            let first = message.lines().next().unwrap_or_default();
            eprintln!(
                "{}",
                json!({ "error": "Usage", "message": first.trim_start_matches("error: ") })
            );
            return ExitCode::from(2);
        }
    };
    match execute(cli) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
