use std::path::PathBuf;
use std::process::ExitCode;

use aev_bench::config::RunConfig;
use aev_bench::fit::{fit_curves, Window};
use aev_bench::harness::{default_workers, run_to_dir};
use aev_bench::plot::{plot_script, Figure};
use aev_bench::record::read_records;
use aev_bench::{BenchError, Result};
use aev_core::dephasing::{bump_delta_bound, required_dephasing_time};
use clap::{Parser, Subcommand};

/// Adiabatic echo verification benchmarks.
#[derive(Parser)]
#[command(name = "aev", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark grid and write records.csv, records.json, summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        overwrite: bool,
    },
    /// Fit log-log error slopes per curve inside a `tmin:tmax` window on T.
    Fit {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        window: Option<Window>,
    },
    /// Write a standalone matplotlib script reproducing a figure layout.
    Plot {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        figure: Figure,
        /// Script path; defaults to `<figure>.py` next to the records.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Bump dephasing bound and its inverse.
    Bounds {
        #[arg(long = "t-d")]
        t_d: f64,
        #[arg(long)]
        gap: f64,
        /// Target δ for the inversion; defaults to the bound at `--t-d`.
        #[arg(long)]
        delta: Option<f64>,
    },
}

fn numerical(point: &str) -> impl FnOnce(aev_core::Error) -> BenchError + '_ {
    move |source| BenchError::Numerical {
        point: point.to_string(),
        source,
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            out,
            workers,
            overwrite,
        } => {
            let cfg = RunConfig::load(&config)?;
            let workers = workers.or(cfg.workers).unwrap_or_else(default_workers);
            if workers == 0 {
                return Err(BenchError::Config("--workers must be >= 1".into()));
            }
            let outcome = run_to_dir(&cfg, &out, workers, overwrite || cfg.overwrite)?;
            let s = &outcome.summary;
            println!("{} records written to {}", s.records, outcome.out_dir.display());
            for f in &s.fits {
                match &f.fit {
                    Some(fit) => println!("{:<40} slope {:+.3} ± {:.3} ({} points)", f.curve, fit.slope, fit.stderr, fit.points),
                    None => println!("{:<40} {}", f.curve, f.error.as_deref().unwrap_or("no fit")),
                }
            }
            if let Some(first) = s.failures.first() {
                eprintln!(
                    "numerical failure at {} grid point(s); first: {}: {}",
                    s.failures.len(),
                    first.point,
                    first.status
                );
                return Ok(ExitCode::from(3));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Fit { records, window } => {
            let recs = read_records(&records)?;
            let window = match window {
                Some(w) => w,
                None => Window::default_for(&recs).ok_or_else(|| BenchError::Records("no records".into()))?,
            };
            let fits = fit_curves(&recs, window);
            if fits.is_empty() {
                return Err(BenchError::Fit(format!(
                    "no records with positive error in window {}:{}",
                    window.t_min, window.t_max
                )));
            }
            for f in &fits {
                if let Some(e) = &f.error {
                    eprintln!("warning: {}: {e}", f.curve);
                }
            }
            println!("{}", serde_json::to_string_pretty(&fits)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot {
            records,
            figure,
            output,
        } => {
            let recs = read_records(&records)?;
            let name = match figure {
                Figure::Fig3 => "fig3",
                Figure::Fig4 => "fig4",
            };
            let script_path = output.unwrap_or_else(|| records.with_file_name(format!("{name}.py")));
            let image = script_path.with_extension("pdf");
            let script = plot_script(&recs, figure, &image.to_string_lossy())?;
            std::fs::write(&script_path, script).map_err(|e| BenchError::io(&script_path, e))?;
            println!("{}", script_path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Bounds { t_d, gap, delta } => {
            if !(t_d > 0.0 && gap > 0.0 && t_d.is_finite() && gap.is_finite()) {
                return Err(BenchError::Config(format!("--t-d and --gap must be positive (got {t_d}, {gap})")));
            }
            let bound = bump_delta_bound(t_d, gap).map_err(numerical("bounds"))?;
            let target = delta.unwrap_or(bound);
            let t_req = required_dephasing_time(target, gap).map_err(numerical("bounds"))?;
            let back = bump_delta_bound(t_req, gap).map_err(numerical("bounds"))?;
            println!("bump_delta_bound(T_d={t_d}, gap={gap}) = {bound:e}");
            println!("required_dephasing_time(delta={target:e}, gap={gap}) = {t_req}");
            println!("bump_delta_bound(T_d={t_req}, gap={gap}) = {back:e} (<= target: {})", back <= target);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
