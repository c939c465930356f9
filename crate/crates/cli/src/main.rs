use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use bilinear_sysid::bmsb::DEFAULT_SAMPLES;
use bilinear_sysid::experiment::{fit_rate, generate_system, summarize, table1_report, Metric};
use bilinear_sysid::identification::{error_metrics, estimate, BoundReport};
use bilinear_sysid::model::{simulate_standard_start, SigmaUMax};
use bilinear_sysid::NoiseParams;
use bilinear_sysid_cli::config::read_config;
use bilinear_sysid_cli::formats::{
    format_system, read_system, read_trajectory, write_bmsb_report, write_rows, write_summary,
    write_table1, write_trajectory,
};
use bilinear_sysid_cli::run::{bmsb_suite, run_sweep, DEFAULT_BMSB_CONFIGS};
use clap::{Parser, Subcommand};

/// Horizon over which the transient constant of Ã is measured.
const PROFILE_HORIZON: usize = 200;

#[derive(Parser)]
#[command(name = "bilinear-sysid", version, about = "Identify bilinear systems from one trajectory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random system with prescribed spectral radii.
    Generate {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 0.6)]
        rho0: f64,
        /// Defaults to 1/m.
        #[arg(long)]
        rhok: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Simulate a trajectory from x_0 ~ N(0, I) and write it as CSV.
    Simulate {
        #[arg(long)]
        system: PathBuf,
        #[arg(short = 'T', long)]
        horizon: usize,
        #[arg(long)]
        sigma_u: f64,
        #[arg(long)]
        sigma_w: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Estimate the system matrices from a trajectory CSV.
    Identify {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        sigma_u: f64,
        /// Write the estimated system here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// True system, for error reporting.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
    /// Run a (sigma, T, trial) sweep and write one CSV row per trial.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Per-group median, mean and standard deviation of the composite error.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Tabulate rho(Ã) over input strengths.
    Stability {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.6, 1.0, 1.2, 1.5])]
        sigma_u: Vec<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo small-ball checks over random configurations.
    Bmsb {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BMSB_CONFIGS)]
        configs: usize,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Largest sigma_u with rho(Ã) <= 1.
    SigmaUMax {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate { n, m, rho0, rhok, seed, out } => {
            let rhok = rhok.unwrap_or(1.0 / m.max(1) as f64);
            let sys = generate_system(n, m, rho0, rhok, seed)?;
            let mut w = output(out.as_deref())?;
            w.write_all(format_system(&sys).as_bytes())?;
            w.flush()?;
        }
        Command::Simulate { system, horizon, sigma_u, sigma_w, seed, out } => {
            let sys = read_system(&system)?;
            let traj = simulate_standard_start(&sys, NoiseParams::new(sigma_u, sigma_w)?, horizon, seed)?;
            write_trajectory(output(out.as_deref())?, &traj)?;
        }
        Command::Identify { trajectory, sigma_u, out, truth, delta } => {
            let file = File::open(&trajectory).with_context(|| format!("opening {}", trajectory.display()))?;
            let traj = read_trajectory(file, sigma_u, &trajectory.display().to_string())?;
            let mut result = estimate(&traj)?;
            let sys = result.system()?;
            let mut w = output(out.as_deref())?;
            w.write_all(format_system(&sys).as_bytes())?;
            w.flush()?;

            let sigma_w = result.noise_std_estimate();
            eprintln!("samples            {}", result.samples);
            eprintln!("cond_xtilde        {:.6e}", result.design_condition);
            eprintln!("residual_norm      {:.6e}", result.residual_norm);
            eprintln!("sigma_w_estimate   {sigma_w:.6e}");
            let profile = sys.stability_profile(sigma_u, PROFILE_HORIZON)?;
            eprintln!("rho_atilde_hat     {:.6}", profile.rho_tilde);
            if sigma_w > 0.0 {
                let x0 = traj.states()[0].norm();
                let bound = BoundReport::new(
                    &profile,
                    x0 * x0,
                    sigma_w,
                    traj.n(),
                    traj.m(),
                    result.samples,
                    delta,
                )?;
                eprintln!("t_delta            {:.3}", bound.t_delta);
                eprintln!("predicted_rate     {:.6e}", bound.predicted_error);
                eprintln!("T >= t_delta       {}", bound.feasible);
            }
            if let Some(path) = truth {
                let truth = read_system(&path)?;
                result = error_metrics(result, &truth)?;
                eprintln!("err0_normalized    {:.6e}", result.err0_normalized().unwrap_or(f64::NAN));
                eprintln!("errk_avg_normalized {:.6e}", result.errk_avg_normalized().unwrap_or(f64::NAN));
                eprintln!("composite_error    {:.6e}", result.composite_error.unwrap_or(f64::NAN));
            }
        }
        Command::Sweep { config, out, summary } => {
            let cfg = read_config(&config)?;
            let rows = run_sweep(&cfg)?;
            write_rows(output(out.as_deref())?, &rows)?;
            if let Some(path) = summary {
                let groups = summarize(&rows, Metric::CompositeError);
                write_summary(output(Some(&path))?, "composite_error", &groups)?;
            }
            match fit_rate(&rows, Metric::CompositeError) {
                Ok(fits) => {
                    for f in fits {
                        eprintln!(
                            "sigma_u={} sigma_w={} slope={:.4}",
                            f.sigma_u, f.sigma_w, f.slope
                        );
                    }
                }
                Err(e) => eprintln!("rate fit skipped: {e}"),
            }
        }
        Command::Stability { system, sigma_u, out } => {
            let sys = read_system(&system)?;
            write_table1(output(out.as_deref())?, &table1_report(&sys, &sigma_u)?)?;
        }
        Command::Bmsb { config, configs, samples, out } => {
            let cfg = read_config(&config)?;
            let rows = bmsb_suite(&cfg, configs, samples)?;
            write_bmsb_report(output(out.as_deref())?, &rows)?;
            let failed = rows
                .iter()
                .filter(|r| !matches!(&r.outcome, Ok(e) if e.passed))
                .count();
            eprintln!("{} checks, {failed} not passed", rows.len());
            if failed > 0 {
                return Ok(ExitCode::from(1));
            }
        }
        Command::SigmaUMax { system, tol } => {
            let sys = read_system(&system)?;
            match sys.sigma_u_max(tol)? {
                SigmaUMax::Bounded(s) => println!("{s:.12}"),
                SigmaUMax::Unbounded => println!("inf"),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

