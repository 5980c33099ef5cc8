//! `glt-lab` command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 numerical failure, 1 I/O failure.

mod args;
mod build;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use glt_lab::experiments::{experiment_symbol, run_experiment, write_experiment_outputs, ExperimentConfig};
use glt_lab::geomean::{alm_mean, karcher_mean, KarcherConfig, ThetaMode};
use glt_lab::io::{read_grid_symbol_csv, read_matrix_csv, write_decay_csv, write_matrix_csv, write_overlay_csv};
use glt_lab::spectral::compare_distribution;
use glt_lab::HermitianMatrix;

use args::{Cli, Command, ConfigOverrides};

/// Failure with its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(glt_lab::Error),
}

impl From<glt_lab::Error> for CliError {
    fn from(e: glt_lab::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(e) if e.is_numerical() => 3,
            CliError::Lib(glt_lab::Error::Io(_)) => 1,
            CliError::Lib(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    glt_lab::configure_threads_from_env();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn read_hermitian(path: &Path) -> CliResult<HermitianMatrix> {
    Ok(HermitianMatrix::new(read_matrix_csv(path)?)?)
}

fn experiment_config(id: &str, config: Option<&PathBuf>, o: &ConfigOverrides) -> CliResult<ExperimentConfig> {
    let mut cfg = match config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(glt_lab::Error::from)?;
            serde_json::from_str::<ExperimentConfig>(&text)
                .map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if !id.is_empty() {
        cfg.id = id.to_string();
    }
    o.apply(&mut cfg);
    Ok(cfg)
}

fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Build(b) => {
            let m = build::build(&b)?;
            write_matrix_csv(&b.out, &m)?;
            println!("wrote {}x{} matrix to {}", m.rows(), m.cols(), b.out.display());
        }
        Command::Mean { a, b, out } => {
            let g = alm_mean(&read_hermitian(&a)?, &read_hermitian(&b)?)?;
            write_matrix_csv(&out, &g)?;
            println!("wrote mean of order {} to {}", g.order(), out.display());
        }
        Command::Karcher { inputs, tol, max_iter, theta, out } => {
            let list = inputs.iter().map(|p| read_hermitian(p)).collect::<CliResult<Vec<_>>>()?;
            let theta_mode = match theta.as_str() {
                "adaptive" => ThetaMode::Adaptive,
                v => ThetaMode::Fixed(
                    v.parse().map_err(|_| CliError::Usage(format!("--theta expects adaptive or a number, got {v}")))?,
                ),
            };
            let cfg = KarcherConfig { residual_tol: tol, max_iterations: max_iter, theta_mode, ..Default::default() };
            let r = karcher_mean(&list, &cfg)?;
            write_matrix_csv(&out, &r.mean)?;
            let res = r.residual_history.last().copied().unwrap_or(f64::NAN);
            println!("iterations {} residual {res:e} converged {}", r.iterations, r.converged);
            if !r.converged {
                return Err(glt_lab::Error::NoConvergence(format!(
                    "Karcher iteration stopped after {} steps at residual {res:e}",
                    r.iterations
                ))
                .into());
            }
        }
        Command::Spectrum { matrix, symbol, overrides, out } => {
            let threshold = overrides.threshold.unwrap_or(glt_lab::tol::SPECTRAL_THRESHOLD);
            let a = read_hermitian(&matrix)?;
            let g = if Path::new(&symbol).is_file() {
                read_grid_symbol_csv(Path::new(&symbol))?
            } else {
                let cfg = experiment_config(&symbol, None, &overrides)?;
                experiment_symbol(&symbol, &cfg)?.0
            };
            let r = compare_distribution(&a, &g, threshold)?;
            write_overlay_csv(&out, &r)?;
            println!(
                "n {} lambda_min {:e} lambda_max {:e} sup_dist {:e} l1_dist {:e} frac_below {}",
                r.n, r.lambda_min, r.lambda_max, r.sup_distance, r.l1_distance, r.below_threshold_fraction
            );
        }
        Command::Decay { experiment, which, overrides, out } => {
            let cfg = experiment_config(&experiment, None, &overrides)?;
            let o = run_experiment(&cfg)?;
            let t = o.decay_table(&which).ok_or_else(|| {
                let names: Vec<&str> = o.decay.iter().map(|(n, _)| n.as_str()).collect();
                CliError::Usage(format!("experiment {experiment} has no '{which}' decay table (available: {names:?})"))
            })?;
            write_decay_csv(&out, t)?;
            for r in &t.rows {
                match r.alpha {
                    Some(a) => println!("n {} tau {:e} alpha {a}", r.n, r.tau),
                    None => println!("n {} tau {:e}", r.n, r.tau),
                }
            }
        }
        Command::Experiment { id, config, overrides, outdir } => {
            let cfg = experiment_config(id.as_deref().unwrap_or(""), config.as_ref(), &overrides)?;
            if cfg.id.is_empty() {
                return Err(CliError::Usage("experiment needs --id or an id in --config".into()));
            }
            let dir = outdir.unwrap_or_else(|| PathBuf::from(&cfg.id));
            let o = run_experiment(&cfg)?;
            write_experiment_outputs(&o, &dir)?;
            print!("{}", std::fs::read_to_string(dir.join("summary.txt")).map_err(glt_lab::Error::from)?);
        }
        Command::Cw { spins, overrides, outdir } => {
            let mut cfg = experiment_config("cw", None, &overrides)?;
            cfg.full_cw_spins = spins;
            let o = run_experiment(&cfg)?;
            write_experiment_outputs(&o, &outdir)?;
            print!("{}", std::fs::read_to_string(outdir.join("summary.txt")).map_err(glt_lab::Error::from)?);
        }
    }
    Ok(())
}
