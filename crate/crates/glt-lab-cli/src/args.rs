use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use glt_lab::experiments::ExperimentConfig;
use glt_lab::spectral::LogBase;

#[derive(Parser, Debug)]
#[command(name = "glt-lab", version, about = "Structured matrix-sequences, geometric means and spectral symbols")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build one matrix and write it as CSV.
    Build(BuildArgs),
    /// Two-matrix geometric mean of CSV inputs.
    Mean {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Karcher mean of two or more CSV inputs.
    Karcher {
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = glt_lab::tol::KARCHER_RESIDUAL)]
        tol: f64,
        #[arg(long, default_value_t = glt_lab::tol::KARCHER_MAX_ITER)]
        max_iter: usize,
        /// `adaptive` or a fixed step.
        #[arg(long, default_value = "adaptive")]
        theta: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the eigenvalues of a CSV matrix with a symbol (experiment id or grid CSV).
    Spectrum {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        symbol: String,
        #[command(flatten)]
        overrides: ConfigOverrides,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decay table of an experiment's extremal eigenvalues.
    Decay {
        #[arg(long)]
        experiment: String,
        /// Table name, `min` or `max`.
        #[arg(long, default_value = "min")]
        which: String,
        #[command(flatten)]
        overrides: ConfigOverrides,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a registered experiment and write all its tables.
    Experiment {
        #[arg(long)]
        id: Option<String>,
        /// JSON file with flat keys; flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: ConfigOverrides,
        /// Defaults to a directory named after the id.
        #[arg(long)]
        outdir: Option<PathBuf>,
    },
    /// Restricted and full Curie-Weiss runs.
    Cw {
        /// Spin counts for the full Hamiltonian.
        #[arg(long, value_delimiter = ',')]
        spins: Vec<usize>,
        #[command(flatten)]
        overrides: ConfigOverrides,
        #[arg(long)]
        outdir: PathBuf,
    },
}

/// Flags mirroring the keys of [`ExperimentConfig`].
#[derive(Args, Debug, Default)]
pub struct ConfigOverrides {
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Threshold for the below-threshold (zero-cluster) fraction.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// `base2`, `natural` or `base10`.
    #[arg(long)]
    pub log: Option<LogBase>,
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub karcher_tol: Option<f64>,
    #[arg(long)]
    pub karcher_max_iter: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub grid_x: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub grid_theta: Option<Vec<usize>>,
}

impl ConfigOverrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(v) = &self.sizes {
            cfg.sizes = v.clone();
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.b {
            cfg.b = v;
        }
        if let Some(v) = self.threshold {
            cfg.threshold = v;
        }
        if let Some(v) = self.log {
            cfg.log = Some(v);
        }
        if let Some(v) = &self.eps {
            cfg.eps_sequence = v.clone();
        }
        if let Some(v) = self.karcher_tol {
            cfg.karcher_tol = v;
        }
        if let Some(v) = self.karcher_max_iter {
            cfg.karcher_max_iter = v;
        }
        if let Some(v) = &self.grid_x {
            cfg.grid_x = v.clone();
        }
        if let Some(v) = &self.grid_theta {
            cfg.grid_theta = v.clone();
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Toeplitz,
    Circulant,
    Omega,
    Tau,
    Hankel,
    Diag,
    Fd4,
    #[value(name = "fd4-2d")]
    Fd42d,
    Bspline,
    #[value(name = "cw-restricted")]
    CwRestricted,
    #[value(name = "cw-full")]
    CwFull,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Stiffness,
    Mass,
    Sum,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    Midpoint,
    Spin,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Order; `n1,n2` for two-level families. Spin count for `cw-full`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// `k:re` or `k:re:im` pairs, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<String>,
    /// `re` or `re:im`, for `omega`.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// Expression in `x` (and `y` for two levels), e.g. `x^2 + math::sqrt(y)`.
    #[arg(long, allow_hyphen_values = true)]
    pub func: Option<String>,
    /// B-spline degree, 2 or 3.
    #[arg(long, default_value_t = 3)]
    pub degree: u8,
    #[arg(long, value_enum, default_value = "stiffness")]
    pub which: Which,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, value_enum, default_value = "midpoint")]
    pub convention: Convention,
    #[arg(long)]
    pub out: PathBuf,
}
