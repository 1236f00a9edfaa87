use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tomobell_core::bell::{BellSettings, MaximizeConfig, StartDistribution};
use tomobell_core::portrait::PartitionScheme;
use tomobell_core::states::{DisplacementPair, QuadratureConvention};
use tomobell_core::Complex;

use crate::complex::parse_complex;

/// Photon-number tomograms, qubit portraits and Bell-CHSH numbers for
/// two-mode light.
///
/// Complex values use the literal forms `a`, `bi`, `a+bi` and `a-bi`
/// (decimal reals, no spaces). Set TOMOBELL_LOG (e.g. `debug`) for
/// diagnostics on stderr.
#[derive(Debug, Parser)]
#[command(name = "tomobell", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probability w(n1, n2) at one displacement.
    Tomogram {
        #[command(flatten)]
        state: StateArg,
        #[arg(long)]
        n1: usize,
        #[arg(long)]
        n2: usize,
        #[command(flatten)]
        alpha: AlphaArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Four-cell qubit portrait at one displacement.
    Portrait {
        #[command(flatten)]
        state: StateArg,
        #[command(flatten)]
        partition: PartitionArg,
        #[command(flatten)]
        alpha: AlphaArgs,
        #[command(flatten)]
        truncation: TruncationArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Bell matrix, Bell number and CHSH verdict at fixed settings.
    Bell {
        #[command(flatten)]
        state: StateArg,
        #[command(flatten)]
        partition: PartitionArg,
        #[command(flatten)]
        alpha: AlphaArgs,
        /// First-mode setting of the second measurement pair.
        #[arg(long, value_parser = parse_complex, default_value = "0", allow_hyphen_values = true)]
        beta1: Complex,
        #[arg(long, value_parser = parse_complex, default_value = "0", allow_hyphen_values = true)]
        beta2: Complex,
        #[command(flatten)]
        truncation: TruncationArgs,
        /// Half-width of the settings box checked by --box-enforce.
        #[arg(long = "box", default_value_t = 2.0)]
        box_half_width: f64,
        #[arg(long, value_enum, default_value_t = BoxEnforce::Off)]
        box_enforce: BoxEnforce,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Maximize the Bell number over the settings box.
    Maximize {
        #[command(flatten)]
        state: StateArg,
        #[command(flatten)]
        partition: PartitionArg,
        #[command(flatten)]
        truncation: TruncationArgs,
        #[command(flatten)]
        maximizer: MaximizerArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// One maximization per grid point of a state family, written as CSV.
    Scan {
        #[arg(long, value_enum)]
        preset: Preset,
        /// First parameter (gamma1, or k): `a,b,c` or `start:stop:step`.
        #[arg(long, allow_hyphen_values = true)]
        grid1: String,
        /// Second parameter (gamma2, or l).
        #[arg(long, allow_hyphen_values = true)]
        grid2: String,
        /// Partition for the gaussian-family preset; cat presets fix their own.
        #[command(flatten)]
        partition: PartitionArg,
        #[arg(long, value_enum, default_value_t = Convention::Standard)]
        convention: Convention,
        #[command(flatten)]
        truncation: TruncationArgs,
        #[command(flatten)]
        maximizer: MaximizerArgs,
        /// Output file; CSV is written to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct StateArg {
    /// JSON state description.
    #[arg(long = "state", value_name = "FILE")]
    pub path: PathBuf,
}

#[derive(Debug, Args)]
pub struct PartitionArg {
    /// zero-nonzero, even-odd or threshold:T.
    #[arg(long = "partition", value_name = "NAME", default_value = "even-odd", value_parser = parse_partition)]
    pub scheme: PartitionScheme,
}

fn parse_partition(s: &str) -> Result<PartitionScheme, String> {
    s.parse().map_err(|e: tomobell_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct AlphaArgs {
    #[arg(long, value_parser = parse_complex, default_value = "0", allow_hyphen_values = true)]
    pub alpha1: Complex,
    #[arg(long, value_parser = parse_complex, default_value = "0", allow_hyphen_values = true)]
    pub alpha2: Complex,
}

impl AlphaArgs {
    pub fn pair(&self) -> DisplacementPair {
        DisplacementPair::new(self.alpha1, self.alpha2)
    }

    pub fn settings(&self, beta1: Complex, beta2: Complex) -> BellSettings {
        BellSettings::new(self.alpha1, self.alpha2, beta1, beta2)
    }
}

#[derive(Debug, Args)]
pub struct TruncationArgs {
    /// Photon-number cutoff for tomogram sums.
    #[arg(long, default_value_t = 30)]
    pub nmax: usize,
    /// Largest tolerated truncation deficit.
    #[arg(long, default_value_t = 1e-4)]
    pub tail_eps: f64,
}

#[derive(Debug, Args)]
pub struct MaximizerArgs {
    /// Half-width of the box for every real and imaginary setting part.
    #[arg(long = "box", default_value_t = 2.0)]
    pub box_half_width: f64,
    #[arg(long, default_value_t = 64)]
    pub starts: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    /// Simplex stops once its diameter is below xtol and its value spread
    /// below ftol.
    #[arg(long, default_value_t = MaximizeConfig::default().xtol)]
    pub xtol: f64,
    #[arg(long, default_value_t = MaximizeConfig::default().ftol)]
    pub ftol: f64,
    /// Shrink every other start towards the origin by up to this many
    /// decades; helps when the optimum is much smaller than the box.
    #[arg(long, value_name = "DECADES")]
    pub multiscale: Option<f64>,
}

impl MaximizerArgs {
    pub fn config(&self, t: &TruncationArgs) -> MaximizeConfig {
        MaximizeConfig {
            box_half_width: self.box_half_width,
            starts: self.starts,
            seed: self.seed,
            max_iters: self.max_iters,
            xtol: self.xtol,
            ftol: self.ftol,
            n_max: t.nmax,
            tail_eps: t.tail_eps,
            jobs: self.jobs,
            start_distribution: match self.multiscale {
                Some(decades) => StartDistribution::MultiScale { decades },
                None => StartDistribution::Uniform,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Plain,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BoxEnforce {
    /// Reject settings outside the box.
    Strict,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Cat (gamma1, gamma2) with real amplitudes, zero-nonzero closed form.
    CatZeroNonzero,
    /// Cat (gamma1, gamma2) with real amplitudes, even-odd closed form.
    CatEvenOdd,
    /// Purity family M(k, l).
    GaussianFamily,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    Standard,
    Swapped,
}

impl From<Convention> for QuadratureConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Standard => QuadratureConvention::Standard,
            Convention::Swapped => QuadratureConvention::Swapped,
        }
    }
}
