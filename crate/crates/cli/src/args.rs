use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fpld::estimation::Estimator;
use fpld::pipeline::{Distribution, OutputFormat, Pairing, RegressionMode};
use fpld::scoring::SkillMode;

#[derive(Debug, Parser)]
#[command(name = "fpld", version, about = "Fit, score and simulate five-parameter lambda distributions")]
#[command(args_override_self = true)]
pub struct Cli {
    /// JSON file whose keys supply any flag of the chosen subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Marginal fits per station and season, with gamma and lognormal baselines.
    Fit(FitArgs),
    /// Distributional quantile regression across stations.
    Regress(RegressArgs),
    /// Monte-Carlo study of estimator accuracy and cost.
    Simulate(SimulateArgs),
    /// Score observations against a fixed parameter vector.
    Crps(CrpsArgs),
    /// Compare closed forms against independent numerical oracles.
    Check(CheckArgs),
    /// Write synthetic station input files.
    Synthesize(SynthesizeArgs),
}

#[derive(Debug, Args)]
pub struct StationInput {
    /// Daily observations CSV: station_id,date,tmin,tmax,tmean.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,

    /// Station metadata CSV: station_id,easting,northing,altitude,distance_to_sea.
    #[arg(long, value_name = "FILE")]
    pub stations: PathBuf,

    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    #[arg(long, default_value = "csv")]
    pub format: OutputFormat,

    /// Minimum observations per season for a station to be kept.
    #[arg(long, default_value_t = fpld::pipeline::MIN_PER_SEASON)]
    pub min_per_season: usize,

    /// Restrict to these seasons.
    #[arg(long, value_delimiter = ',')]
    pub season: Vec<fpld::pipeline::Season>,

    /// Estimator settings as inline JSON.
    #[arg(long, value_name = "JSON")]
    pub fit: Option<String>,

    /// Drop the positive-support constraint.
    #[arg(long)]
    pub allow_negative_support: bool,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: StationInput,

    #[arg(long, value_delimiter = ',', default_value = "mq")]
    pub estimator: Vec<Estimator>,

    #[arg(long, value_delimiter = ',', default_value = "fpld,fpld-sym,gamma,lognormal")]
    pub distribution: Vec<Distribution>,

    /// Unit paired in the permutation tests.
    #[arg(long, value_delimiter = ',', default_value = "station")]
    pub pairing: Vec<Pairing>,

    /// Sign flips per permutation test; 0 disables the tests.
    #[arg(long, default_value_t = 9999)]
    pub permutations: usize,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    #[command(flatten)]
    pub common: StationInput,

    #[arg(long, default_value = "both")]
    pub mode: RegressionMode,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    #[arg(long, default_value = "csv")]
    pub format: OutputFormat,

    #[arg(long, default_value_t = 500)]
    pub replicates: usize,

    #[arg(long, default_value_t = 7)]
    pub min_exponent: u32,

    #[arg(long, default_value_t = 14)]
    pub max_exponent: u32,

    #[arg(long, value_delimiter = ',', default_value = "mq,ml,starship")]
    pub estimator: Vec<Estimator>,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[arg(long, default_value = "empirical")]
    pub skill_mode: SkillMode,

    /// Size of the evaluation sample drawn from each true distribution.
    #[arg(long, default_value_t = 16384)]
    pub mc_samples: usize,

    /// Only draw true distributions with a bounded right tail.
    #[arg(long)]
    pub strict_finite_support: bool,

    /// Include wall-clock timings, which makes the output machine dependent.
    #[arg(long)]
    pub record_timings: bool,

    #[arg(long, value_name = "JSON")]
    pub fit: Option<String>,
}

#[derive(Debug, Args)]
pub struct CrpsArgs {
    /// Parameter JSON: {"parametrisation": "natural"|"star"|"unconstrained", "values": [...]}.
    #[arg(long, value_name = "FILE")]
    pub params: PathBuf,

    /// Observations, one number per line.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,

    /// Output file; standard output when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[arg(long, default_value = "csv")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Random cases per check.
    #[arg(long, default_value_t = 200)]
    pub cases: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Write the results here as well as to standard output.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    /// Output directory for observations.csv and stations.csv.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    #[arg(long, default_value_t = 6)]
    pub count: usize,

    #[arg(long, default_value_t = 30)]
    pub years: u32,

    #[arg(long, default_value_t = 1991)]
    pub start_year: i32,

    /// Median shift of the diurnal range per kilometre of altitude.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub altitude_effect: f64,

    /// Star parameters (median, IQR, λ3, λ4, λ5) of the diurnal range.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub truth: Option<Vec<f64>>,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}
