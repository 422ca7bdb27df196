//! Station data ingest, seasonal cleaning, marginal and regression evaluation, and report output.

mod clean;
mod data;
mod emit;
mod marginal;
mod regression;
mod report;
mod season;
mod synthetic;

pub use clean::{clean, seasonal_covariates, seasonal_datasets, CleanCounts, CleanOutcome, SeasonalDataset, SeasonalStation, COVARIATE_NAMES, MIN_PER_SEASON};
pub use data::{ingest, write_inputs, DailyRecord, IngestReport, StationMeta, StationSeries};
pub use emit::{emit, read_report, OutputFormat};
pub use marginal::{model_name, permutation_tests, run_marginal, Distribution, MarginalConfig};
pub use regression::{run_regression, RegressionConfig, RegressionMode};
pub use report::{
    CoefficientRow, EvalReport, EvalRow, Pairing, ParameterSummary, PermutationRow, PitBinRow, QqRow, SeasonSummary,
};
pub use season::{assign_season, Season};
pub use synthetic::{synthetic_stations, SyntheticConfig};
