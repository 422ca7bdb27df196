use std::fmt;
use std::str::FromStr;

use log::warn;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::marginal::{assemble, evaluate_fpld, Evaluation};
use super::report::{CoefficientRow, EvalReport, EvalRow};
use super::{SeasonalDataset, SeasonalStation, COVARIATE_NAMES};
use crate::error::{Error, Result};
use crate::estimation::FitConfig;
use crate::quantreg::{distributional_fit, fit_bundle, Design, QuantileFitBundle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RegressionMode {
    InSample,
    Loocv,
    #[default]
    Both,
}

impl RegressionMode {
    fn in_sample(self) -> bool {
        matches!(self, RegressionMode::InSample | RegressionMode::Both)
    }

    fn loocv(self) -> bool {
        matches!(self, RegressionMode::Loocv | RegressionMode::Both)
    }
}

impl fmt::Display for RegressionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegressionMode::InSample => "in-sample",
            RegressionMode::Loocv => "loocv",
            RegressionMode::Both => "both",
        })
    }
}

impl FromStr for RegressionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "in-sample" => Ok(RegressionMode::InSample),
            "loocv" => Ok(RegressionMode::Loocv),
            "both" => Ok(RegressionMode::Both),
            _ => Err(Error::domain(format!("unknown regression mode '{s}' (expected in-sample, loocv or both)"))),
        }
    }
}

pub const IN_SAMPLE_MODEL: &str = "regression-in-sample";
pub const LOOCV_MODEL: &str = "regression-loocv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionConfig {
    pub mode: RegressionMode,
    /// Settings for the method-of-quantiles fit to the predicted quantiles.
    pub fit: FitConfig,
    pub pit_bins: usize,
    pub plot_data: bool,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        Self {
            mode: RegressionMode::Both,
            fit: FitConfig { enforce_positive_support: true, ..FitConfig::default() },
            pit_bins: 10,
            plot_data: true,
        }
    }
}

/// Covariates kept for a training set: constant columns are dropped, then each
/// remaining column is kept only if it raises the rank of the station-level design.
pub(crate) fn select_covariates(stations: &[&SeasonalStation]) -> Vec<usize> {
    let x: Vec<[f64; 6]> = stations.iter().filter_map(|s| s.covariates).collect();
    let s = x.len();
    let mut kept = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![vec![1.0; s]];
    for (j, name) in COVARIATE_NAMES.iter().enumerate() {
        let col: Vec<f64> = x.iter().map(|r| r[j]).collect();
        let mean = col.iter().sum::<f64>() / s as f64;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (s as f64 - 1.0).max(1.0)).sqrt();
        if !(sd > 1e-12 * mean.abs().max(1.0)) {
            warn!("dropping covariate '{name}': zero variance across training stations");
            continue;
        }
        columns.push(col.iter().map(|v| (v - mean) / sd).collect());
        let m = DMatrix::from_fn(s, columns.len(), |i, k| columns[k][i]);
        let sv = m.singular_values();
        let max = sv.max();
        if columns.len() > s || !(sv.min() > 1e-8 * max) {
            warn!("dropping covariate '{name}': collinear with the covariates already selected");
            columns.pop();
            continue;
        }
        kept.push(j);
    }
    kept
}

/// Observation-level regression data; `tags` names the station each row came from.
pub(crate) struct TrainingSet {
    pub rows: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub tags: Vec<usize>,
    pub names: Vec<String>,
    pub columns: Vec<usize>,
}

pub(crate) fn training_set(stations: &[SeasonalStation], exclude: Option<usize>) -> TrainingSet {
    let usable: Vec<(usize, &SeasonalStation)> = stations
        .iter()
        .enumerate()
        .filter(|(i, s)| Some(*i) != exclude && s.covariates.is_some())
        .collect();
    let columns = select_covariates(&usable.iter().map(|(_, s)| *s).collect::<Vec<_>>());
    let names = columns.iter().map(|&j| COVARIATE_NAMES[j].to_string()).collect();
    let (mut rows, mut y, mut tags) = (Vec::new(), Vec::new(), Vec::new());
    for (i, s) in usable {
        let x: Vec<f64> = columns.iter().map(|&j| s.covariates.unwrap()[j]).collect();
        for &v in &s.dtr {
            rows.push(x.clone());
            y.push(v);
            tags.push(i);
        }
    }
    TrainingSet { rows, y, tags, names, columns }
}

fn train(set: &TrainingSet) -> Result<QuantileFitBundle> {
    let design = Design::new(&set.rows, &set.names, set.y.clone())?;
    fit_bundle(&design)
}

fn coefficient_rows(bundle: &QuantileFitBundle, season: super::Season, fit: &str) -> Vec<CoefficientRow> {
    let Some(median) = bundle.fit_at(0.5) else { return Vec::new() };
    std::iter::once("intercept".to_string())
        .chain(bundle.covariate_names().iter().cloned())
        .zip(&median.beta)
        .map(|(term, &coefficient)| CoefficientRow { season, fit: fit.to_string(), term, coefficient })
        .collect()
}

fn evaluate_station(
    bundle: &QuantileFitBundle,
    set: &TrainingSet,
    st: &SeasonalStation,
    row: EvalRow,
    cfg: &RegressionConfig,
) -> Result<Evaluation> {
    let cov = st
        .covariates
        .ok_or_else(|| Error::domain(format!("station '{}' has no covariates for this season", st.station_id)))?;
    let x0: Vec<f64> = set.columns.iter().map(|&j| cov[j]).collect();
    let res = distributional_fit(bundle, &x0, &cfg.fit)?;
    evaluate_fpld(row, &st.dtr, res.params, res.converged, cfg.pit_bins, cfg.plot_data)
}

fn blank(st: &SeasonalStation, season: super::Season, model: &str) -> EvalRow {
    EvalRow::pending(&st.station_id, season, model, st.dtr.len())
}

fn finish(
    result: Result<Evaluation>,
    st: &SeasonalStation,
    season: super::Season,
    model: &str,
) -> std::result::Result<Evaluation, EvalRow> {
    result.map_err(|e| {
        warn!("{} {season} {model}: {e}", st.station_id);
        EvalRow::failed(&st.station_id, season, model, st.dtr.len(), e.to_string())
    })
}

/// Distributional quantile regression across the stations of one season.
///
/// In-sample mode trains one bundle on all stations; LOOCV trains one bundle per
/// held-out station on the remaining stations only.
pub fn run_regression(dataset: &SeasonalDataset, cfg: &RegressionConfig) -> Result<EvalReport> {
    cfg.fit.validate()?;
    let season = dataset.season;
    let stations = &dataset.stations;
    let with_cov = stations.iter().filter(|s| s.covariates.is_some()).count();
    if with_cov < 3 {
        return Err(Error::domain(format!(
            "regression needs at least 3 stations with covariates in {season}, got {with_cov}"
        )));
    }
    let mut results = Vec::new();
    let mut coefficients = Vec::new();

    if cfg.mode.in_sample() {
        let set = training_set(stations, None);
        let bundle = train(&set)?;
        coefficients.extend(coefficient_rows(&bundle, season, "in-sample"));
        results.extend(stations.par_iter().map(|st| {
            let ev = evaluate_station(&bundle, &set, st, blank(st, season, IN_SAMPLE_MODEL), cfg);
            finish(ev, st, season, IN_SAMPLE_MODEL)
        }).collect::<Vec<_>>());
    }

    if cfg.mode.loocv() {
        let folds: Vec<_> = (0..stations.len())
            .into_par_iter()
            .map(|i| {
                let st = &stations[i];
                let set = training_set(stations, Some(i));
                debug_assert!(set.tags.iter().all(|&t| t != i));
                let outcome = train(&set).and_then(|bundle| {
                    let coef = coefficient_rows(&bundle, season, &format!("loocv:{}", st.station_id));
                    evaluate_station(&bundle, &set, st, blank(st, season, LOOCV_MODEL), cfg).map(|ev| (ev, coef))
                });
                match outcome {
                    Ok((ev, coef)) => (Ok(ev), coef),
                    Err(e) => (finish(Err(e), st, season, LOOCV_MODEL), Vec::new()),
                }
            })
            .collect();
        for (r, coef) in folds {
            results.push(r);
            coefficients.extend(coef);
        }
    }

    let mut report = assemble(results);
    report.coefficients = coefficients;
    report.sort();
    Ok(report)
}
