use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CleanCounts, Season};
use crate::dist::FpldStar;

/// Score summary for one model at one station in one season.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub station_id: String,
    pub season: Season,
    pub model: String,
    pub mean_crps: Option<f64>,
    pub e_mu: Option<f64>,
    pub e_sigma: Option<f64>,
    pub n_obs: usize,
    pub params: Option<FpldStar<f64>>,
    pub converged: Option<bool>,
    pub error: Option<String>,
    /// Per-observation scores, kept in memory for paired tests.
    #[serde(skip)]
    pub scores: Vec<f64>,
}

impl EvalRow {
    pub(crate) fn failed(station_id: &str, season: Season, model: &str, n_obs: usize, error: String) -> Self {
        Self { error: Some(error), ..Self::pending(station_id, season, model, n_obs) }
    }

    pub(crate) fn pending(station_id: &str, season: Season, model: &str, n_obs: usize) -> Self {
        Self {
            station_id: station_id.to_string(),
            season,
            model: model.to_string(),
            mean_crps: None,
            e_mu: None,
            e_sigma: None,
            n_obs,
            params: None,
            converged: None,
            error: None,
            scores: Vec::new(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none() && self.mean_crps.is_some()
    }
}

/// `(p, sample quantile, model quantile)` on the 99-point probability grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqRow {
    pub station_id: String,
    pub season: Season,
    pub model: String,
    pub p: f64,
    pub sample_quantile: f64,
    pub model_quantile: f64,
}

/// Count of PIT values in `[lower, upper)`; the last bin is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitBinRow {
    pub station_id: String,
    pub season: Season,
    pub model: String,
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Median-regression coefficient in standardised covariate units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub season: Season,
    /// `in-sample`, or `loocv:<held-out station>`.
    pub fit: String,
    pub term: String,
    pub coefficient: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// Station mean scores are paired.
    #[default]
    Station,
    /// Individual observation scores are paired.
    Observation,
}

impl std::str::FromStr for Pairing {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "station" => Ok(Pairing::Station),
            "observation" => Ok(Pairing::Observation),
            _ => Err(crate::Error::Domain(format!("unknown pairing '{s}' (expected station or observation)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationRow {
    pub season: Season,
    pub model_a: String,
    pub model_b: String,
    pub pairing: Pairing,
    pub mean_difference: f64,
    pub p_value: f64,
}

/// Everything a pipeline run produces.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub coefficients: Vec<CoefficientRow>,
    pub qq: Vec<QqRow>,
    pub pit_histogram: Vec<PitBinRow>,
    pub permutation_tests: Vec<PermutationRow>,
    pub cleaning: Option<CleanCounts>,
}

/// Pooled score and calibration per season and model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonSummary {
    pub season: Season,
    pub model: String,
    pub stations: usize,
    pub n_obs: usize,
    /// Mean over all observations.
    pub mean_crps: f64,
    pub e_mu: f64,
    pub e_sigma: f64,
}

/// Across-station mean and standard deviation of one fitted parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub season: Season,
    pub model: String,
    pub parameter: String,
    pub mean: f64,
    pub sd: f64,
    pub stations: usize,
}

impl EvalReport {
    pub fn merge(&mut self, other: EvalReport) {
        self.rows.extend(other.rows);
        self.coefficients.extend(other.coefficients);
        self.qq.extend(other.qq);
        self.pit_histogram.extend(other.pit_histogram);
        self.permutation_tests.extend(other.permutation_tests);
        if self.cleaning.is_none() {
            self.cleaning = other.cleaning;
        }
    }

    /// Sorts every table by season, station and model so output order never depends on scheduling.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| (a.season, &a.station_id, &a.model).cmp(&(b.season, &b.station_id, &b.model)));
        self.qq.sort_by(|a, b| {
            (a.season, &a.station_id, &a.model).cmp(&(b.season, &b.station_id, &b.model)).then(a.p.total_cmp(&b.p))
        });
        self.pit_histogram.sort_by(|a, b| {
            (a.season, &a.station_id, &a.model)
                .cmp(&(b.season, &b.station_id, &b.model))
                .then(a.lower.total_cmp(&b.lower))
        });
        self.coefficients.sort_by(|a, b| (a.season, &a.fit).cmp(&(b.season, &b.fit)));
        self.permutation_tests
            .sort_by(|a, b| (a.season, &a.model_a, &a.model_b).cmp(&(b.season, &b.model_a, &b.model_b)));
    }

    /// Observation-weighted mean score with exactly pooled PIT moments.
    pub fn season_summaries(&self) -> Vec<SeasonSummary> {
        let mut groups: BTreeMap<(Season, &str), Vec<&EvalRow>> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.is_ok()) {
            groups.entry((r.season, r.model.as_str())).or_default().push(r);
        }
        groups
            .into_iter()
            .map(|((season, model), rows)| {
                let n: usize = rows.iter().map(|r| r.n_obs).sum();
                let nf = n as f64;
                let crps = rows.iter().map(|r| r.mean_crps.unwrap() * r.n_obs as f64).sum::<f64>() / nf;
                let means: Vec<f64> = rows.iter().map(|r| r.e_mu.unwrap_or(f64::NAN) + 0.5).collect();
                let pooled_mean = rows.iter().zip(&means).map(|(r, m)| m * r.n_obs as f64).sum::<f64>() / nf;
                let sd0 = 1.0 / 12f64.sqrt();
                let ss: f64 = rows
                    .iter()
                    .zip(&means)
                    .map(|(r, m)| {
                        let k = r.n_obs as f64;
                        let s = r.e_sigma.unwrap_or(f64::NAN) + sd0;
                        (k - 1.0) * s * s + k * (m - pooled_mean).powi(2)
                    })
                    .sum();
                SeasonSummary {
                    season,
                    model: model.to_string(),
                    stations: rows.len(),
                    n_obs: n,
                    mean_crps: crps,
                    e_mu: pooled_mean - 0.5,
                    e_sigma: (ss / (nf - 1.0)).sqrt() - sd0,
                }
            })
            .collect()
    }

    pub fn parameter_summaries(&self) -> Vec<ParameterSummary> {
        const NAMES: [&str; 5] = ["median", "iqr", "lambda3", "lambda4", "lambda5"];
        let mut groups: BTreeMap<(Season, &str), Vec<[f64; 5]>> = BTreeMap::new();
        for r in &self.rows {
            if let Some(p) = r.params {
                groups.entry((r.season, r.model.as_str())).or_default().push(p.to_array());
            }
        }
        let mut out = Vec::new();
        for ((season, model), vals) in groups {
            let k = vals.len() as f64;
            for (j, name) in NAMES.iter().enumerate() {
                let mean = vals.iter().map(|v| v[j]).sum::<f64>() / k;
                let sd = if vals.len() > 1 {
                    (vals.iter().map(|v| (v[j] - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
                } else {
                    0.0
                };
                out.push(ParameterSummary {
                    season,
                    model: model.to_string(),
                    parameter: name.to_string(),
                    mean,
                    sd,
                    stations: vals.len(),
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, model: &str, crps: f64, n: usize) -> EvalRow {
        EvalRow {
            station_id: id.into(),
            season: Season::Winter,
            model: model.into(),
            mean_crps: Some(crps),
            e_mu: Some(0.0),
            e_sigma: Some(0.0),
            n_obs: n,
            params: None,
            converged: None,
            error: None,
            scores: vec![],
        }
    }

    #[test]
    fn weighted_mean_crps() {
        let rep = EvalReport { rows: vec![row("a", "m", 1.0, 100), row("b", "m", 2.0, 300)], ..Default::default() };
        let s = rep.season_summaries();
        assert_eq!(s.len(), 1);
        assert!((s[0].mean_crps - 1.75).abs() < 1e-15);
        assert_eq!(s[0].n_obs, 400);
    }

    #[test]
    fn pooled_pit_matches_direct() {
        let u1: Vec<f64> = (0..50).map(|i| (i as f64 + 0.3) / 60.0).collect();
        let u2: Vec<f64> = (0..80).map(|i| (i as f64 + 0.5) / 80.0).collect();
        let mk = |u: &[f64], id: &str| {
            let e = crate::scoring::pit_errors(u).unwrap();
            EvalRow { e_mu: Some(e.e_mu), e_sigma: Some(e.e_sigma), ..row(id, "m", 1.0, u.len()) }
        };
        let rep = EvalReport { rows: vec![mk(&u1, "a"), mk(&u2, "b")], ..Default::default() };
        let all: Vec<f64> = u1.iter().chain(&u2).copied().collect();
        let direct = crate::scoring::pit_errors(&all).unwrap();
        let s = &rep.season_summaries()[0];
        assert!((s.e_mu - direct.e_mu).abs() < 1e-14 && (s.e_sigma - direct.e_sigma).abs() < 1e-14);
    }
}
