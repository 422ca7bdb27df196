use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{EvalReport, EvalRow, Pairing, PermutationRow, PitBinRow, QqRow};
use super::{SeasonalDataset, SeasonalStation};
use crate::dist::FpldStar;
use crate::error::{Error, Result};
use crate::estimation::{empirical_quantiles, fit, fit_gamma_ml, fit_lognormal_ml, Estimator, FitConfig};
use crate::scoring::{crps_fpld, permutation_test_crps, pit_errors, pit_values};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    Fpld,
    /// FPLD with `λ3` held at zero.
    FpldSym,
    Gamma,
    Lognormal,
}

impl Distribution {
    pub const ALL: [Distribution; 4] = [Distribution::Fpld, Distribution::FpldSym, Distribution::Gamma, Distribution::Lognormal];

    pub fn name(self) -> &'static str {
        match self {
            Distribution::Fpld => "fpld",
            Distribution::FpldSym => "fpld-sym",
            Distribution::Gamma => "gamma",
            Distribution::Lognormal => "lognormal",
        }
    }

    fn is_fpld(self) -> bool {
        matches!(self, Distribution::Fpld | Distribution::FpldSym)
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Distribution::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::domain(format!("unknown distribution '{s}' (expected fpld, fpld-sym, gamma or lognormal)")))
    }
}

/// Report label for a fitted model.
pub fn model_name(distribution: Distribution, estimator: Estimator) -> String {
    match distribution {
        Distribution::Fpld => format!("fpld-{}", estimator.name()),
        Distribution::FpldSym => format!("FPLD(λ3=0)-{}", estimator.name()),
        Distribution::Gamma => "gamma".to_string(),
        Distribution::Lognormal => "lognormal".to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarginalConfig {
    pub estimators: Vec<Estimator>,
    pub distributions: Vec<Distribution>,
    pub fit: FitConfig,
    pub pit_bins: usize,
    /// Emit the QQ and PIT histogram plot data.
    pub plot_data: bool,
}

impl Default for MarginalConfig {
    fn default() -> Self {
        Self {
            estimators: vec![Estimator::Mq],
            distributions: Distribution::ALL.to_vec(),
            fit: FitConfig { enforce_positive_support: true, ..FitConfig::default() },
            pit_bins: 10,
            plot_data: true,
        }
    }
}

impl MarginalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.distributions.is_empty() {
            return Err(Error::domain("at least one distribution is required"));
        }
        if self.distributions.iter().any(|d| d.is_fpld()) && self.estimators.is_empty() {
            return Err(Error::domain("FPLD fits need at least one estimator"));
        }
        if self.pit_bins == 0 {
            return Err(Error::domain("pit_bins must be positive"));
        }
        self.fit.validate()
    }

    fn models(&self) -> Vec<(Distribution, Estimator)> {
        let mut out = Vec::new();
        for &d in &self.distributions {
            if d.is_fpld() {
                out.extend(self.estimators.iter().map(|&e| (d, e)));
            } else {
                out.push((d, Estimator::Ml));
            }
        }
        out
    }
}

/// Scores and plot data for one fitted model at one station.
pub(crate) struct Evaluation {
    pub row: EvalRow,
    pub qq: Vec<QqRow>,
    pub pit_histogram: Vec<PitBinRow>,
}

const QQ_POINTS: usize = 99;

/// Evaluates `y` against a fitted distribution given by its CRPS, PIT values and quantile function.
pub(crate) fn evaluate(
    mut row: EvalRow,
    y: &[f64],
    scores: Vec<f64>,
    pit: &[f64],
    quantile: impl Fn(f64) -> f64,
    bins: usize,
    plot_data: bool,
) -> Result<Evaluation> {
    if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::domain(format!("non-finite CRPS value {bad}")));
    }
    let e = pit_errors(pit)?;
    row.mean_crps = Some(crate::scoring::pairwise_sum(&scores) / scores.len() as f64);
    row.e_mu = Some(e.e_mu);
    row.e_sigma = Some(e.e_sigma);
    row.scores = scores;
    let (mut qq, mut hist) = (Vec::new(), Vec::new());
    if plot_data {
        let emp = empirical_quantiles(y)?;
        qq = (1..=QQ_POINTS)
            .map(|k| {
                let p = k as f64 / (QQ_POINTS + 1) as f64;
                QqRow {
                    station_id: row.station_id.clone(),
                    season: row.season,
                    model: row.model.clone(),
                    p,
                    sample_quantile: emp.interpolate(p),
                    model_quantile: quantile(p),
                }
            })
            .collect();
        let mut counts = vec![0usize; bins];
        for &u in pit {
            counts[((u * bins as f64) as usize).min(bins - 1)] += 1;
        }
        hist = counts
            .into_iter()
            .enumerate()
            .map(|(b, count)| PitBinRow {
                station_id: row.station_id.clone(),
                season: row.season,
                model: row.model.clone(),
                lower: b as f64 / bins as f64,
                upper: (b + 1) as f64 / bins as f64,
                count,
            })
            .collect();
    }
    Ok(Evaluation { row, qq, pit_histogram: hist })
}

/// Scores an FPLD at the observations, filling in the parameter columns.
pub(crate) fn evaluate_fpld(
    row: EvalRow,
    y: &[f64],
    params: FpldStar<f64>,
    converged: bool,
    bins: usize,
    plot_data: bool,
) -> Result<Evaluation> {
    let nat = params.to_natural();
    let scores = y.iter().map(|&v| crps_fpld(&nat, v).map(|c| c.value())).collect::<Result<Vec<_>>>()?;
    let pit = pit_values(&nat, y)?;
    let row = EvalRow { params: Some(params), converged: Some(converged), ..row };
    evaluate(row, y, scores, &pit, |p| nat.quantile_unchecked(p), bins, plot_data)
}

fn fit_one(
    st: &SeasonalStation,
    season: super::Season,
    dist: Distribution,
    est: Estimator,
    cfg: &MarginalConfig,
) -> Result<Evaluation> {
    let y = &st.dtr;
    let row = EvalRow::pending(&st.station_id, season, &model_name(dist, est), st.dtr.len());
    let (bins, plot) = (cfg.pit_bins, cfg.plot_data);
    match dist {
        Distribution::Fpld | Distribution::FpldSym => {
            let mut fc = FitConfig { estimator: est, ..cfg.fit.clone() };
            if dist == Distribution::FpldSym {
                fc.fixed_lambda3 = Some(0.0);
            }
            let res = fit(y, &fc)?;
            evaluate_fpld(row, y, res.params, res.converged, bins, plot)
        }
        Distribution::Gamma => {
            let g = fit_gamma_ml(y)?;
            let scores = y.iter().map(|&v| g.crps(v)).collect();
            let pit: Vec<f64> = y.iter().map(|&v| g.cdf(v)).collect();
            evaluate(row, y, scores, &pit, |p| g.quantile(p), bins, plot)
        }
        Distribution::Lognormal => {
            let l = fit_lognormal_ml(y)?;
            let scores = y.iter().map(|&v| l.crps(v)).collect();
            let pit: Vec<f64> = y.iter().map(|&v| l.cdf(v)).collect();
            evaluate(row, y, scores, &pit, |p| l.quantile(p), bins, plot)
        }
    }
}

/// Collects per-task evaluations into a sorted report.
pub(crate) fn assemble(results: Vec<std::result::Result<Evaluation, EvalRow>>) -> EvalReport {
    let mut report = EvalReport::default();
    for r in results {
        match r {
            Ok(ev) => {
                report.rows.push(ev.row);
                report.qq.extend(ev.qq);
                report.pit_histogram.extend(ev.pit_histogram);
            }
            Err(row) => report.rows.push(row),
        }
    }
    report.sort();
    report
}

/// Fits every configured model to every station of the season. Failures are recorded per row.
pub fn run_marginal(dataset: &SeasonalDataset, cfg: &MarginalConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let season = dataset.season;
    let tasks: Vec<(&SeasonalStation, Distribution, Estimator)> = dataset
        .stations
        .iter()
        .flat_map(|st| cfg.models().into_iter().map(move |(d, e)| (st, d, e)))
        .collect();
    let results = tasks
        .into_par_iter()
        .map(|(st, d, e)| {
            fit_one(st, season, d, e, cfg).map_err(|err| {
                log::warn!("{} {season} {}: {err}", st.station_id, model_name(d, e));
                EvalRow::failed(&st.station_id, season, &model_name(d, e), st.dtr.len(), err.to_string())
            })
        })
        .collect();
    Ok(assemble(results))
}

/// Paired sign-flip tests of mean CRPS between every pair of models within each season.
///
/// Only stations where both models succeeded enter a comparison.
pub fn permutation_tests(report: &EvalReport, pairing: Pairing, n_perm: usize, seed: u64) -> Result<Vec<PermutationRow>> {
    let mut by_group: BTreeMap<(super::Season, &str), BTreeMap<&str, &EvalRow>> = BTreeMap::new();
    for r in report.rows.iter().filter(|r| r.is_ok()) {
        by_group.entry((r.season, r.model.as_str())).or_default().insert(r.station_id.as_str(), r);
    }
    let mut out = Vec::new();
    let keys: Vec<_> = by_group.keys().copied().collect();
    for (i, &(season, a)) in keys.iter().enumerate() {
        for &(season_b, b) in &keys[i + 1..] {
            if season_b != season {
                continue;
            }
            let (ra, rb) = (&by_group[&(season, a)], &by_group[&(season, b)]);
            let (mut xa, mut xb) = (Vec::new(), Vec::new());
            for (id, row_a) in ra {
                let Some(row_b) = rb.get(id) else { continue };
                match pairing {
                    Pairing::Station => {
                        xa.push(row_a.mean_crps.unwrap());
                        xb.push(row_b.mean_crps.unwrap());
                    }
                    Pairing::Observation => {
                        if row_a.scores.len() != row_b.scores.len() || row_a.scores.is_empty() {
                            return Err(Error::domain(format!(
                                "observation pairing needs per-observation scores for station '{id}'"
                            )));
                        }
                        xa.extend_from_slice(&row_a.scores);
                        xb.extend_from_slice(&row_b.scores);
                    }
                }
            }
            if xa.len() < 2 {
                continue;
            }
            let mean_difference = xa.iter().zip(&xb).map(|(u, v)| u - v).sum::<f64>() / xa.len() as f64;
            let p_value = permutation_test_crps(&xa, &xb, n_perm, seed)?;
            out.push(PermutationRow {
                season,
                model_a: a.to_string(),
                model_b: b.to_string(),
                pairing,
                mean_difference,
                p_value,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::Season;
    use crate::FpldNatural;

    fn dataset(stations: usize, n: usize) -> SeasonalDataset {
        let truth = FpldNatural::new(8.0, 3.0, 0.2, 0.3, 0.15).unwrap();
        SeasonalDataset {
            season: Season::Winter,
            stations: (0..stations)
                .map(|s| SeasonalStation {
                    station_id: format!("S{s}"),
                    dtr: truth.sample(n, 100 + s as u64),
                    covariates: None,
                })
                .collect(),
        }
    }

    #[test]
    fn names_parse() {
        for d in Distribution::ALL {
            assert_eq!(d.name().parse::<Distribution>().unwrap(), d);
        }
        assert_eq!(model_name(Distribution::FpldSym, Estimator::Mq), "FPLD(λ3=0)-mq");
    }

    #[test]
    fn one_row_per_station_and_model() {
        let ds = dataset(3, 400);
        let rep = run_marginal(&ds, &MarginalConfig::default()).unwrap();
        assert_eq!(rep.rows.len(), 12);
        assert!(rep.rows.iter().all(|r| r.is_ok()), "{:?}", rep.rows.iter().map(|r| &r.error).collect::<Vec<_>>());
        assert_eq!(rep.qq.len(), 12 * 99);
        assert_eq!(rep.pit_histogram.len(), 120);
        let sym = rep.rows.iter().find(|r| r.model.starts_with("FPLD(")).unwrap();
        assert_eq!(sym.params.unwrap().lambda3(), 0.0);
        let tests = permutation_tests(&rep, Pairing::Observation, 99, 1).unwrap();
        assert_eq!(tests.len(), 6);
        assert!(tests.iter().all(|t| t.p_value > 0.0 && t.p_value <= 1.0));
    }

    #[test]
    fn failure_is_recorded() {
        let mut ds = dataset(1, 200);
        ds.stations[0].dtr[0] = -1.0;
        let cfg = MarginalConfig { distributions: vec![Distribution::Gamma], ..Default::default() };
        let rep = run_marginal(&ds, &cfg).unwrap();
        assert!(rep.rows[0].error.is_some());
    }
}
