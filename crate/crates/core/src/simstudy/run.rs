use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampler::{sample_lambda_star_with, squared_error};
use crate::dist::FpldStar;
use crate::error::{Error, Result};
use crate::estimation::{fit, Estimator, FitConfig};
use crate::scoring::{skill_score, SkillMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub replicates: usize,
    /// Sample sizes `n = 2^e`.
    pub sample_size_exponents: Vec<u32>,
    pub estimators: Vec<Estimator>,
    pub seed: u64,
    pub skill_mode: SkillMode,
    /// Size of the independent evaluation sample drawn from each truth.
    pub mc_samples: usize,
    /// Reject truths with an unbounded right tail.
    pub strict_finite_support: bool,
    /// Estimator settings; the `estimator` field is overridden per fit.
    pub fit: FitConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            replicates: 500,
            sample_size_exponents: (7..=14).collect(),
            estimators: Estimator::ALL.to_vec(),
            seed: 1,
            skill_mode: SkillMode::Empirical,
            mc_samples: 1 << 14,
            strict_finite_support: false,
            fit: FitConfig::default(),
        }
    }
}

impl SimConfig {
    /// 50 replicates at `n = 2^7, …, 2^12`.
    pub fn desk_scale() -> Self {
        Self { replicates: 50, sample_size_exponents: (7..=12).collect(), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::domain("replicates must be at least 1"));
        }
        if self.sample_size_exponents.is_empty() || self.sample_size_exponents.iter().any(|&e| !(3..=24).contains(&e)) {
            return Err(Error::domain("sample size exponents must be nonempty and lie in 3..=24"));
        }
        if self.estimators.is_empty() {
            return Err(Error::domain("no estimators selected"));
        }
        if self.mc_samples == 0 {
            return Err(Error::domain("mc_samples must be positive"));
        }
        self.fit.validate()
    }

    fn sizes(&self) -> Vec<usize> {
        let mut e = self.sample_size_exponents.clone();
        e.sort_unstable();
        e.dedup();
        e.into_iter().map(|e| 1usize << e).collect()
    }
}

/// One estimator applied to one replicate at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub replicate: usize,
    pub n: usize,
    pub estimator: Estimator,
    /// `None` when the fit failed.
    pub skill: Option<f64>,
    pub mse: Option<f64>,
    #[serde(skip)]
    pub elapsed: Duration,
    pub converged: bool,
    pub truth: FpldStar<f64>,
    pub estimate: Option<FpldStar<f64>>,
    pub error: Option<String>,
}

impl SimRow {
    pub fn failed(&self) -> bool {
        self.skill.is_none()
    }
}

/// Means over the successful replicates of one `(estimator, n)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimCell {
    pub estimator: Estimator,
    pub n: usize,
    pub mean_skill: f64,
    pub mse: f64,
    pub mean_seconds: f64,
    pub included: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub rows: Vec<SimRow>,
    pub summary: Vec<SimCell>,
}

fn run_replicate(cfg: &SimConfig, replicate: usize, sizes: &[usize]) -> Result<Vec<SimRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(replicate as u64);
    let truth = sample_lambda_star_with(&mut rng, cfg.strict_finite_support)?;
    let nat = truth.to_natural();
    let largest = *sizes.last().unwrap();
    let sample = nat.sample_with(&mut rng, largest);
    let holdout = nat.sample_with(&mut rng, cfg.mc_samples);
    let mc_seed = cfg.seed ^ (replicate as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rows = Vec::with_capacity(sizes.len() * cfg.estimators.len());
    for &n in sizes {
        let y = &sample[..n];
        for &estimator in &cfg.estimators {
            let fit_cfg = FitConfig { estimator, ..cfg.fit.clone() };
            let started = Instant::now();
            let outcome = fit(y, &fit_cfg);
            let elapsed = started.elapsed();
            let mut row = SimRow {
                replicate,
                n,
                estimator,
                skill: None,
                mse: None,
                elapsed,
                converged: false,
                truth,
                estimate: None,
                error: None,
            };
            match outcome {
                Ok(res) => {
                    let score = skill_score(&res.params.to_natural(), &nat, &holdout, cfg.skill_mode, cfg.mc_samples, mc_seed);
                    match score {
                        Ok(s) if s.is_finite() && res.loss.is_finite() => {
                            row.skill = Some(s);
                            row.mse = Some(squared_error(&truth, &res.params));
                        }
                        Ok(s) => row.error = Some(format!("non-finite result (skill {s}, loss {})", res.loss)),
                        Err(e) => row.error = Some(e.to_string()),
                    }
                    row.converged = res.converged;
                    row.estimate = Some(res.params);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Runs every replicate, fitting each estimator at each sample size.
///
/// Samples for the smaller sizes are prefixes of the largest sample, and all
/// fits of a replicate are scored on the same independent draw of `mc_samples`
/// observations from the truth.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let sizes = cfg.sizes();
    let per_rep = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| run_replicate(cfg, r, &sizes))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<SimRow> = per_rep.into_iter().flatten().collect();
    let summary = summarise(&rows, &cfg.estimators, &sizes);
    Ok(SimReport { rows, summary })
}

/// Aggregates rows into one cell per `(estimator, n)`, in estimator then size order.
pub fn summarise(rows: &[SimRow], estimators: &[Estimator], sizes: &[usize]) -> Vec<SimCell> {
    let mut groups: BTreeMap<(usize, usize), Vec<&SimRow>> = BTreeMap::new();
    for r in rows {
        if let (Some(ei), Some(ni)) = (estimators.iter().position(|e| *e == r.estimator), sizes.iter().position(|n| *n == r.n)) {
            groups.entry((ei, ni)).or_default().push(r);
        }
    }
    groups
        .into_iter()
        .map(|((ei, ni), group)| {
            let ok: Vec<&SimRow> = group.iter().copied().filter(|r| !r.failed()).collect();
            let k = ok.len() as f64;
            let mean = |f: &dyn Fn(&SimRow) -> f64| if ok.is_empty() { f64::NAN } else { ok.iter().map(|r| f(r)).sum::<f64>() / k };
            SimCell {
                estimator: estimators[ei],
                n: sizes[ni],
                mean_skill: mean(&|r| r.skill.unwrap()),
                mse: mean(&|r| r.mse.unwrap()),
                mean_seconds: mean(&|r| r.elapsed.as_secs_f64()),
                included: ok.len(),
                excluded: group.len() - ok.len(),
            }
        })
        .collect()
}

impl SimReport {
    pub fn cell(&self, estimator: Estimator, n: usize) -> Option<&SimCell> {
        self.summary.iter().find(|c| c.estimator == estimator && c.n == n)
    }

    /// Table with one row per metric and estimator and one column per sample size.
    /// Skill is shown ×10³; the timing row is included only on request.
    pub fn summary_csv(&self, include_timings: bool) -> Result<String> {
        let mut sizes: Vec<usize> = self.summary.iter().map(|c| c.n).collect();
        sizes.sort_unstable();
        sizes.dedup();
        let mut estimators: Vec<Estimator> = Vec::new();
        for c in &self.summary {
            if !estimators.contains(&c.estimator) {
                estimators.push(c.estimator);
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["metric".to_string(), "estimator".to_string()];
        header.extend(sizes.iter().map(|n| format!("n={n}")));
        w.write_record(&header).map_err(csv_err)?;
        let mut metrics: Vec<(&str, fn(&SimCell) -> f64)> = vec![
            ("skill_x1e3", |c| c.mean_skill * 1e3),
            ("mse", |c| c.mse),
        ];
        if include_timings {
            metrics.push(("seconds", |c| c.mean_seconds));
        }
        metrics.push(("excluded", |c| c.excluded as f64));
        for (name, f) in metrics {
            for &e in &estimators {
                let mut rec = vec![name.to_string(), e.to_string()];
                for &n in &sizes {
                    rec.push(self.cell(e, n).map(|c| format_number(f(c))).unwrap_or_default());
                }
                w.write_record(&rec).map_err(csv_err)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::domain(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// All rows as JSON; `elapsed_ms` is attached only when timings are requested.
    pub fn rows_json(&self, include_timings: bool) -> serde_json::Value {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut v = serde_json::to_value(r).expect("rows serialise");
                if include_timings {
                    v["elapsed_ms"] = serde_json::json!(r.elapsed.as_secs_f64() * 1e3);
                }
                v
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::domain(format!("csv encoding failed: {e}"))
}

pub(crate) fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        String::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SimConfig {
        SimConfig {
            replicates: 2,
            sample_size_exponents: vec![6, 7],
            estimators: vec![Estimator::Mq],
            mc_samples: 512,
            ..SimConfig::default()
        }
    }

    #[test]
    fn deterministic_and_reaggregates() {
        let a = run_simulation(&tiny()).unwrap();
        let b = run_simulation(&tiny()).unwrap();
        assert_eq!(a.summary_csv(false).unwrap(), b.summary_csv(false).unwrap());
        assert_eq!(a.rows.len(), 4);
        for cell in &a.summary {
            let rows: Vec<_> = a.rows.iter().filter(|r| r.n == cell.n && !r.failed()).collect();
            let mean = rows.iter().map(|r| r.skill.unwrap()).sum::<f64>() / rows.len() as f64;
            assert!((mean - cell.mean_skill).abs() < 1e-15);
        }
    }

    #[test]
    fn csv_layout() {
        let rep = run_simulation(&tiny()).unwrap();
        let csv = rep.summary_csv(true).unwrap();
        let first = csv.lines().next().unwrap();
        assert_eq!(first, "metric,estimator,n=64,n=128");
        assert!(csv.lines().any(|l| l.starts_with("seconds,mq,")));
        assert!(!rep.summary_csv(false).unwrap().contains("seconds"));
    }
}
