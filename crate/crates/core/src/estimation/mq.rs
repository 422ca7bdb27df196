use std::time::Instant;

use super::driver::{optimise, Constraints};
use super::{FitConfig, FitResult, QuantileSet};
use crate::dist::{FpldNatural, FpldStar};
use crate::error::Result;

/// `Σ |q_i − Q(p_i)|` over the pairs of `qs`.
pub fn mq_loss(params: &FpldStar<f64>, qs: &QuantileSet) -> f64 {
    MqTargets::new(qs).loss(&params.to_natural())
}

/// Quantile targets with the logarithms of `p` and `1 − p` precomputed.
pub(crate) struct MqTargets {
    log_p: Vec<f64>,
    log_1mp: Vec<f64>,
    q: Vec<f64>,
}

impl MqTargets {
    pub(crate) fn new(qs: &QuantileSet) -> Self {
        let p = qs.probabilities();
        Self {
            log_p: p.iter().map(|v| v.ln()).collect(),
            log_1mp: p.iter().map(|v| (-v).ln_1p()).collect(),
            q: qs.values().to_vec(),
        }
    }

    pub(crate) fn loss(&self, nat: &FpldNatural<f64>) -> f64 {
        let mut total = 0.0;
        for ((&lp, &lq), &q) in self.log_p.iter().zip(&self.log_1mp).zip(&self.q) {
            total += (q - nat.quantile_from_logs(lp, lq)).abs();
        }
        total
    }
}

/// Outcome of the initial grid search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSearch {
    pub init: FpldStar<f64>,
    pub loss: f64,
    pub evaluations: usize,
}

/// Median and inter-quartile range to anchor the grid, guarding a zero IQR.
pub(crate) fn anchor(qs: &QuantileSet) -> (f64, f64) {
    let mut iqr = qs.iqr();
    if !(iqr > 0.0) {
        iqr = qs.max_value() - qs.min_value();
    }
    if !(iqr > 0.0) {
        iqr = 1.0;
    }
    (qs.median(), iqr)
}

/// Grid search over `(λ3, λ4, λ5)` at the empirical median and IQR; only
/// candidates for which `admissible` holds are considered.
pub(crate) fn grid_search_where<P>(qs: &QuantileSet, cfg: &FitConfig, mut admissible: P) -> Option<GridSearch>
where
    P: FnMut(&FpldNatural<f64>) -> bool,
{
    let (median, iqr) = anchor(qs);
    let targets = MqTargets::new(qs);
    let mut best: Option<GridSearch> = None;
    let mut evaluations = 0;
    for &l3 in &cfg.lambda3_grid() {
        for &l4 in &cfg.grid_lambda4 {
            for &l5 in &cfg.grid_lambda5 {
                let star = FpldStar::new_unchecked(median, iqr, l3, l4, l5);
                let nat = star.to_natural();
                if !admissible(&nat) {
                    continue;
                }
                let loss = targets.loss(&nat);
                evaluations += 1;
                if best.map_or(true, |b| loss < b.loss) {
                    best = Some(GridSearch { init: star, loss, evaluations: 0 });
                }
            }
        }
    }
    best.map(|b| GridSearch { evaluations, ..b })
}

pub fn grid_search(qs: &QuantileSet, cfg: &FitConfig) -> Result<GridSearch> {
    cfg.validate()?;
    Ok(grid_search_where(qs, cfg, |_| true).expect("validated grids are nonempty"))
}

/// Starting point for the optimizers: the grid combination with the smallest quantile loss.
pub fn grid_search_init(qs: &QuantileSet, cfg: &FitConfig) -> Result<FpldStar<f64>> {
    grid_search(qs, cfg).map(|g| g.init)
}

/// Method-of-quantiles fit.
pub fn fit_mq(qs: &QuantileSet, cfg: &FitConfig) -> Result<FitResult> {
    let started = Instant::now();
    cfg.validate()?;
    let thinned;
    let qs = match cfg.mq_thinning {
        Some(m) if m < qs.len() => {
            thinned = qs.thinned(m);
            &thinned
        }
        _ => qs,
    };
    let init = grid_search(qs, cfg)?.init;
    let mut constraints = Constraints::for_config(cfg);
    if cfg.data_bracket_constraints {
        constraints = constraints.with_bracket(qs.min_value(), qs.max_value());
    }
    let targets = MqTargets::new(qs);
    optimise(cfg, &init, constraints, |nat| targets.loss(nat), started)
}
