use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};
use serde::{Deserialize, Serialize};

use super::Design;
use crate::error::{Error, Result};

/// Coefficients of one linear quantile regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileFit {
    pub p: f64,
    pub beta: Vec<f64>,
}

const STEP_DAMPING: f64 = 0.9995;
const MAX_ITER: usize = 100;

/// Check loss `ρ_p(u) = u·(p − 1{u < 0})`.
#[inline]
pub fn check_loss(p: f64, u: f64) -> f64 {
    if u < 0.0 {
        (p - 1.0) * u
    } else {
        p * u
    }
}

/// Total check loss of `beta` on the design.
pub fn total_check_loss(design: &Design, p: f64, beta: &[f64]) -> f64 {
    (0..design.rows()).map(|i| check_loss(p, design.response()[i] - design.predict(i, beta))).sum()
}

/// Largest step in `[0, ∞)` keeping `v + t·dv ≥ 0`.
fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    v.iter()
        .zip(dv)
        .filter(|(_, d)| **d < 0.0)
        .map(|(x, d)| -x / d)
        .fold(f64::INFINITY, f64::min)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Factorisation of `Xᵀ diag(d) X`, reused for several right-hand sides.
enum NormalSystem {
    Cholesky(Cholesky<f64, Dyn>),
    Lu(LU<f64, Dyn, Dyn>),
}

impl NormalSystem {
    fn new(design: &Design, d: &[f64]) -> Option<Self> {
        let m = design.cols();
        let mut lower = vec![0.0; m * m];
        for (i, &di) in d.iter().enumerate() {
            let row = design.row(i);
            for (a, &xa) in row.iter().enumerate() {
                let ra = xa * di;
                for (acc, &xc) in lower[a * m..a * m + a + 1].iter_mut().zip(row) {
                    *acc += ra * xc;
                }
            }
        }
        let gram = DMatrix::from_fn(m, m, |a, c| if c <= a { lower[a * m + c] } else { lower[c * m + a] });
        match gram.clone().cholesky() {
            Some(ch) => Some(Self::Cholesky(ch)),
            None => Some(Self::Lu(gram.lu())),
        }
    }

    /// Solves for `v` given `rhs`, forming `Xᵀ rhs` internally.
    fn solve(&self, design: &Design, rhs: &[f64]) -> Option<DVector<f64>> {
        let mut b = DVector::<f64>::zeros(design.cols());
        for (i, &r) in rhs.iter().enumerate() {
            for (bj, xij) in b.iter_mut().zip(design.row(i)) {
                *bj += xij * r;
            }
        }
        match self {
            Self::Cholesky(ch) => Some(ch.solve(&b)),
            Self::Lu(lu) => lu.solve(&b),
        }
    }
}

fn require_full_rank(design: &Design) -> Result<()> {
    let m = design.cols();
    let mut gram = DMatrix::<f64>::zeros(m, m);
    for i in 0..design.rows() {
        let row = design.row(i);
        for a in 0..m {
            for c in 0..m {
                gram[(a, c)] += row[a] * row[c];
            }
        }
    }
    let sv = gram.singular_values();
    let max = sv.max();
    let min = sv.min();
    if !(min > 1e-10 * max) {
        return Err(Error::domain(format!("design matrix is rank deficient (singular values {max:.3e} .. {min:.3e})")));
    }
    Ok(())
}

/// Primal-dual interior point (Frisch-Newton with Mehrotra correction) on the
/// dual linear program `max yᵀa s.t. Xᵀa = (1 − p)Xᵀ1, 0 ≤ a ≤ 1`.
fn interior_point(design: &Design, p: f64) -> Result<Vec<f64>> {
    let n = design.rows();
    let yv = design.response();
    let ones = vec![1.0; n];
    let mut x = vec![1.0 - p; n];
    let mut s = vec![p; n];
    let rhs_b = {
        let m = design.cols();
        let mut b = vec![0.0; m];
        for i in 0..n {
            for (bj, xij) in b.iter_mut().zip(design.row(i)) {
                *bj += x[i] * xij;
            }
        }
        b
    };
    // dual start from least squares: c = −y, ydual = −β_ols
    let neg_y: Vec<f64> = yv.iter().map(|v| -v).collect();
    let mut ydual: Vec<f64> = NormalSystem::new(design, &ones)
        .and_then(|sys| sys.solve(design, &neg_y))
        .ok_or_else(|| Error::domain("design matrix is singular"))?
        .iter()
        .copied()
        .collect();
    let mut r: Vec<f64> = (0..n).map(|i| -yv[i] - design.predict(i, &ydual)).collect();
    // equal offsets keep z − w = r exactly while making both strictly positive
    let offset = 1e-3 * (1.0 + r.iter().map(|v| v.abs()).sum::<f64>() / n as f64);
    let mut z: Vec<f64> = r.iter().map(|v| v.max(0.0) + offset).collect();
    let mut w: Vec<f64> = r.iter().map(|v| (-v).max(0.0) + offset).collect();
    let scale = 1.0 + yv.iter().map(|v| v.abs()).sum::<f64>();
    let small = 1e-11 * scale;
    let gap_of = |x: &[f64], ydual: &[f64], w: &[f64]| dot(&neg_y, x) - dot(ydual, &rhs_b) + w.iter().sum::<f64>();
    let mut gap = gap_of(&x, &ydual, &w);

    let mut q = vec![0.0; n];
    let mut dx = vec![0.0; n];
    let mut ds = vec![0.0; n];
    let mut dz = vec![0.0; n];
    let mut dw = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut iter = 0;
    while gap > small && iter < MAX_ITER {
        iter += 1;
        for i in 0..n {
            q[i] = 1.0 / (z[i] / x[i] + w[i] / s[i]);
            r[i] = z[i] - w[i];
            rhs[i] = q[i] * r[i];
        }
        let system = NormalSystem::new(design, &q).ok_or_else(|| Error::Convergence("singular Newton system".into()))?;
        let dy = system.solve(design, &rhs).ok_or_else(|| Error::Convergence("singular Newton system".into()))?;
        for i in 0..n {
            dx[i] = q[i] * (design.predict(i, dy.as_slice()) - r[i]);
            ds[i] = -dx[i];
            dz[i] = -z[i] * (dx[i] / x[i] + 1.0);
            dw[i] = -w[i] * (ds[i] / s[i] + 1.0);
        }
        let mut fp = (STEP_DAMPING * max_step(&x, &dx).min(max_step(&s, &ds))).min(1.0);
        let mut fd = (STEP_DAMPING * max_step(&w, &dw).min(max_step(&z, &dz))).min(1.0);
        let mut dy = dy;
        if fp.min(fd) < 1.0 {
            let mu0 = dot(&z, &x) + dot(&w, &s);
            let mut g = 0.0;
            for i in 0..n {
                g += (z[i] + fd * dz[i]) * (x[i] + fp * dx[i]) + (w[i] + fd * dw[i]) * (s[i] + fp * ds[i]);
            }
            let mu = mu0 * (g / mu0).powi(3) / (2.0 * n as f64);
            let mut corr = vec![0.0; n];
            let mut xi = vec![0.0; n];
            for i in 0..n {
                let dxdz = dx[i] * dz[i];
                let dsdw = ds[i] * dw[i];
                xi[i] = mu * (1.0 / x[i] - 1.0 / s[i]);
                corr[i] = dxdz - dsdw;
                rhs[i] = q[i] * (r[i] + corr[i] - xi[i]);
            }
            dy = system.solve(design, &rhs).ok_or_else(|| Error::Convergence("singular Newton system".into()))?;
            for i in 0..n {
                let dxdz = dx[i] * dz[i];
                let dsdw = ds[i] * dw[i];
                let ndx = q[i] * (design.predict(i, dy.as_slice()) + xi[i] - r[i] - corr[i]);
                let nds = -ndx;
                dz[i] = mu / x[i] - z[i] - z[i] / x[i] * ndx - dxdz;
                dw[i] = mu / s[i] - w[i] - w[i] / s[i] * nds - dsdw;
                dx[i] = ndx;
                ds[i] = nds;
            }
            fp = (STEP_DAMPING * max_step(&x, &dx).min(max_step(&s, &ds))).min(1.0);
            fd = (STEP_DAMPING * max_step(&w, &dw).min(max_step(&z, &dz))).min(1.0);
        }
        for i in 0..n {
            x[i] += fp * dx[i];
            s[i] += fp * ds[i];
            w[i] += fd * dw[i];
            z[i] += fd * dz[i];
        }
        let previous = ydual.clone();
        for (yj, dj) in ydual.iter_mut().zip(dy.iter()) {
            *yj += fd * dj;
        }
        gap = gap_of(&x, &ydual, &w);
        if !gap.is_finite() || ydual.iter().any(|v| !v.is_finite()) {
            ydual = previous;
            break;
        }
    }
    Ok(ydual.iter().map(|v| -v).collect())
}

/// Moves an interior solution onto the vertex through the `k + 1` closest observations
/// when that does not increase the check loss.
fn polish_to_vertex(design: &Design, p: f64, beta: Vec<f64>) -> Vec<f64> {
    let m = design.cols();
    let n = design.rows();
    let y = design.response();
    let mut idx: Vec<usize> = (0..n).collect();
    let resid: Vec<f64> = (0..n).map(|i| (y[i] - design.predict(i, &beta)).abs()).collect();
    idx.sort_by(|&a, &b| resid[a].total_cmp(&resid[b]).then(a.cmp(&b)));
    let basis = &idx[..m];
    let a = DMatrix::from_fn(m, m, |r, c| design.row(basis[r])[c]);
    let b = DVector::from_iterator(m, basis.iter().map(|&i| y[i]));
    let Some(v) = a.lu().solve(&b) else { return beta };
    let vertex: Vec<f64> = v.iter().copied().collect();
    if vertex.iter().any(|c| !c.is_finite()) {
        return beta;
    }
    let old = total_check_loss(design, p, &beta);
    let new = total_check_loss(design, p, &vertex);
    if new <= old + 1e-12 * (1.0 + old.abs()) {
        vertex
    } else {
        beta
    }
}

/// Linear quantile regression at probability `p`.
pub fn fit_quantile_regression(design: &Design, p: f64) -> Result<QuantileFit> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("probability {p} outside (0, 1)")));
    }
    if design.rows() <= design.cols() {
        return Err(Error::domain(format!(
            "need more observations ({}) than coefficients ({})",
            design.rows(),
            design.cols()
        )));
    }
    require_full_rank(design)?;
    let beta = interior_point(design, p)?;
    let beta = polish_to_vertex(design, p, beta);
    Ok(QuantileFit { p, beta })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intercept_only_gives_order_statistic() {
        let y: Vec<f64> = (0..101).map(|i| ((i * 37) % 101) as f64 * 0.5).collect();
        let d = Design::intercept_only(y.clone()).unwrap();
        for p in [0.1, 0.25, 0.5, 0.9] {
            let fit = fit_quantile_regression(&d, p).unwrap();
            let mut s = y.clone();
            s.sort_by(f64::total_cmp);
            let k = ((p * 101.0).ceil() as usize).max(1) - 1;
            let best = total_check_loss(&d, p, &[s[k]]);
            assert!((total_check_loss(&d, p, &fit.beta) - best).abs() < 1e-9, "p={p}");
        }
    }

    #[test]
    fn rank_deficient_design() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let d = Design::new(&rows, &["a".into(), "b".into()], (0..20).map(f64::from).collect()).unwrap();
        assert!(fit_quantile_regression(&d, 0.5).is_err());
    }

    #[test]
    fn exact_line_is_recovered() {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..50).map(|i| 1.0 + 0.5 * i as f64).collect();
        let d = Design::new(&rows, &["x".into()], y).unwrap();
        let fit = fit_quantile_regression(&d, 0.3).unwrap();
        assert!(total_check_loss(&d, 0.3, &fit.beta) < 1e-9);
    }
}
