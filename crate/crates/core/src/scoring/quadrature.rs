use super::CrpsValue;
use crate::dist::{FpldNatural, SupportInterval};
use crate::error::{Error, Result};

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (7-point rule).
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 20_000;

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * KRONROD_WEIGHTS[7];
    let mut gauss = fc * GAUSS_WEIGHTS[3];
    for i in 0..7 {
        let dx = half * KRONROD_NODES[i];
        let s = f(centre - dx) + f(centre + dx);
        kronrod += KRONROD_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate falls below `abs_tol`.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!("quadrature needs finite bounds, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gauss_kronrod(&mut f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut total = v;
    let mut error = e;
    while error > abs_tol {
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::Convergence(format!(
                "adaptive quadrature on [{a}, {b}] stalled at error estimate {error:.3e} after {} intervals",
                intervals.len()
            )));
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, wv, we) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            // cannot split further in floating point; accept the estimate
            intervals.push((lo, hi, wv, 0.0));
            error -= we;
            continue;
        }
        let (lv, le) = gauss_kronrod(&mut f, lo, mid);
        let (rv, re) = gauss_kronrod(&mut f, mid, hi);
        total += lv + rv - wv;
        error += le + re - we;
        intervals.push((lo, mid, lv, le));
        intervals.push((mid, hi, rv, re));
        if !error.is_finite() || !total.is_finite() {
            return Err(Error::Convergence(format!("non-finite integrand on [{lo}, {hi}]")));
        }
    }
    // re-add in a fixed order so the result does not depend on the heap history
    intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(intervals.iter().map(|iv| iv.2).sum())
}

/// CRPS by direct quadrature of `∫ (F(t) − 1{t ≥ y})² dt`.
///
/// `range` must be finite: it is the region where `F` differs from 0 and 1
/// (for unbounded distributions, a truncation at extreme quantiles).
/// Outside the range the integrand is 0 on the side away from `y` and 1
/// between `y` and the range; both are handled exactly.
pub fn crps_quadrature<F: FnMut(f64) -> f64>(mut cdf: F, range: SupportInterval<f64>, y: f64) -> Result<CrpsValue> {
    if !(range.lower.is_finite() && range.upper.is_finite()) || range.lower >= range.upper {
        return Err(Error::domain(format!(
            "quadrature range must be finite and non-empty, got [{}, {}]",
            range.lower, range.upper
        )));
    }
    if !y.is_finite() {
        return Err(Error::domain(format!("observation must be finite, got {y}")));
    }
    const TOL: f64 = 1e-8;
    let (lo, hi) = (range.lower, range.upper);
    let mut total = 0.0;
    if y <= lo {
        total += lo - y;
        total += integrate_adaptive(|t| (cdf(t) - 1.0).powi(2), lo, hi, TOL)?;
    } else if y >= hi {
        total += y - hi;
        total += integrate_adaptive(|t| cdf(t).powi(2), lo, hi, TOL)?;
    } else {
        total += integrate_adaptive(|t| cdf(t).powi(2), lo, y, 0.5 * TOL)?;
        total += integrate_adaptive(|t| (cdf(t) - 1.0).powi(2), y, hi, 0.5 * TOL)?;
    }
    Ok(CrpsValue(total))
}

/// Quadrature CRPS for an FPLD forecast, integrated between the `1e−10` and
/// `1 − 1e−10` quantiles. Truncating finite supports too keeps the interval
/// short when a tail shape is tiny and the endpoint is astronomically far away.
pub fn crps_quadrature_fpld(params: &FpldNatural<f64>, y: f64) -> Result<CrpsValue> {
    const TAIL: f64 = 1e-10;
    let lower = params.quantile(TAIL)?;
    let upper = params.quantile(1.0 - TAIL)?;
    crps_quadrature(|t| params.cdf_from(t, 0.5), SupportInterval { lower, upper }, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate_adaptive(|x| 3.0 * x * x + 1.0, 0.0, 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_singularity() {
        let v = integrate_adaptive(|x: f64| x.sqrt(), 0.0, 1.0, 1e-10).unwrap();
        assert_abs_diff_eq!(v, 2.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn uniform_unit_interval() {
        let r = SupportInterval { lower: 0.0, upper: 1.0 };
        let v = crps_quadrature(|t: f64| t.clamp(0.0, 1.0), r, 0.5).unwrap();
        assert_abs_diff_eq!(v.value(), 1.0 / 12.0, epsilon = 1e-10);
    }

    #[test]
    fn grows_as_observation_moves_below_support() {
        let r = SupportInterval { lower: 0.0, upper: 1.0 };
        let cdf = |t: f64| t.clamp(0.0, 1.0);
        let mut last = crps_quadrature(cdf, r, 0.0).unwrap().value();
        for y in [-0.5, -1.0, -4.0] {
            let v = crps_quadrature(cdf, r, y).unwrap().value();
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn infinite_range_rejected() {
        let r = SupportInterval { lower: 0.0, upper: f64::INFINITY };
        assert!(crps_quadrature(|t: f64| t, r, 0.5).is_err());
    }
}
