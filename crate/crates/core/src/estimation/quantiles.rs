use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered `(p, q)` pairs with `p` strictly increasing in `(0, 1)` and `q` nondecreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct QuantileSet {
    p: Vec<f64>,
    q: Vec<f64>,
}

impl QuantileSet {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::domain("quantile set is empty"));
        }
        for (i, &(p, q)) in pairs.iter().enumerate() {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::domain(format!("probability {p} at position {i} outside (0, 1)")));
            }
            if !q.is_finite() {
                return Err(Error::domain(format!("quantile value {q} at position {i} is not finite")));
            }
            if i > 0 {
                let (pp, pq) = pairs[i - 1];
                if p <= pp {
                    return Err(Error::domain(format!("probabilities not strictly increasing at position {i}")));
                }
                if q < pq {
                    return Err(Error::domain(format!("quantile values decrease at position {i}")));
                }
            }
        }
        let (p, q) = pairs.into_iter().unzip();
        Ok(Self { p, q })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn values(&self) -> &[f64] {
        &self.q
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.p.iter().copied().zip(self.q.iter().copied())
    }

    pub fn min_value(&self) -> f64 {
        self.q[0]
    }

    pub fn max_value(&self) -> f64 {
        self.q[self.q.len() - 1]
    }

    /// Piecewise-linear interpolation in `p`, flat beyond the outermost pairs.
    pub fn interpolate(&self, p: f64) -> f64 {
        let n = self.p.len();
        if p <= self.p[0] {
            return self.q[0];
        }
        if p >= self.p[n - 1] {
            return self.q[n - 1];
        }
        let j = self.p.partition_point(|&v| v <= p);
        let (p0, p1) = (self.p[j - 1], self.p[j]);
        let (q0, q1) = (self.q[j - 1], self.q[j]);
        q0 + (q1 - q0) * (p - p0) / (p1 - p0)
    }

    pub fn median(&self) -> f64 {
        self.interpolate(0.5)
    }

    pub fn iqr(&self) -> f64 {
        self.interpolate(0.75) - self.interpolate(0.25)
    }

    /// Keeps `m` pairs at evenly spaced ranks, always including both ends.
    pub fn thinned(&self, m: usize) -> Self {
        let n = self.len();
        if m >= n || m < 2 {
            return self.clone();
        }
        let idx: Vec<usize> = (0..m).map(|k| (k * (n - 1) + (m - 1) / 2) / (m - 1)).collect();
        let mut out = Self { p: Vec::with_capacity(m), q: Vec::with_capacity(m) };
        let mut last = usize::MAX;
        for i in idx {
            if i != last {
                out.p.push(self.p[i]);
                out.q.push(self.q[i]);
                last = i;
            }
        }
        out
    }
}

impl TryFrom<Vec<(f64, f64)>> for QuantileSet {
    type Error = Error;

    fn try_from(pairs: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(pairs)
    }
}

impl From<QuantileSet> for Vec<(f64, f64)> {
    fn from(qs: QuantileSet) -> Self {
        qs.p.into_iter().zip(qs.q).collect()
    }
}

/// Order statistics paired with plotting positions `p_i = (i − 0.5)/n`.
pub fn empirical_quantiles(y: &[f64]) -> Result<QuantileSet> {
    if y.len() < 2 {
        return Err(Error::domain(format!("need at least 2 observations, got {}", y.len())));
    }
    if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain(format!("observation {bad} is not finite")));
    }
    let mut q = y.to_vec();
    q.sort_by(f64::total_cmp);
    let n = q.len() as f64;
    let p = (0..q.len()).map(|i| (i as f64 + 0.5) / n).collect();
    Ok(QuantileSet { p, q })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_points() {
        let qs = empirical_quantiles(&[3.0, 1.0, 2.0]).unwrap();
        let pairs: Vec<_> = qs.pairs().collect();
        assert_eq!(pairs.len(), 3);
        for ((p, q), (ep, eq)) in pairs.into_iter().zip([(1.0 / 6.0, 1.0), (0.5, 2.0), (5.0 / 6.0, 3.0)]) {
            assert!((p - ep).abs() < 1e-15);
            assert_eq!(q, eq);
        }
    }

    #[test]
    fn constant_data() {
        let qs = empirical_quantiles(&[5.0; 4]).unwrap();
        assert_eq!(qs.probabilities(), &[0.125, 0.375, 0.625, 0.875]);
        assert!(qs.values().iter().all(|&v| v == 5.0));
        assert_eq!(qs.iqr(), 0.0);
    }

    #[test]
    fn median_and_iqr_by_interpolation() {
        let qs = empirical_quantiles(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(qs.median(), 2.5);
        assert_eq!(qs.iqr(), 2.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(empirical_quantiles(&[1.0]).is_err());
        assert!(QuantileSet::new(vec![(0.2, 1.0), (0.1, 2.0)]).is_err());
        assert!(QuantileSet::new(vec![(0.1, 2.0), (0.2, 1.0)]).is_err());
        assert!(QuantileSet::new(vec![(0.0, 1.0)]).is_err());
    }

    #[test]
    fn thinning_keeps_ends() {
        let y: Vec<f64> = (0..1000).map(f64::from).collect();
        let qs = empirical_quantiles(&y).unwrap().thinned(11);
        assert_eq!(qs.len(), 11);
        assert_eq!(qs.min_value(), 0.0);
        assert_eq!(qs.max_value(), 999.0);
    }

    #[test]
    fn json_roundtrip() {
        let qs = empirical_quantiles(&[1.0, 4.0, 2.0]).unwrap();
        let s = serde_json::to_string(&qs).unwrap();
        assert_eq!(serde_json::from_str::<QuantileSet>(&s).unwrap(), qs);
    }
}
