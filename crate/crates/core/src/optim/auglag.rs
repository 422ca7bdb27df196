use super::NelderMead;
use crate::scalar::Scalar;

/// Powell-Hestenes-Rockafellar augmented Lagrangian for `min f(x)` subject to
/// `c_j(x) ≥ 0`, with each subproblem solved by Nelder-Mead.
#[derive(Debug, Clone, Copy)]
pub struct AugLag<T = f64> {
    pub inner: NelderMead<T>,
    pub initial_penalty: T,
    pub penalty_growth: T,
    pub max_outer: usize,
    /// Largest accepted violation `max(0, −c_j)`.
    pub constraint_tol: T,
}

#[derive(Debug, Clone)]
pub struct AugLagResult<T = f64> {
    pub x: Vec<T>,
    /// Unpenalised objective at `x`.
    pub f: T,
    /// Constraint values at `x`; non-negative means satisfied.
    pub constraints: Vec<T>,
    pub evaluations: usize,
    pub outer_iterations: usize,
    pub converged: bool,
}

impl<T: Scalar> Default for AugLag<T> {
    fn default() -> Self {
        Self {
            inner: NelderMead::default(),
            initial_penalty: T::lit(10.0),
            penalty_growth: T::lit(10.0),
            max_outer: 20,
            constraint_tol: T::lit(1e-8),
        }
    }
}

fn violation<T: Scalar>(c: &[T]) -> T {
    c.iter().fold(T::zero(), |acc, &v| if v.is_nan() { T::infinity() } else { acc.max(-v) })
}

impl<T: Scalar> AugLag<T> {
    /// `problem(x, c)` returns `f(x)` and writes the `n_constraints` constraint values into `c`.
    pub fn minimize<F>(&self, mut problem: F, n_constraints: usize, x0: &[T]) -> AugLagResult<T>
    where
        F: FnMut(&[T], &mut [T]) -> T,
    {
        let mut multipliers = vec![T::zero(); n_constraints];
        let mut penalty = self.initial_penalty;
        let mut cbuf = vec![T::zero(); n_constraints];
        let mut x = x0.to_vec();
        let mut evaluations = 0usize;
        let mut best_feasible: Option<(Vec<T>, T)> = None;
        let mut prev_violation = T::infinity();
        let mut prev_f = T::infinity();
        let mut converged = false;
        let mut outer = 0;
        let tol = self.constraint_tol;

        while outer < self.max_outer {
            outer += 1;
            let mu = multipliers.clone();
            let rho = penalty;
            let inner = self.inner.minimize(
                |z| {
                    let f = problem(z, &mut cbuf);
                    if !f.is_finite() {
                        return T::infinity();
                    }
                    let viol = violation(&cbuf);
                    if viol <= tol && best_feasible.as_ref().map_or(true, |(_, bf)| f < *bf) {
                        best_feasible = Some((z.to_vec(), f));
                    }
                    let mut lagr = f;
                    for (&m, &c) in mu.iter().zip(cbuf.iter()) {
                        let shifted = (m - rho * c).max(T::zero());
                        lagr = lagr + (shifted * shifted - m * m) / (T::lit(2.0) * rho);
                    }
                    lagr
                },
                &x,
            );
            evaluations += inner.evaluations;
            x = inner.x;
            let f = problem(&x, &mut cbuf);
            evaluations += 1;
            let viol = violation(&cbuf);
            for (m, &c) in multipliers.iter_mut().zip(cbuf.iter()) {
                *m = (*m - penalty * c).max(T::zero());
            }
            let stalled = (prev_f - f).abs() <= self.inner.ftol * (f.abs() + self.inner.ftol);
            if f.is_finite() && viol <= tol && inner.converged && stalled {
                converged = true;
                break;
            }
            if viol > tol && viol > T::lit(0.25) * prev_violation {
                penalty = penalty * self.penalty_growth;
            }
            prev_violation = viol;
            prev_f = f;
        }

        let mut f = problem(&x, &mut cbuf);
        evaluations += 1;
        let feasible_here = f.is_finite() && violation(&cbuf) <= tol;
        if let Some((bx, bf)) = best_feasible {
            if !feasible_here || bf < f {
                converged = converged && feasible_here;
                x = bx;
                f = problem(&x, &mut cbuf);
                evaluations += 1;
            }
        } else if !feasible_here {
            converged = false;
        }
        AugLagResult { x, f, constraints: cbuf, evaluations, outer_iterations: outer, converged }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn active_linear_constraint() {
        // min (x-2)^2 + (y-1)^2  s.t.  1 - x - y >= 0  → (1, 0)
        let al = AugLag::<f64>::default();
        let r = al.minimize(
            |z, c| {
                c[0] = 1.0 - z[0] - z[1];
                (z[0] - 2.0).powi(2) + (z[1] - 1.0).powi(2)
            },
            1,
            &[0.0, 0.0],
        );
        assert!((r.x[0] - 1.0).abs() < 1e-4 && r.x[1].abs() < 1e-4, "{:?}", r.x);
        assert!(r.constraints[0] >= -1e-8);
    }

    #[test]
    fn inactive_constraint_is_ignored() {
        let al = AugLag::<f64>::default();
        let r = al.minimize(
            |z, c| {
                c[0] = 10.0 - z[0];
                (z[0] - 1.0).powi(2) + (z[1] + 0.5).powi(2)
            },
            1,
            &[3.0, 3.0],
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] + 0.5).abs() < 1e-4);
    }

    #[test]
    fn unconstrained_problem() {
        let al = AugLag::<f64>::default();
        let r = al.minimize(|z, _| (z[0] - 4.0).abs() + (z[1] * z[1]), 0, &[0.0, 1.0]);
        assert!(r.converged);
        assert!((r.x[0] - 4.0).abs() < 1e-6);
    }
}
