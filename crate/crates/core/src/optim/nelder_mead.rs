use crate::scalar::Scalar;

/// Nelder-Mead simplex with the standard reflection/expansion/contraction/shrink coefficients.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead<T = f64> {
    /// Initial simplex offset along each coordinate.
    pub step: T,
    /// Relative spread of simplex function values at which the search stops.
    pub ftol: T,
    /// Absolute simplex diameter at which the search stops.
    pub xtol: T,
    pub max_evals: usize,
}

#[derive(Debug, Clone)]
pub struct Minimum<T = f64> {
    pub x: Vec<T>,
    pub f: T,
    pub evaluations: usize,
    pub converged: bool,
}

impl<T: Scalar> Default for NelderMead<T> {
    fn default() -> Self {
        Self { step: T::lit(0.1), ftol: T::lit(1e-8), xtol: T::lit(1e-10), max_evals: 5000 }
    }
}

impl<T: Scalar> NelderMead<T> {
    pub fn minimize<F>(&self, mut f: F, x0: &[T]) -> Minimum<T>
    where
        F: FnMut(&[T]) -> T,
    {
        let dim = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[T], evals: &mut usize| -> T {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                T::infinity()
            } else {
                v
            }
        };
        if dim == 0 {
            let v = eval(x0, &mut evals);
            return Minimum { x: Vec::new(), f: v, evaluations: evals, converged: true };
        }

        let (alpha, gamma, rho, sigma) = (T::one(), T::lit(2.0), T::lit(0.5), T::lit(0.5));
        let mut simplex: Vec<Vec<T>> = Vec::with_capacity(dim + 1);
        simplex.push(x0.to_vec());
        for i in 0..dim {
            let mut v = x0.to_vec();
            v[i] = v[i] + self.step;
            simplex.push(v);
        }
        let mut values: Vec<T> = simplex.iter().map(|v| eval(v, &mut evals)).collect();
        let mut order: Vec<usize> = (0..=dim).collect();
        let mut centroid = vec![T::zero(); dim];
        let mut trial = vec![T::zero(); dim];
        let mut trial2 = vec![T::zero(); dim];
        let mut converged = false;

        while evals < self.max_evals {
            order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
            let best = order[0];
            let worst = order[dim];
            let second_worst = order[dim - 1];
            let (fb, fw) = (values[best], values[worst]);

            if fb.is_finite() && fw.is_finite() {
                let spread = fw - fb;
                let scale = (fb.abs() + fw.abs()) * T::lit(0.5);
                let diameter = simplex
                    .iter()
                    .flat_map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (*a - *b).abs()))
                    .fold(T::zero(), T::max);
                if spread <= self.ftol * scale + self.ftol * self.ftol || diameter <= self.xtol {
                    converged = true;
                    break;
                }
            }

            for c in centroid.iter_mut() {
                *c = T::zero();
            }
            for &i in &order[..dim] {
                for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                    *c = *c + *v;
                }
            }
            let inv = T::one() / T::from_usize(dim).unwrap();
            for c in centroid.iter_mut() {
                *c = *c * inv;
            }

            for j in 0..dim {
                trial[j] = centroid[j] + alpha * (centroid[j] - simplex[worst][j]);
            }
            let fr = eval(&trial, &mut evals);

            if fr < fb {
                for j in 0..dim {
                    trial2[j] = centroid[j] + gamma * (trial[j] - centroid[j]);
                }
                let fe = eval(&trial2, &mut evals);
                if fe < fr {
                    simplex[worst].copy_from_slice(&trial2);
                    values[worst] = fe;
                } else {
                    simplex[worst].copy_from_slice(&trial);
                    values[worst] = fr;
                }
                continue;
            }
            if fr < values[second_worst] {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = fr;
                continue;
            }
            let outside = fr < fw;
            for j in 0..dim {
                trial2[j] = if outside {
                    centroid[j] + rho * (trial[j] - centroid[j])
                } else {
                    centroid[j] + rho * (simplex[worst][j] - centroid[j])
                };
            }
            let fc = eval(&trial2, &mut evals);
            if (outside && fc <= fr) || (!outside && fc < fw) {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = fc;
                continue;
            }
            // shrink towards the best vertex
            let anchor = simplex[best].clone();
            for &i in &order[1..] {
                for (v, a) in simplex[i].iter_mut().zip(&anchor) {
                    *v = *a + sigma * (*v - *a);
                }
                values[i] = eval(&simplex[i], &mut evals);
            }
        }

        let best = (0..=dim)
            .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap();
        Minimum { x: simplex[best].clone(), f: values[best], evaluations: evals, converged }
    }
}
