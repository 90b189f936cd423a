//! Deterministic nonlinear minimization: Polak-Ribiere conjugate gradients
//! with Armijo backtracking. Small, dependency-free, and reproducible, which
//! is all the likelihood fits here need.

use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct MinimizeOptions<T> {
    /// Stop when the gradient norm falls below this.
    pub gradient_tolerance: T,
    /// Stop when the accepted step norm falls below this.
    pub step_tolerance: T,
    pub max_iterations: usize,
}

impl<T: Real> Default for MinimizeOptions<T> {
    fn default() -> Self {
        Self {
            gradient_tolerance: T::of(1e-8),
            step_tolerance: T::of(1e-10),
            max_iterations: 5000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MinimizeResult<T> {
    pub x: Vec<T>,
    pub value: T,
    pub gradient_norm: T,
    pub iterations: usize,
    pub converged: bool,
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &x| a + x * x).sqrt()
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Minimize `f` starting from `x0` using its analytic gradient.
pub fn minimize<T, F, G>(f: F, grad: G, x0: Vec<T>, opts: &MinimizeOptions<T>) -> MinimizeResult<T>
where
    T: Real,
    F: Fn(&[T]) -> T,
    G: Fn(&[T]) -> Vec<T>,
{
    let n = x0.len();
    let mut x = x0;
    let mut fx = f(&x);
    let mut g = grad(&x);
    let mut d: Vec<T> = g.iter().map(|&v| -v).collect();
    let mut step_scale = T::one();
    let armijo = T::of(1e-4);

    for iter in 0..opts.max_iterations {
        let gnorm = norm(&g);
        if gnorm <= opts.gradient_tolerance {
            return MinimizeResult {
                x,
                value: fx,
                gradient_norm: gnorm,
                iterations: iter,
                converged: true,
            };
        }

        let mut slope = dot(&g, &d);
        if slope >= T::zero() {
            // Direction went uphill (conjugacy lost); steepest-descent restart.
            d = g.iter().map(|&v| -v).collect();
            slope = -gnorm * gnorm;
        }

        // Backtracking line search.
        let mut t = step_scale;
        let mut accepted = false;
        let mut x_new = x.clone();
        let mut f_new = fx;
        for _ in 0..48 {
            for i in 0..n {
                x_new[i] = x[i] + t * d[i];
            }
            f_new = f(&x_new);
            if f_new.is_finite() && f_new <= fx + armijo * t * slope {
                accepted = true;
                break;
            }
            t *= T::of(0.5);
        }
        if !accepted {
            return MinimizeResult {
                x,
                value: fx,
                gradient_norm: gnorm,
                iterations: iter,
                converged: gnorm <= opts.gradient_tolerance * T::of(100.0),
            };
        }

        let step_norm = t * norm(&d);
        let g_new = grad(&x_new);
        // Polak-Ribiere with non-negativity restart.
        let mut beta = (dot(&g_new, &g_new) - dot(&g_new, &g)) / dot(&g, &g);
        if !beta.is_finite() || beta < T::zero() || (iter + 1) % (4 * n) == 0 {
            beta = T::zero();
        }
        for i in 0..n {
            d[i] = -g_new[i] + beta * d[i];
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        // Reuse a slightly enlarged accepted step next iteration.
        step_scale = (t * T::of(2.0)).min(T::one());

        if step_norm <= opts.step_tolerance {
            return MinimizeResult {
                x,
                value: fx,
                gradient_norm: norm(&g),
                iterations: iter + 1,
                converged: true,
            };
        }
    }
    let gnorm = norm(&g);
    MinimizeResult {
        x,
        value: fx,
        gradient_norm: gnorm,
        iterations: opts.max_iterations,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl_converges() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + 10.0 * (x[1] + 1.0).powi(2);
        let g = |x: &[f64]| vec![2.0 * (x[0] - 3.0), 20.0 * (x[1] + 1.0)];
        let r = minimize(f, g, vec![0.0, 0.0], &MinimizeOptions::default());
        assert!(r.converged);
        assert!((r.x[0] - 3.0).abs() < 1e-6);
        assert!((r.x[1] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn rosenbrock_converges() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let g = |x: &[f64]| {
            vec![
                -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]),
                200.0 * (x[1] - x[0] * x[0]),
            ]
        };
        let opts = MinimizeOptions {
            max_iterations: 20000,
            ..Default::default()
        };
        let r = minimize(f, g, vec![-1.2, 1.0], &opts);
        assert!((r.x[0] - 1.0).abs() < 1e-4, "x = {:?}", r.x);
        assert!((r.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn runs_are_deterministic() {
        let f = |x: &[f64]| {
            x.iter()
                .enumerate()
                .map(|(i, v)| (i as f64 + 1.0) * v * v)
                .sum()
        };
        let g = |x: &[f64]| {
            x.iter()
                .enumerate()
                .map(|(i, v)| 2.0 * (i as f64 + 1.0) * v)
                .collect()
        };
        let x0 = vec![0.3, -0.7, 1.1, 0.05];
        let a = minimize(f, g, x0.clone(), &MinimizeOptions::default());
        let b = minimize(f, g, x0, &MinimizeOptions::default());
        assert_eq!(a.iterations, b.iterations);
        for (p, q) in a.x.iter().zip(b.x.iter()) {
            assert_eq!(p.to_bits(), q.to_bits());
        }
    }
}
