//! Finite-difference quasi-Newton minimisation and numerical Hessians.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stop when every gradient component is at most this in magnitude.
    pub gtol: f64,
    /// Stop when an accepted step improves the objective by at most
    /// `ftol * (1 + |f|)`.
    pub ftol: f64,
    /// Relative finite-difference step.
    pub rel_step: f64,
    /// Absolute floor of the finite-difference step.
    pub abs_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            gtol: 1e-5,
            ftol: 1e-10,
            rel_step: 1e-4,
            abs_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    Converged,
    MaxIter,
    LineSearchFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub convergence: Convergence,
}

/// The objective was not finite at the starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct NonFiniteStart {
    pub x: Vec<f64>,
    pub value: f64,
}

pub fn fd_step(x: f64, rel: f64, abs: f64) -> f64 {
    (rel * x.abs()).max(abs)
}

/// Central-difference gradient.
pub fn central_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], rel: f64, abs: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = fd_step(x[i], rel, abs);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Hessian; symmetric by construction.
pub fn central_hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], rel: f64, abs: f64) -> DMatrix<f64> {
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|&v| fd_step(v, rel, abs)).collect();
    let f0 = f(x);
    let mut probe = x.to_vec();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        probe[i] = x[i] + h[i];
        let up = f(&probe);
        probe[i] = x[i] - h[i];
        let down = f(&probe);
        probe[i] = x[i];
        out[(i, i)] = (up - 2.0 * f0 + down) / (h[i] * h[i]);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| {
                probe[i] = x[i] + si * h[i];
                probe[j] = x[j] + sj * h[j];
                let v = f(&probe);
                probe[i] = x[i];
                probe[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0))
                / (4.0 * h[i] * h[j]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// BFGS with finite-difference gradients and a backtracking Armijo line
/// search. Non-finite trial values are treated as rejections.
pub fn minimize<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    opts: &BfgsOptions,
) -> Result<Minimum, NonFiniteStart> {
    let n = x0.len();
    let mut evaluations = 0usize;
    let eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        f(x)
    };

    let mut x = DVector::from_column_slice(x0);
    let mut fx = eval(x.as_slice(), &mut evaluations);
    if !fx.is_finite() {
        return Err(NonFiniteStart {
            x: x0.to_vec(),
            value: fx,
        });
    }
    let grad = |x: &DVector<f64>, count: &mut usize| {
        *count += 2 * n;
        DVector::from_vec(central_gradient(&f, x.as_slice(), opts.rel_step, opts.abs_step))
    };
    let mut g = grad(&x, &mut evaluations);
    let identity_scale = |g: &DVector<f64>| 1.0 / g.amax().max(1.0);
    let mut hinv = DMatrix::identity(n, n) * identity_scale(&g);
    let mut fresh = true;
    let mut iterations = 0;
    let mut convergence = Convergence::MaxIter;

    loop {
        if !g.iter().all(|v| v.is_finite()) {
            convergence = Convergence::LineSearchFailure;
            break;
        }
        if g.amax() <= opts.gtol {
            convergence = Convergence::Converged;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let mut direction = -(&hinv * &g);
        let mut slope = g.dot(&direction);
        if slope >= 0.0 {
            hinv = DMatrix::identity(n, n) * identity_scale(&g);
            fresh = true;
            direction = -(&hinv * &g);
            slope = g.dot(&direction);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let trial = &x + &direction * step;
            let ft = eval(trial.as_slice(), &mut evaluations);
            if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            if fresh {
                convergence = Convergence::LineSearchFailure;
                break;
            }
            hinv = DMatrix::identity(n, n) * identity_scale(&g);
            fresh = true;
            continue;
        };

        let g_new = grad(&x_new, &mut evaluations);
        let s = &x_new - &x;
        let y = &g_new - &g;
        let improvement = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;

        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if fresh {
                // Rescale the initial inverse Hessian before the first update.
                hinv = DMatrix::identity(n, n) * (sy / y.dot(&y));
            }
            let rho = 1.0 / sy;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            hinv += (&s * s.transpose()) * (rho * rho * yhy + rho)
                - (&hy * s.transpose() + &s * hy.transpose()) * rho;
            fresh = false;
        }

        if improvement <= opts.ftol * (1.0 + fx.abs()) {
            convergence = Convergence::Converged;
            break;
        }
    }

    Ok(Minimum {
        x: x.as_slice().to_vec(),
        f: fx,
        gradient: g.as_slice().to_vec(),
        iterations,
        evaluations,
        convergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimises_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = BfgsOptions {
            max_iter: 500,
            gtol: 1e-7,
            ftol: 0.0,
            ..Default::default()
        };
        let m = minimize(rosen, &[-1.2, 1.0], &opts).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-4, "{:?}", m);
        assert!((m.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn stationary_start_takes_no_iterations() {
        let quad = |x: &[f64]| 3.0 * (x[0] - 2.0).powi(2) + (x[1] + 1.0).powi(2);
        let m = minimize(quad, &[2.0, -1.0], &BfgsOptions::default()).unwrap();
        assert_eq!(m.iterations, 0);
        assert_eq!(m.convergence, Convergence::Converged);
    }

    #[test]
    fn non_finite_start_is_reported() {
        let err = minimize(|_: &[f64]| f64::NAN, &[0.0], &BfgsOptions::default()).unwrap_err();
        assert!(err.value.is_nan());
    }

    #[test]
    fn never_worse_than_start() {
        let bumpy = |x: &[f64]| (3.0 * x[0]).sin() + 0.1 * x[0] * x[0] + (x[1] - 0.5).abs();
        let start = [1.3, 4.0];
        let m = minimize(bumpy, &start, &BfgsOptions::default()).unwrap();
        assert!(m.f <= bumpy(&start));
    }

    #[test]
    fn hessian_of_quadratic() {
        let q = |x: &[f64]| 0.5 * (4.0 * x[0] * x[0] + 2.0 * x[0] * x[1] + 3.0 * x[1] * x[1]);
        let h = central_hessian(&q, &[0.7, -0.2], 1e-4, 1e-6);
        assert!((h[(0, 0)] - 4.0).abs() < 1e-4);
        assert!((h[(0, 1)] - 1.0).abs() < 1e-4);
        assert!((h[(1, 1)] - 3.0).abs() < 1e-4);
    }
}
