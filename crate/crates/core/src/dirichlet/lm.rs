//! Levenberg-Marquardt maximization with the exact Hessian.
//!
//! Each iteration works on `A = −H`, which is positive definite near a
//! maximum, and solves
//!
//! ```text
//! (A + λD) Δ = ∇L,    D = diag(max(|A_jj|, ε))
//! ```
//!
//! by Cholesky. The step is scored with the gain ratio
//! `ρ = ΔL / (½ΔᵀAΔ + ½λΔᵀDΔ)`; a step with `ρ > 0` is accepted and shrinks
//! `λ` by `max(1/3, 1 − (2ρ−1)³)`, anything else doubles it. Iterates are
//! kept strictly positive by halving the step.

use std::time::Instant;

use crate::dirichlet::{free_columns, Algorithm, DirichletParams, Fit, FitOptions, FitReport, PolyaLikelihood, TraceEntry};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_inverse_diagonal, cholesky_solve, norm2, SquareMatrix};
use crate::matrix::CitationMatrix;
use crate::scalar::Real;

/// Twice-differentiable function to maximize over the positive orthant.
pub trait Objective<T> {
    fn dim(&self) -> usize;
    fn value(&self, x: &[T]) -> Result<T>;
    fn gradient(&self, x: &[T]) -> Result<Vec<T>>;
    fn hessian(&self, x: &[T]) -> Result<SquareMatrix<T>>;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmOptions<T> {
    pub lambda0: T,
    /// `λ` used when doubling from zero.
    pub lambda_floor: T,
    /// Lower bound on the damping diagonal.
    pub min_scale: T,
    pub max_escalations: usize,
    pub eps1: T,
    pub eps2: T,
    pub max_iter: usize,
}

impl<T: Real> Default for LmOptions<T> {
    fn default() -> Self {
        Self {
            lambda0: T::zero(),
            lambda_floor: T::lit(1e-3),
            min_scale: T::lit(1e-12),
            max_escalations: 50,
            eps1: T::lit(1e-8),
            eps2: T::attainable(1e-6),
            max_iter: 200,
        }
    }
}

impl<T: Real> LmOptions<T> {
    fn escalate(&self, lambda: T) -> T {
        (lambda + lambda).max(self.lambda_floor)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmOutcome<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
    pub lambda: T,
    /// One entry per accepted step.
    pub trace: Vec<TraceEntry<T>>,
}

/// Damping diagonal `max(|A_jj|, min_scale)`.
pub fn damping_diagonal<T: Real>(a: &SquareMatrix<T>, min_scale: T) -> Vec<T> {
    a.diagonal().into_iter().map(|v| v.abs().max(min_scale)).collect()
}

/// Solves `(A + λ·diag(d)) Δ = g`; `None` when the damped matrix is not
/// positive definite.
pub fn damped_step<T: Real>(a: &SquareMatrix<T>, d: &[T], lambda: T, g: &[T]) -> Option<Vec<T>> {
    let m = SquareMatrix::from_fn(a.n(), |i, j| if i == j { a[(i, j)] + lambda * d[i] } else { a[(i, j)] });
    let l = cholesky(&m)?;
    Some(cholesky_solve(&l, g))
}

/// `actual / (½ΔᵀAΔ + ½λΔᵀDΔ)`.
pub fn gain_ratio<T: Real>(actual: T, a: &SquareMatrix<T>, d: &[T], lambda: T, step: &[T]) -> T {
    let half = T::lit(0.5);
    let damp: T = step.iter().zip(d).map(|(&s, &w)| w * s * s).sum();
    actual / (half * a.quadratic_form(step) + half * lambda * damp)
}

pub fn maximize<T: Real, O: Objective<T> + ?Sized>(obj: &O, x0: &[T], opts: &LmOptions<T>) -> Result<LmOutcome<T>> {
    if x0.len() != obj.dim() {
        return Err(Error::LengthMismatch {
            expected: obj.dim(),
            found: x0.len(),
        });
    }
    let mut x = x0.to_vec();
    let mut value = obj.value(&x)?;
    let mut lambda = opts.lambda0;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let two = T::lit(2.0);

    while iterations < opts.max_iter {
        iterations += 1;
        let g = obj.gradient(&x)?;
        let a = obj.hessian(&x)?.map(|v| -v);
        let d = damping_diagonal(&a, opts.min_scale);

        let mut escalations = 0;
        let mut step = loop {
            if let Some(s) = damped_step(&a, &d, lambda, &g) {
                break s;
            }
            escalations += 1;
            if escalations > opts.max_escalations {
                return Err(Error::Singular(format!(
                    "damped Hessian not positive definite after {} increases of λ",
                    opts.max_escalations
                )));
            }
            lambda = opts.escalate(lambda);
        };
        for _ in 0..64 {
            if x.iter().zip(&step).all(|(&xi, &si)| xi + si > T::zero()) {
                break;
            }
            step.iter_mut().for_each(|s| *s /= two);
        }
        let candidate: Vec<T> = x.iter().zip(&step).map(|(&xi, &si)| xi + si).collect();
        if candidate.iter().any(|&c| !(c > T::zero())) {
            return Err(Error::NotConverged {
                what: "Levenberg-Marquardt positivity backtracking".into(),
                iterations,
            });
        }
        let change = norm2(&step) / (norm2(&x) + opts.eps1);
        let new_value = obj.value(&candidate).ok().filter(|v| v.is_finite());

        // a heavily damped step can be short far from any maximum, so the
        // undamped step has to be short as well, up to round-off
        let settled = change < opts.eps2
            && (lambda == T::zero()
                || damped_step(&a, &d, T::zero(), &g)
                    .is_some_and(|s| norm2(&s) / (norm2(&x) + opts.eps1) < opts.eps2.sqrt()));
        if settled {
            if let Some(v) = new_value {
                x = candidate;
                value = v;
                trace.push(TraceEntry { loglik: v, change });
            }
            converged = true;
            break;
        }
        let rho = match new_value {
            Some(v) => gain_ratio(v - value, &a, &d, lambda, &step),
            None => T::neg_infinity(),
        };
        if rho > T::zero() {
            x = candidate;
            value = new_value.unwrap_or(value);
            trace.push(TraceEntry { loglik: value, change });
            let t = two * rho - T::one();
            lambda *= (T::one() - t * t * t).max(T::one() / T::lit(3.0));
        } else {
            lambda = opts.escalate(lambda);
        }
    }
    Ok(LmOutcome {
        x,
        value,
        iterations,
        converged,
        lambda,
        trace,
    })
}

/// `L` restricted to a subset of coordinates, the rest held fixed.
struct Restricted<'a, T> {
    lik: &'a PolyaLikelihood<T>,
    base: Vec<T>,
    free: &'a [usize],
}

impl<T: Real> Restricted<'_, T> {
    fn expand(&self, x: &[T]) -> Vec<T> {
        let mut full = self.base.clone();
        for (&j, &v) in self.free.iter().zip(x) {
            full[j] = v;
        }
        full
    }
}

impl<T: Real> Objective<T> for Restricted<'_, T> {
    fn dim(&self) -> usize {
        self.free.len()
    }

    fn value(&self, x: &[T]) -> Result<T> {
        self.lik.log_likelihood(&self.expand(x))
    }

    fn gradient(&self, x: &[T]) -> Result<Vec<T>> {
        let g = self.lik.gradient(&self.expand(x))?;
        Ok(self.free.iter().map(|&j| g[j]).collect())
    }

    fn hessian(&self, x: &[T]) -> Result<SquareMatrix<T>> {
        let h = self.lik.hessian(&self.expand(x))?;
        Ok(SquareMatrix::from_fn(self.free.len(), |a, b| h[(self.free[a], self.free[b])]))
    }
}

/// Maximizes the marginal likelihood by Levenberg-Marquardt, starting from
/// `λ = 0`. Standard errors come from the inverse observed information over
/// the non-degenerate columns; degenerate columns get `NaN`.
pub fn fit_levenberg_marquardt<T: Real>(m: &CitationMatrix, gamma0: &[T], opts: &FitOptions<T>) -> Result<Fit<T>> {
    fit_levenberg_marquardt_with(
        m,
        gamma0,
        opts,
        &LmOptions {
            eps1: opts.eps1,
            eps2: opts.eps2,
            max_iter: opts.max_iter,
            ..LmOptions::default()
        },
    )
}

/// As [`fit_levenberg_marquardt`] with explicit damping settings; the
/// tolerances and iteration cap are taken from `lm`.
pub fn fit_levenberg_marquardt_with<T: Real>(
    m: &CitationMatrix,
    gamma0: &[T],
    opts: &FitOptions<T>,
    lm: &LmOptions<T>,
) -> Result<Fit<T>> {
    let started = Instant::now();
    let lik = PolyaLikelihood::new(m);
    let (free, degenerate) = free_columns(&lik)?;
    let mut base: Vec<T> = gamma0.iter().map(|&g| g.max(opts.floor)).collect();
    degenerate.iter().for_each(|&j| base[j] = opts.floor);
    lik.check(&base)?;

    let restricted = Restricted {
        lik: &lik,
        base: base.clone(),
        free: &free,
    };
    let x0: Vec<T> = free.iter().map(|&j| base[j]).collect();
    let out = maximize(&restricted, &x0, lm)?;
    let gamma: Vec<T> = restricted.expand(&out.x).into_iter().map(|g| g.max(opts.floor)).collect();

    let info = restricted.hessian(&out.x)?.map(|v| -v);
    let std_errors = cholesky(&info).map(|l| {
        let diag = cholesky_inverse_diagonal(&l);
        let mut se = vec![T::nan(); m.n()];
        for (&j, v) in free.iter().zip(diag) {
            se[j] = v.sqrt();
        }
        se
    });

    let mut params = DirichletParams::for_matrix(gamma, m)?;
    params.std_errors = std_errors;
    opts.finish(Fit {
        params,
        report: FitReport {
            algorithm: Algorithm::LevenbergMarquardt,
            iterations: out.iterations,
            final_loglik: out.value,
            converged: out.converged,
            elapsed_seconds: started.elapsed().as_secs_f64(),
            trace: out.trace,
        },
    })
}
