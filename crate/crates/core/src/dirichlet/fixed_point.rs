use std::time::Instant;

use crate::dirichlet::{
    free_columns, max_relative_change, DirichletParams, Fit, FitOptions, FitReport, PolyaLikelihood, TraceEntry,
    Algorithm,
};
use crate::error::{Error, Result};
use crate::matrix::CitationMatrix;
use crate::scalar::Real;
use crate::special::digamma_unchecked as psi;

/// One minorize-maximize update
///
/// ```text
/// γ_j ← γ_j · Σ_{i: j open} [ψ(c_ij+γ_j) − ψ(γ_j)] / Σ_{i: j open} [ψ(n_i+K_i) − ψ(K_i)]
/// ```
///
/// applied to the `free` columns simultaneously; the others are left as is.
pub(crate) fn mm_update<T: Real>(lik: &PolyaLikelihood<T>, gamma: &[T], free: &[usize], floor: T) -> Result<Vec<T>> {
    let k = lik.leave_out(gamma);
    let mut row_term = vec![T::zero(); lik.n()];
    for &i in lik.active_rows() {
        row_term[i] = psi(lik.row_totals()[i] + k[i]) - psi(k[i]);
    }
    let mut numer = vec![T::zero(); lik.n()];
    for &i in lik.active_rows() {
        for &(j, c) in lik.open_cells(i) {
            if c > T::zero() {
                numer[j] += psi(c + gamma[j]) - psi(gamma[j]);
            }
        }
    }
    let mut next = gamma.to_vec();
    for &j in free {
        let denom: T = lik.rows_of(j).iter().map(|&i| row_term[i]).sum();
        if !(denom > T::zero()) || !(numer[j] > T::zero()) {
            return Err(Error::DegenerateData(format!(
                "fixed-point ratio for column {j} is {}/{}",
                numer[j], denom
            )));
        }
        next[j] = (gamma[j] * numer[j] / denom).max(floor);
    }
    Ok(next)
}

/// Maximizes the marginal likelihood by the minorize-maximize fixed point.
/// The log-likelihood never decreases from one iterate to the next.
pub fn fit_fixed_point<T: Real>(m: &CitationMatrix, gamma0: &[T], opts: &FitOptions<T>) -> Result<Fit<T>> {
    let started = Instant::now();
    let lik = PolyaLikelihood::new(m);
    let (free, degenerate) = free_columns(&lik)?;
    let mut gamma: Vec<T> = gamma0.iter().map(|&g| g.max(opts.floor)).collect();
    degenerate.iter().for_each(|&j| gamma[j] = opts.floor);
    lik.check(&gamma)?;

    let mut trace = Vec::new();
    let mut loglik = lik.log_likelihood(&gamma)?;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let next = mm_update(&lik, &gamma, &free, opts.floor)?;
        let change = max_relative_change(&gamma, &next, opts.eps1);
        gamma = next;
        loglik = lik.log_likelihood(&gamma)?;
        trace.push(TraceEntry { loglik, change });
        if change < opts.eps2 {
            converged = true;
            break;
        }
    }
    let params = DirichletParams::for_matrix(gamma, m)?;
    opts.finish(Fit {
        params,
        report: FitReport {
            algorithm: Algorithm::FixedPoint,
            iterations,
            final_loglik: loglik,
            converged,
            elapsed_seconds: started.elapsed().as_secs_f64(),
            trace,
        },
    })
}
