use std::time::Instant;

use crate::dirichlet::{
    free_columns, max_relative_change, Algorithm, DirichletParams, Fit, FitOptions, FitReport, PolyaLikelihood,
    TraceEntry,
};
use crate::error::{Error, Result};
use crate::matrix::CitationMatrix;
use crate::scalar::Real;
use crate::special::{digamma_unchecked as psi, inverse_digamma};

/// One inversion sweep: every free `γ_j` solves
///
/// ```text
/// ψ(γ_j) = (1/m_j) Σ_{i active, j open} [ψ(K_i) − ψ(n_i+K_i) + ψ(c_ij+γ_j)]
/// ```
///
/// with the right-hand side evaluated at the current iterate.
pub(crate) fn inversion_update<T: Real>(
    lik: &PolyaLikelihood<T>,
    gamma: &[T],
    free: &[usize],
    floor: T,
) -> Result<Vec<T>> {
    let n = lik.n();
    let k = lik.leave_out(gamma);
    let mut rhs = vec![T::zero(); n];
    let mut rows = vec![0usize; n];
    for &i in lik.active_rows() {
        let shift = psi(k[i]) - psi(lik.row_totals()[i] + k[i]);
        for &(j, c) in lik.open_cells(i) {
            rhs[j] += shift + psi(c + gamma[j]);
            rows[j] += 1;
        }
    }
    let tol = T::epsilon() * T::lit(16.0);
    let mut next = gamma.to_vec();
    for &j in free {
        if rows[j] == 0 {
            return Err(Error::DegenerateData(format!("column {j} is open in no cited row")));
        }
        let target = rhs[j] / T::from_len(rows[j]);
        next[j] = inverse_digamma(target, gamma[j], tol)?.value.max(floor);
    }
    Ok(next)
}

/// Maximizes the marginal likelihood by repeated digamma inversion.
pub fn fit_inversion<T: Real>(m: &CitationMatrix, gamma0: &[T], opts: &FitOptions<T>) -> Result<Fit<T>> {
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
        let next = inversion_update(&lik, &gamma, &free, opts.floor)?;
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
            algorithm: Algorithm::Inversion,
            iterations,
            final_loglik: loglik,
            converged,
            elapsed_seconds: started.elapsed().as_secs_f64(),
            trace,
        },
    })
}
