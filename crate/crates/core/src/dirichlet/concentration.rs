use std::time::Instant;

use crate::dirichlet::{Algorithm, DirichletParams, Fit, FitOptions, FitReport, PolyaLikelihood, TraceEntry};
use crate::error::{Error, Result};
use crate::matrix::CitationMatrix;
use crate::scalar::Real;
use crate::special::digamma_unchecked as psi;

/// Fits `γ = K·π` for fixed prior shares `π` (normalized here to sum to one)
/// by the one-dimensional fixed point
///
/// ```text
/// K ← K · Σ_i Σ_{j open} π_j [ψ(c_ij+Kπ_j) − ψ(Kπ_j)] / Σ_i s_i [ψ(n_i+K·s_i) − ψ(K·s_i)]
/// ```
///
/// where `s_i` is the share mass open in row `i`.
pub fn fit_concentration_only<T: Real>(
    m: &CitationMatrix,
    shares: &[T],
    k0: T,
    opts: &FitOptions<T>,
) -> Result<Fit<T>> {
    let started = Instant::now();
    if shares.len() != m.n() {
        return Err(Error::LengthMismatch {
            expected: m.n(),
            found: shares.len(),
        });
    }
    if let Some(&bad) = shares.iter().find(|&&p| !(p > T::zero()) || !p.is_finite()) {
        return Err(Error::Domain {
            what: "prior share",
            value: bad.as_f64(),
        });
    }
    if !(k0 > T::zero()) || !k0.is_finite() {
        return Err(Error::Domain {
            what: "starting concentration",
            value: k0.as_f64(),
        });
    }
    let total: T = shares.iter().copied().sum();
    let pi: Vec<T> = shares.iter().map(|&p| p / total).collect();
    let lik = PolyaLikelihood::new(m);
    let open_share: Vec<T> = (0..m.n())
        .map(|i| lik.open_cells(i).iter().map(|&(j, _)| pi[j]).sum())
        .collect();

    let gamma_at = |k: T| -> Vec<T> { pi.iter().map(|&p| k * p).collect() };
    let mut k = k0;
    let mut loglik = lik.log_likelihood(&gamma_at(k))?;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut numer = T::zero();
        let mut denom = T::zero();
        for &i in lik.active_rows() {
            for &(j, c) in lik.open_cells(i) {
                if c > T::zero() {
                    let g = k * pi[j];
                    numer += pi[j] * (psi(c + g) - psi(g));
                }
            }
            let ks = k * open_share[i];
            denom += open_share[i] * (psi(lik.row_totals()[i] + ks) - psi(ks));
        }
        if !(numer > T::zero()) || !(denom > T::zero()) {
            return Err(Error::DegenerateData("no citations outside masked cells".into()));
        }
        let next = (k * numer / denom).max(opts.floor);
        let change = (next - k).abs() / (k.abs() + opts.eps1);
        k = next;
        loglik = lik.log_likelihood(&gamma_at(k))?;
        trace.push(TraceEntry { loglik, change });
        if change < opts.eps2 {
            converged = true;
            break;
        }
    }
    let params = DirichletParams::for_matrix(gamma_at(k), m)?;
    opts.finish(Fit {
        params,
        report: FitReport {
            algorithm: Algorithm::Concentration,
            iterations,
            final_loglik: loglik,
            converged,
            elapsed_seconds: started.elapsed().as_secs_f64(),
            trace,
        },
    })
}
