//! Marginal (Polya) log-likelihood of the row-wise Dirichlet-multinomial
//! model, with its gradient and Hessian in the hyperparameters `γ`.
//!
//! Row `i` draws its non-masked cells from a multinomial whose probabilities
//! follow `Dirichlet(γ_j : j not masked in row i)`. With
//! `K_i = Σ_{j open in i} γ_j` the row contributes
//!
//! ```text
//! L_i = lnΓ(K_i) − lnΓ(n_i + K_i) + Σ_j [lnΓ(c_ij + γ_j) − lnΓ(γ_j)]
//! ```
//!
//! The multinomial coefficient `n_i! / Π_j c_ij!` does not depend on `γ` and
//! is left out. Rows with `n_i = 0` contribute exactly zero, as do cells with
//! `c_ij = 0`, and both are skipped.

use crate::dirichlet::Objective;
use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::matrix::CitationMatrix;
use crate::scalar::Real;
use crate::special::{digamma_unchecked as psi, ln_gamma_unchecked as lgamma, trigamma_unchecked as psi1};

#[derive(Clone, Debug)]
pub struct PolyaLikelihood<T> {
    n: usize,
    /// Per row: open columns and their counts.
    open: Vec<Vec<(usize, T)>>,
    /// Rows with at least one citation.
    active: Vec<usize>,
    row_totals: Vec<T>,
    /// Per column: rows in which it is open.
    rows_of: Vec<Vec<usize>>,
    column_totals: Vec<u64>,
    mask: SquareMatrix<bool>,
}

impl<T: Real> PolyaLikelihood<T> {
    pub fn new(m: &CitationMatrix) -> Self {
        let n = m.n();
        let counts = m.counts();
        let open: Vec<Vec<(usize, T)>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| !m.is_masked(i, j))
                    .map(|j| (j, T::from_count(counts[(i, j)])))
                    .collect()
            })
            .collect();
        let totals = m.row_totals();
        let rows_of = (0..n)
            .map(|j| (0..n).filter(|&i| !m.is_masked(i, j)).collect())
            .collect();
        Self {
            n,
            open,
            active: (0..n).filter(|&i| totals.n[i] > 0).collect(),
            row_totals: totals.n.iter().map(|&t| T::from_count(t)).collect(),
            rows_of,
            column_totals: m.column_totals(),
            mask: m.mask().clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> &SquareMatrix<bool> {
        &self.mask
    }

    pub fn row_totals(&self) -> &[T] {
        &self.row_totals
    }

    /// Rows in which column `j` is open (not masked).
    pub fn rows_of(&self, j: usize) -> &[usize] {
        &self.rows_of[j]
    }

    /// `(j, c_ij)` for the open cells of row `i`.
    pub fn open_cells(&self, i: usize) -> &[(usize, T)] {
        &self.open[i]
    }

    pub fn active_rows(&self) -> &[usize] {
        &self.active
    }

    /// Columns with no citations in any open cell; their ML estimate is zero.
    pub fn degenerate_columns(&self) -> Vec<usize> {
        (0..self.n).filter(|&j| self.column_totals[j] == 0).collect()
    }

    pub fn check(&self, gamma: &[T]) -> Result<()> {
        if gamma.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: gamma.len(),
            });
        }
        match gamma.iter().find(|g| !(**g > T::zero()) || !g.is_finite()) {
            Some(g) => Err(Error::Domain {
                what: "Dirichlet hyperparameter",
                value: g.as_f64(),
            }),
            None => Ok(()),
        }
    }

    /// `K_i`, the prior mass over the open cells of each row.
    pub fn leave_out(&self, gamma: &[T]) -> Vec<T> {
        self.open
            .iter()
            .map(|cells| cells.iter().map(|&(j, _)| gamma[j]).sum())
            .collect()
    }

    pub fn log_likelihood(&self, gamma: &[T]) -> Result<T> {
        self.check(gamma)?;
        let mut total = T::zero();
        for &i in &self.active {
            let k = self.open[i].iter().map(|&(j, _)| gamma[j]).sum::<T>();
            let mut row = lgamma(k) - lgamma(self.row_totals[i] + k);
            for &(j, c) in &self.open[i] {
                if c > T::zero() {
                    row += lgamma(c + gamma[j]) - lgamma(gamma[j]);
                }
            }
            total += row;
        }
        Ok(total)
    }

    pub fn gradient(&self, gamma: &[T]) -> Result<Vec<T>> {
        self.check(gamma)?;
        let k = self.leave_out(gamma);
        let mut grad = vec![T::zero(); self.n];
        for &i in &self.active {
            let shared = psi(k[i]) - psi(self.row_totals[i] + k[i]);
            for &(j, c) in &self.open[i] {
                grad[j] += shared;
                if c > T::zero() {
                    grad[j] += psi(c + gamma[j]) - psi(gamma[j]);
                }
            }
        }
        Ok(grad)
    }

    /// Symmetric by construction: `H_jk` and `H_kj` accumulate the same terms
    /// in the same order.
    pub fn hessian(&self, gamma: &[T]) -> Result<SquareMatrix<T>> {
        self.check(gamma)?;
        let k = self.leave_out(gamma);
        let mut h = SquareMatrix::zeros(self.n);
        for &i in &self.active {
            let w = psi1(k[i]) - psi1(self.row_totals[i] + k[i]);
            for &(j, c) in &self.open[i] {
                for &(l, _) in &self.open[i] {
                    h[(j, l)] += w;
                }
                if c > T::zero() {
                    h[(j, j)] += psi1(c + gamma[j]) - psi1(gamma[j]);
                }
            }
        }
        Ok(h)
    }
}

impl<T: Real> Objective<T> for PolyaLikelihood<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[T]) -> Result<T> {
        self.log_likelihood(x)
    }

    fn gradient(&self, x: &[T]) -> Result<Vec<T>> {
        PolyaLikelihood::gradient(self, x)
    }

    fn hessian(&self, x: &[T]) -> Result<SquareMatrix<T>> {
        PolyaLikelihood::hessian(self, x)
    }
}

/// `Σ_i L_i` at `γ`; the multinomial coefficient is excluded.
pub fn marginal_log_likelihood<T: Real>(m: &CitationMatrix, gamma: &[T]) -> Result<T> {
    PolyaLikelihood::new(m).log_likelihood(gamma)
}

/// `∂L/∂γ_j = Σ_{i: j open} [ψ(K_i) − ψ(n_i+K_i) + ψ(c_ij+γ_j) − ψ(γ_j)]`.
pub fn gradient<T: Real>(m: &CitationMatrix, gamma: &[T]) -> Result<Vec<T>> {
    PolyaLikelihood::new(m).gradient(gamma)
}

pub fn hessian<T: Real>(m: &CitationMatrix, gamma: &[T]) -> Result<SquareMatrix<T>> {
    PolyaLikelihood::new(m).hessian(gamma)
}
