//! Empirical-Bayes smoothing of the citation transition matrix and the
//! EBEF / EBPR scores built on it.
//!
//! With fitted `γ`, the posterior mean of the transition probability from
//! `i` to an open cell `j` is
//!
//! ```text
//! G*_ij = (c_ij + γ_j) / (n_i + K_i) = α_i·p_ij + (1 − α_i)·γ_j / K_i
//! ```
//!
//! so each row is shrunk towards the prior row `γ / K_i` by its own
//! `α_i = n_i / (n_i + K_i)`. Masked cells are exactly zero.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dirichlet::{
    fit_fixed_point, fit_inversion, fit_levenberg_marquardt, starting_gamma, DirichletParams, Fit, FitOptions,
    FitReport, StartingValue,
};
use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::markov::{stationary_distribution, PowerOptions, ScoreVector, TransitionMatrix};
use crate::matrix::{CitationMatrix, MaskPolicy};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothedMatrix<T> {
    rows: TransitionMatrix<T>,
    per_row_alpha: Vec<T>,
    prior_rows: SquareMatrix<T>,
}

impl<T: Real> SmoothedMatrix<T> {
    pub fn transition(&self) -> &TransitionMatrix<T> {
        &self.rows
    }

    pub fn rows(&self) -> &SquareMatrix<T> {
        self.rows.matrix()
    }

    pub fn per_row_alpha(&self) -> &[T] {
        &self.per_row_alpha
    }

    /// `γ_j / K_i` on open cells, zero on masked ones.
    pub fn prior_rows(&self) -> &SquareMatrix<T> {
        &self.prior_rows
    }

    pub fn into_transition(self) -> TransitionMatrix<T> {
        self.rows
    }
}

/// Posterior-mean transition matrix `G*` for counts `m` under prior `params`.
/// Rows without citations equal their prior row.
pub fn posterior_smoothing_matrix<T: Real>(
    m: &CitationMatrix,
    params: &DirichletParams<T>,
) -> Result<SmoothedMatrix<T>> {
    if params.mask() != m.mask() {
        return Err(Error::InvalidParameter(
            "Dirichlet parameters were fitted under a different mask than the matrix".into(),
        ));
    }
    let n = m.n();
    if params.gamma.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: params.gamma.len(),
        });
    }
    if let Some(&g) = params.gamma.iter().find(|g| !(**g > T::zero()) || !g.is_finite()) {
        return Err(Error::Domain {
            what: "hyperparameter",
            value: g.as_f64(),
        });
    }
    let gamma = &params.gamma;
    let counts = m.counts();
    let totals = m.row_totals();
    let mut rows = SquareMatrix::zeros(n);
    let mut prior_rows = SquareMatrix::zeros(n);
    let mut alpha = vec![T::zero(); n];
    let mut dangling = vec![false; n];
    for i in 0..n {
        let open: Vec<usize> = (0..n).filter(|&j| !m.is_masked(i, j)).collect();
        if open.is_empty() {
            return Err(Error::DegenerateData(format!("row `{}` has every cell masked", m.labels()[i])));
        }
        let k: T = open.iter().map(|&j| gamma[j]).sum();
        let total = T::from_count(totals.n[i]);
        let denom = total + k;
        for &j in &open {
            rows[(i, j)] = (T::from_count(counts[(i, j)]) + gamma[j]) / denom;
            prior_rows[(i, j)] = gamma[j] / k;
        }
        alpha[i] = total / denom;
        dangling[i] = totals.n[i] == 0;
    }
    Ok(SmoothedMatrix {
        rows: TransitionMatrix::new(m.labels().to_vec(), rows, dangling, m.mask().clone())?,
        per_row_alpha: alpha,
        prior_rows,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Optimizer {
    #[serde(rename = "fp")]
    Fp,
    #[serde(rename = "inv")]
    Inv,
    #[serde(rename = "lm")]
    Lm,
    /// Fixed point, then a Levenberg-Marquardt polish from its result. The
    /// fixed-point estimate is kept if the polish fails.
    #[default]
    #[serde(rename = "fp+lm")]
    FpThenLm,
}

impl FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fp" => Ok(Optimizer::Fp),
            "inv" => Ok(Optimizer::Inv),
            "lm" => Ok(Optimizer::Lm),
            "fp+lm" | "fp-lm" | "fplm" => Ok(Optimizer::FpThenLm),
            other => Err(Error::InvalidParameter(format!("unknown optimizer `{other}`"))),
        }
    }
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimizer::Fp => "fp",
            Optimizer::Inv => "inv",
            Optimizer::Lm => "lm",
            Optimizer::FpThenLm => "fp+lm",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EbOptions<T> {
    pub optimizer: Optimizer,
    pub start: StartingValue<T>,
    pub fit: FitOptions<T>,
    pub power: PowerOptions<T>,
}

impl<T: Real> Default for EbOptions<T> {
    fn default() -> Self {
        Self {
            optimizer: Optimizer::default(),
            start: StartingValue::Empirical,
            fit: FitOptions::default(),
            power: PowerOptions::default(),
        }
    }
}

/// Fits `γ` on `m` under its own mask with the configured optimizer.
pub fn fit_dirichlet<T: Real>(m: &CitationMatrix, opts: &EbOptions<T>) -> Result<Fit<T>> {
    let g0 = starting_gamma(m, &opts.start, opts.fit.floor)?;
    match opts.optimizer {
        Optimizer::Fp => fit_fixed_point(m, &g0, &opts.fit),
        Optimizer::Inv => fit_inversion(m, &g0, &opts.fit),
        Optimizer::Lm => fit_levenberg_marquardt(m, &g0, &opts.fit),
        Optimizer::FpThenLm => {
            let lenient = FitOptions {
                allow_unconverged: true,
                ..opts.fit
            };
            let fp = fit_fixed_point(m, &g0, &lenient)?;
            match fit_levenberg_marquardt(m, &fp.params.gamma, &opts.fit) {
                Ok(lm) => Ok(chain(fp.report, lm)),
                Err(_) => opts.fit.finish(fp),
            }
        }
    }
}

fn chain<T: Real>(first: FitReport<T>, second: Fit<T>) -> Fit<T> {
    let mut trace = first.trace;
    trace.extend(second.report.trace);
    Fit {
        params: second.params,
        report: FitReport {
            iterations: first.iterations + second.report.iterations,
            elapsed_seconds: first.elapsed_seconds + second.report.elapsed_seconds,
            trace,
            ..second.report
        },
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EbScore<T> {
    pub scores: ScoreVector<T>,
    pub params: DirichletParams<T>,
    pub report: FitReport<T>,
}

/// Stationary distribution of `G*` for given parameters (no fitting).
pub fn score_with_params<T: Real>(
    m: &CitationMatrix,
    params: &DirichletParams<T>,
    power: &PowerOptions<T>,
) -> Result<ScoreVector<T>> {
    let g = posterior_smoothing_matrix(m, params)?;
    stationary_distribution(g.transition(), power)
}

/// Fit and score under the mask already carried by `m`.
pub fn eb_score<T: Real>(m: &CitationMatrix, opts: &EbOptions<T>) -> Result<EbScore<T>> {
    let fit = fit_dirichlet(m, opts)?;
    let scores = score_with_params(m, &fit.params, &opts.power)?;
    Ok(EbScore {
        scores,
        params: fit.params,
        report: fit.report,
    })
}

/// EBEF: self-citations excluded as structural zeros.
pub fn ebef_score<T: Real>(m: &CitationMatrix, opts: &EbOptions<T>) -> Result<EbScore<T>> {
    eb_score(&m.with_mask_policy(MaskPolicy::Diagonal), opts)
}

/// EBPR: full Dirichlet over every column, self-citations included.
pub fn ebpr_score<T: Real>(m: &CitationMatrix, opts: &EbOptions<T>) -> Result<EbScore<T>> {
    eb_score(&m.with_mask_policy(MaskPolicy::None), opts)
}
