//! Empirical-Bayes estimation of the Dirichlet hyperparameters `γ` by
//! maximizing the marginal Polya likelihood.
//!
//! Three optimizers are provided: the minorize-maximize fixed point
//! ([`fit_fixed_point`]), digamma inversion ([`fit_inversion`]) and
//! Levenberg-Marquardt on the exact Hessian ([`fit_levenberg_marquardt`]),
//! plus a one-dimensional fit of the concentration `K` with fixed prior
//! shares ([`fit_concentration_only`]).
//!
//! Sign convention: the per-row derivative is
//! `∂L_i/∂γ_j = ψ(K_i) − ψ(n_i+K_i) + ψ(c_ij+γ_j) − ψ(γ_j)` for open `j`.
//! Finite differences of the likelihood confirm these signs; a display with
//! all four terms added is not the derivative of `L_i`.

mod concentration;
mod fixed_point;
mod inversion;
mod likelihood;
pub mod lm;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use concentration::fit_concentration_only;
pub use fixed_point::fit_fixed_point;
pub use inversion::fit_inversion;
pub use likelihood::{gradient, hessian, marginal_log_likelihood, PolyaLikelihood};
pub use lm::{fit_levenberg_marquardt, Objective};

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::matrix::{CitationMatrix, MaskPolicy};
use crate::scalar::Real;

/// Fitted (or preset) Dirichlet prior bound to a citation matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirichletParams<T> {
    pub gamma: Vec<T>,
    /// `K = Σ_j γ_j`.
    #[serde(rename = "K")]
    pub concentration: T,
    /// `K_i`, the prior mass over the open cells of row `i` (`K − γ_i` when
    /// only the diagonal is masked).
    #[serde(rename = "K_leave")]
    pub leave_out: Vec<T>,
    /// Per-row damping `α_i = n_i / (n_i + K_i)`; zero for dangling rows.
    #[serde(rename = "alpha")]
    pub damping: Vec<T>,
    pub std_errors: Option<Vec<T>>,
    /// True when some cells are structural zeros.
    pub mask_aware: bool,
    /// Columns with no citations in open cells, held at the floor value.
    pub degenerate_columns: Vec<usize>,
    #[serde(skip)]
    mask: SquareMatrix<bool>,
}

impl<T: Real> DirichletParams<T> {
    pub fn for_matrix(gamma: Vec<T>, m: &CitationMatrix) -> Result<Self> {
        let lik = PolyaLikelihood::<T>::new(m);
        lik.check(&gamma)?;
        let leave_out = lik.leave_out(&gamma);
        let damping = lik
            .row_totals()
            .iter()
            .zip(&leave_out)
            .map(|(&n, &k)| if n > T::zero() { n / (n + k) } else { T::zero() })
            .collect();
        Ok(Self {
            concentration: gamma.iter().copied().sum(),
            gamma,
            leave_out,
            damping,
            std_errors: None,
            mask_aware: m.mask().as_slice().iter().any(|&b| b),
            degenerate_columns: lik.degenerate_columns(),
            mask: m.mask().clone(),
        })
    }

    /// Same `γ` against other counts with the same mask, e.g. the complement
    /// of a training half-sample.
    pub fn rebind(&self, m: &CitationMatrix) -> Result<Self> {
        if m.mask() != &self.mask {
            return Err(Error::InvalidParameter(
                "Dirichlet parameters were fitted under a different mask".into(),
            ));
        }
        let mut out = Self::for_matrix(self.gamma.clone(), m)?;
        out.std_errors = self.std_errors.clone();
        out.degenerate_columns = self.degenerate_columns.clone();
        Ok(out)
    }

    pub fn mask(&self) -> &SquareMatrix<bool> {
        &self.mask
    }

    pub fn n(&self) -> usize {
        self.gamma.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorPreset {
    BayesLaplace,
    Jeffreys,
    Perks,
}

impl PriorPreset {
    pub fn gamma<T: Real>(self, n: usize) -> Vec<T> {
        let v = match self {
            PriorPreset::BayesLaplace => T::one(),
            PriorPreset::Jeffreys => T::lit(0.5),
            PriorPreset::Perks => T::from_len(n).recip(),
        };
        vec![v; n]
    }
}

impl FromStr for PriorPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "bayes_laplace" | "laplace" => Ok(PriorPreset::BayesLaplace),
            "jeffreys" => Ok(PriorPreset::Jeffreys),
            "perks" => Ok(PriorPreset::Perks),
            other => Err(Error::InvalidParameter(format!("unknown prior preset `{other}`"))),
        }
    }
}

/// Non-informative prior for `n` nodes with the diagonal excluded and no data
/// attached (every `α_i` is zero until [`DirichletParams::rebind`]).
pub fn prior_preset<T: Real>(kind: PriorPreset, n: usize) -> Result<DirichletParams<T>> {
    if n < 2 {
        return Err(Error::InvalidParameter("a prior preset needs at least two nodes".into()));
    }
    let empty = CitationMatrix::from_counts(vec![vec![0; n]; n], MaskPolicy::Diagonal)?;
    let mut params = DirichletParams::for_matrix(kind.gamma(n), &empty)?;
    params.degenerate_columns.clear();
    Ok(params)
}

#[derive(Clone, Debug, PartialEq)]
pub enum StartingValue<T> {
    /// `γ_j = N·c_+j / c_++` over open cells.
    Empirical,
    Ones,
    Perks,
    Custom(Vec<T>),
}

impl<T> FromStr for StartingValue<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "empirical" => Ok(StartingValue::Empirical),
            "ones" => Ok(StartingValue::Ones),
            "perks" => Ok(StartingValue::Perks),
            other => Err(Error::InvalidParameter(format!("unknown starting value `{other}`"))),
        }
    }
}

impl<T> fmt::Display for StartingValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StartingValue::Empirical => "empirical",
            StartingValue::Ones => "ones",
            StartingValue::Perks => "perks",
            StartingValue::Custom(_) => "custom",
        })
    }
}

/// Resolves a starting point, raising every entry to at least `floor`.
pub fn starting_gamma<T: Real>(m: &CitationMatrix, start: &StartingValue<T>, floor: T) -> Result<Vec<T>> {
    let n = m.n();
    let raw = match start {
        StartingValue::Empirical => {
            let cols = m.column_totals();
            let total: u64 = cols.iter().sum();
            if total == 0 {
                return Err(Error::DegenerateData("no citations outside masked cells".into()));
            }
            let scale = T::from_len(n) / T::from_count(total);
            cols.iter().map(|&c| T::from_count(c) * scale).collect()
        }
        StartingValue::Ones => PriorPreset::BayesLaplace.gamma(n),
        StartingValue::Perks => PriorPreset::Perks.gamma(n),
        StartingValue::Custom(g) => {
            if g.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: g.len(),
                });
            }
            if g.iter().any(|v| !(*v > T::zero())) {
                return Err(Error::Domain {
                    what: "starting hyperparameter",
                    value: g.iter().find(|v| !(**v > T::zero())).map_or(f64::NAN, |v| v.as_f64()),
                });
            }
            g.clone()
        }
    };
    Ok(raw.into_iter().map(|g: T| g.max(floor)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Algorithm {
    #[serde(rename = "FP")]
    FixedPoint,
    #[serde(rename = "INV")]
    Inversion,
    #[serde(rename = "LM")]
    LevenbergMarquardt,
    /// Fixed point on `K` with the prior shares held fixed.
    #[serde(rename = "K")]
    Concentration,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::FixedPoint => "FP",
            Algorithm::Inversion => "INV",
            Algorithm::LevenbergMarquardt => "LM",
            Algorithm::Concentration => "K",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceEntry<T> {
    pub loglik: T,
    /// Largest relative parameter change of the step (L2 ratio for LM).
    pub change: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport<T> {
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub final_loglik: T,
    pub converged: bool,
    pub elapsed_seconds: f64,
    pub trace: Vec<TraceEntry<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fit<T> {
    pub params: DirichletParams<T>,
    pub report: FitReport<T>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions<T> {
    pub eps1: T,
    pub eps2: T,
    pub max_iter: usize,
    /// Lower bound applied to every `γ_j`.
    pub floor: T,
    /// Return the last iterate with `converged = false` instead of an error
    /// when `max_iter` is reached.
    pub allow_unconverged: bool,
}

impl<T: Real> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            eps1: T::lit(1e-8),
            eps2: T::attainable(1e-6),
            max_iter: 1000,
            floor: T::lit(1e-8),
            allow_unconverged: false,
        }
    }
}

impl<T: Real> FitOptions<T> {
    pub fn with_eps2(self, eps2: f64) -> Self {
        Self {
            eps2: T::attainable(eps2),
            ..self
        }
    }

    pub(crate) fn finish(&self, fit: Fit<T>) -> Result<Fit<T>> {
        if fit.report.converged || self.allow_unconverged {
            Ok(fit)
        } else {
            Err(Error::NotConverged {
                what: format!("{} fit", fit.report.algorithm),
                iterations: fit.report.iterations,
            })
        }
    }
}

/// Columns to optimize: everything except columns with no open citations.
pub(crate) fn free_columns<T: Real>(lik: &PolyaLikelihood<T>) -> Result<(Vec<usize>, Vec<usize>)> {
    let degenerate = lik.degenerate_columns();
    if degenerate.len() == lik.n() {
        return Err(Error::DegenerateData("no citations outside masked cells".into()));
    }
    let free = (0..lik.n()).filter(|j| !degenerate.contains(j)).collect();
    Ok((free, degenerate))
}

/// Largest `|new − old| / (|old| + eps1)`.
pub(crate) fn max_relative_change<T: Real>(old: &[T], new: &[T], eps1: T) -> T {
    old.iter()
        .zip(new)
        .map(|(&o, &n)| (n - o).abs() / (o.abs() + eps1))
        .fold(T::zero(), T::max)
}
