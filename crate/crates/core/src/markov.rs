//! Row-stochastic matrices, teleportation smoothing and stationary scores.
//!
//! Scores follow the left-eigenvector convention `r_j = Σ_i g_ij r_i`: a
//! citing row `i` passes its weight along its outgoing references.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix<T> {
    labels: Vec<String>,
    rows: SquareMatrix<T>,
    dangling: Vec<bool>,
    mask: SquareMatrix<bool>,
}

impl<T: Real> TransitionMatrix<T> {
    pub fn new(
        labels: Vec<String>,
        rows: SquareMatrix<T>,
        dangling: Vec<bool>,
        mask: SquareMatrix<bool>,
    ) -> Result<Self> {
        let n = rows.n();
        for found in [labels.len(), dangling.len(), mask.n()] {
            if found != n {
                return Err(Error::LengthMismatch { expected: n, found });
            }
        }
        let tol = T::attainable(1e-12);
        for (i, row) in rows.rows().enumerate() {
            if let Some(v) = row.iter().find(|v| !(**v >= T::zero()) || !v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "transition row `{}` has invalid entry {v}",
                    labels[i]
                )));
            }
            let sum: T = row.iter().copied().sum();
            if (sum - T::one()).abs() > tol {
                return Err(Error::InvalidParameter(format!(
                    "transition row `{}` sums to {sum}",
                    labels[i]
                )));
            }
        }
        Ok(Self {
            labels,
            rows,
            dangling,
            mask,
        })
    }

    /// Unlabelled matrix without dangling rows or mask.
    pub fn from_rows(rows: SquareMatrix<T>) -> Result<Self> {
        let n = rows.n();
        Self::new(
            (0..n).map(|i| i.to_string()).collect(),
            rows,
            vec![false; n],
            SquareMatrix::from_elem(n, false),
        )
    }

    pub fn n(&self) -> usize {
        self.rows.n()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &SquareMatrix<T> {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[T] {
        self.rows.row(i)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.rows[(i, j)]
    }

    pub fn dangling(&self) -> &[bool] {
        &self.dangling
    }

    pub fn mask(&self) -> &SquareMatrix<bool> {
        &self.mask
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TeleportKind {
    Uniform,
    ArticleShare,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TeleportVector<T> {
    probabilities: Vec<T>,
    kind: TeleportKind,
}

impl<T: Real> TeleportVector<T> {
    pub fn uniform(n: usize) -> Self {
        Self {
            probabilities: vec![T::from_len(n).recip(); n],
            kind: TeleportKind::Uniform,
        }
    }

    /// `ã_i = a_i / a_+`.
    pub fn article_share(articles: &[u64]) -> Result<Self> {
        if articles.is_empty() || articles.contains(&0) {
            return Err(Error::InvalidParameter(
                "article shares need positive counts for every node".into(),
            ));
        }
        let total = T::from_count(articles.iter().sum());
        Ok(Self {
            probabilities: articles.iter().map(|&a| T::from_count(a) / total).collect(),
            kind: TeleportKind::ArticleShare,
        })
    }

    pub fn custom(probabilities: Vec<T>) -> Result<Self> {
        let sum: T = probabilities.iter().copied().sum();
        if probabilities.iter().any(|p| !(*p >= T::zero()) || !p.is_finite())
            || (sum - T::one()).abs() > T::attainable(1e-12)
        {
            return Err(Error::InvalidParameter(format!(
                "teleport vector must be nonnegative and sum to 1 (sum {sum})"
            )));
        }
        Ok(Self {
            probabilities,
            kind: TeleportKind::Custom,
        })
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    pub fn kind(&self) -> TeleportKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    SumOne,
    Sum1000,
    PerArticle,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreVector<T> {
    pub labels: Vec<String>,
    pub values: Vec<T>,
    pub normalization: Normalization,
    /// Power iterations used, zero when the vector was not produced by one.
    pub iterations: usize,
}

impl<T: Real> ScoreVector<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Node indices by descending score, ties broken by label.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            self.values[b]
                .partial_cmp(&self.values[a])
                .unwrap_or(Ordering::Equal)
                .then_with(|| self.labels[a].cmp(&self.labels[b]))
        });
        idx
    }

    /// Rank of each node (1 = highest score) in input order.
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.len()];
        for (r, i) in self.order().into_iter().enumerate() {
            ranks[i] = r + 1;
        }
        ranks
    }

    /// Rescales a unit-sum vector to sum to 1000.
    pub fn per_thousand(&self) -> Result<Self> {
        if self.normalization != Normalization::SumOne {
            return Err(Error::InvalidParameter(
                "only unit-sum scores can be rescaled to 1000".into(),
            ));
        }
        let k = T::lit(1000.0);
        Ok(Self {
            values: self.values.iter().map(|&v| v * k).collect(),
            normalization: Normalization::Sum1000,
            ..self.clone()
        })
    }
}

/// Convex combination `α·P + (1−α)·1·tᵀ`.
pub fn google_matrix<T: Real>(
    p: &TransitionMatrix<T>,
    alpha: T,
    teleport: &TeleportVector<T>,
) -> Result<TransitionMatrix<T>> {
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::InvalidParameter(format!("damping factor {alpha} outside [0, 1]")));
    }
    check_len(p.n(), teleport.len())?;
    let t = teleport.probabilities();
    let rows = SquareMatrix::from_fn(p.n(), |i, j| alpha * p.get(i, j) + (T::one() - alpha) * t[j]);
    TransitionMatrix::new(p.labels.clone(), rows, p.dangling.clone(), p.mask.clone())
}

/// `α₂·P + (1−α₂−β)·1·πᵀ + β·11ᵀ/N`.
pub fn psjr_matrix<T: Real>(
    p: &TransitionMatrix<T>,
    alpha2: T,
    beta: T,
    pi: &TeleportVector<T>,
) -> Result<TransitionMatrix<T>> {
    if !(alpha2 >= T::zero() && beta >= T::zero()) || alpha2 + beta > T::one() {
        return Err(Error::InvalidParameter(format!(
            "need alpha2, beta >= 0 and alpha2 + beta <= 1, got {alpha2} and {beta}"
        )));
    }
    check_len(p.n(), pi.len())?;
    let n = p.n();
    let uniform = beta / T::from_len(n);
    let share = T::one() - alpha2 - beta;
    let pi = pi.probabilities();
    let rows = SquareMatrix::from_fn(n, |i, j| alpha2 * p.get(i, j) + share * pi[j] + uniform);
    TransitionMatrix::new(p.labels.clone(), rows, p.dangling.clone(), p.mask.clone())
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerOptions<T> {
    /// L1 distance between successive iterates that counts as converged.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for PowerOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::attainable(1e-12),
            max_iter: 10_000,
        }
    }
}

/// Stationary distribution `rᵀG = rᵀ` by power iteration from the uniform vector.
pub fn stationary_distribution<T: Real>(
    g: &TransitionMatrix<T>,
    opts: &PowerOptions<T>,
) -> Result<ScoreVector<T>> {
    let n = g.n();
    stationary_distribution_from(g, vec![T::from_len(n).recip(); n], opts)
}

/// Power iteration from an arbitrary start on the simplex.
pub fn stationary_distribution_from<T: Real>(
    g: &TransitionMatrix<T>,
    start: Vec<T>,
    opts: &PowerOptions<T>,
) -> Result<ScoreVector<T>> {
    check_len(g.n(), start.len())?;
    let mut r = normalized(start)?;
    for iteration in 1..=opts.max_iter {
        let next = normalized(g.rows.left_mul_vec(&r))?;
        let diff: T = next.iter().zip(&r).map(|(&a, &b)| (a - b).abs()).sum();
        r = next;
        if diff < opts.tol {
            return Ok(ScoreVector {
                labels: g.labels.clone(),
                values: r,
                normalization: Normalization::SumOne,
                iterations: iteration,
            });
        }
    }
    Err(Error::NotConverged {
        what: "power iteration".into(),
        iterations: opts.max_iter,
    })
}

fn normalized<T: Real>(mut v: Vec<T>) -> Result<Vec<T>> {
    let sum: T = v.iter().copied().sum();
    if !(sum > T::zero()) || !sum.is_finite() {
        return Err(Error::InvalidParameter("score vector has no positive mass".into()));
    }
    v.iter_mut().for_each(|x| *x /= sum);
    Ok(v)
}

/// `‖rᵀG − rᵀ‖₁`.
pub fn stationarity_residual<T: Real>(g: &TransitionMatrix<T>, r: &[T]) -> T {
    g.rows
        .left_mul_vec(r)
        .iter()
        .zip(r)
        .map(|(&a, &b)| (a - b).abs())
        .sum()
}

/// Score per article share, `(s_i / ã_i) / Σ_k s_k`, so that the
/// article-weighted mean `Σ ã_i·AI_i` is one.
pub fn article_influence<T: Real>(score: &ScoreVector<T>, articles: &[u64]) -> Result<ScoreVector<T>> {
    check_len(score.len(), articles.len())?;
    if let Some(i) = articles.iter().position(|&a| a == 0) {
        return Err(Error::InvalidArticles {
            label: score.labels[i].clone(),
            message: "count must be positive".into(),
        });
    }
    let shares = TeleportVector::<T>::article_share(articles)?;
    let total: T = score.values.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::InvalidParameter("scores have no positive mass".into()));
    }
    let values = score
        .values
        .iter()
        .zip(shares.probabilities())
        .map(|(&s, &a)| s / a / total)
        .collect();
    Ok(ScoreVector {
        labels: score.labels.clone(),
        values,
        normalization: Normalization::PerArticle,
        iterations: score.iterations,
    })
}
