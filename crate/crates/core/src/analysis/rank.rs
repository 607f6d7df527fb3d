use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::markov::ScoreVector;
use crate::scalar::Real;

fn check_pair<T>(x: &[T], y: &[T]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidParameter("rank correlation needs at least two values".into()));
    }
    Ok(())
}

/// Ranks starting at 1, ties sharing the average of their positions.
pub fn average_ranks<T: Real>(x: &[T]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![T::zero(); x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let avg = T::from_len(start + 1 + end) / T::lit(2.0);
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    let n = T::from_len(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(Error::ConstantInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).max(-T::one()).min(T::one()))
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    check_pair(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Kendall's tau-b.
pub fn kendall_tau<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    check_pair(x, y)?;
    let n = x.len();
    let (mut concordant, mut discordant, mut tied_x, mut tied_y) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i].partial_cmp(&x[j]).unwrap_or(Ordering::Equal);
            let dy = y[i].partial_cmp(&y[j]).unwrap_or(Ordering::Equal);
            match (dx, dy) {
                (Ordering::Equal, Ordering::Equal) => {
                    tied_x += 1;
                    tied_y += 1;
                }
                (Ordering::Equal, _) => tied_x += 1,
                (_, Ordering::Equal) => tied_y += 1,
                (a, b) if a == b => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as u64;
    if tied_x == pairs || tied_y == pairs {
        return Err(Error::ConstantInput);
    }
    let denom = (T::from_count(pairs - tied_x) * T::from_count(pairs - tied_y)).sqrt();
    let tau = (T::from_count(concordant) - T::from_count(discordant)) / denom;
    Ok(tau.max(-T::one()).min(T::one()))
}

/// Pairwise rank agreement between several score vectors over the same nodes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankComparison<T> {
    pub methods: Vec<String>,
    pub labels: Vec<String>,
    /// One row per method.
    pub scores: Vec<Vec<T>>,
    pub spearman: SquareMatrix<T>,
    pub kendall: SquareMatrix<T>,
}

impl<T: Real> RankComparison<T> {
    pub fn new(entries: Vec<(String, ScoreVector<T>)>) -> Result<Self> {
        let Some((_, first)) = entries.first() else {
            return Err(Error::InvalidParameter("nothing to compare".into()));
        };
        let labels = first.labels.clone();
        for (name, s) in &entries {
            if s.labels != labels {
                return Err(Error::InvalidParameter(format!("scores of `{name}` cover different nodes")));
            }
        }
        let k = entries.len();
        let scores: Vec<Vec<T>> = entries.iter().map(|(_, s)| s.values.clone()).collect();
        let mut spearman_m = SquareMatrix::identity(k);
        let mut kendall_m = SquareMatrix::identity(k);
        for a in 0..k {
            for b in a + 1..k {
                let rho = spearman(&scores[a], &scores[b])?;
                let tau = kendall_tau(&scores[a], &scores[b])?;
                spearman_m[(a, b)] = rho;
                spearman_m[(b, a)] = rho;
                kendall_m[(a, b)] = tau;
                kendall_m[(b, a)] = tau;
            }
        }
        Ok(Self {
            methods: entries.into_iter().map(|(name, _)| name).collect(),
            labels,
            scores,
            spearman: spearman_m,
            kendall: kendall_m,
        })
    }

    /// Kendall below the diagonal, Spearman above, ones on it.
    pub fn combined(&self) -> SquareMatrix<T> {
        SquareMatrix::from_fn(self.methods.len(), |a, b| match a.cmp(&b) {
            Ordering::Greater => self.kendall[(a, b)],
            Ordering::Less => self.spearman[(a, b)],
            Ordering::Equal => T::one(),
        })
    }
}
