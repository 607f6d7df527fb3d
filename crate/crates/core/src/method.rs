//! One entry point for the five scoring methods.
//!
//! | method | mask     | smoothing                                   |
//! |--------|----------|---------------------------------------------|
//! | PR     | none     | `α·P + (1−α)·uniform`                       |
//! | EIFA   | diagonal | `α·P + (1−α)·article shares`                |
//! | PSJR   | none     | self-citations capped, then `G₂`            |
//! | EBPR   | none     | empirical-Bayes posterior mean `G*`         |
//! | EBEF   | diagonal | empirical-Bayes posterior mean `G*`         |
//!
//! EIFA and PSJR fall back to uniform teleportation when the matrix carries
//! no article counts.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dirichlet::{DirichletParams, FitReport};
use crate::eb::{eb_score, score_with_params, EbOptions};
use crate::error::{Error, Result};
use crate::markov::{
    article_influence, google_matrix, psjr_matrix, stationary_distribution, PowerOptions, ScoreVector,
    TeleportVector, TransitionMatrix,
};
use crate::matrix::{CitationMatrix, DanglingPolicy, MaskPolicy, SelfCitationCap};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Pr,
    Eifa,
    Psjr,
    Ebpr,
    Ebef,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Pr, Method::Eifa, Method::Psjr, Method::Ebpr, Method::Ebef];

    pub fn mask_policy(self) -> MaskPolicy {
        match self {
            Method::Eifa | Method::Ebef => MaskPolicy::Diagonal,
            Method::Pr | Method::Psjr | Method::Ebpr => MaskPolicy::None,
        }
    }

    pub fn is_empirical_bayes(self) -> bool {
        matches!(self, Method::Ebpr | Method::Ebef)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pr" | "pagerank" => Ok(Method::Pr),
            "eifa" => Ok(Method::Eifa),
            "psjr" => Ok(Method::Psjr),
            "ebpr" => Ok(Method::Ebpr),
            "ebef" => Ok(Method::Ebef),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Pr => "PR",
            Method::Eifa => "EIFA",
            Method::Psjr => "PSJR",
            Method::Ebpr => "EBPR",
            Method::Ebef => "EBEF",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoringOptions<T> {
    /// Damping for PR and EIFA.
    pub alpha: T,
    pub alpha2: T,
    pub beta: T,
    pub self_citation_cap: SelfCitationCap,
    pub eb: EbOptions<T>,
    pub power: PowerOptions<T>,
}

impl<T: Real> Default for ScoringOptions<T> {
    fn default() -> Self {
        Self {
            alpha: T::lit(0.85),
            alpha2: T::lit(0.9),
            beta: T::lit(1e-4),
            self_citation_cap: SelfCitationCap::default(),
            eb: EbOptions::default(),
            power: PowerOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodScore<T> {
    pub method: Method,
    pub scores: ScoreVector<T>,
    /// Present when the matrix carries article counts.
    pub article_influence: Option<ScoreVector<T>>,
    pub params: Option<DirichletParams<T>>,
    pub report: Option<FitReport<T>>,
}

fn teleport<T: Real>(m: &CitationMatrix, by_articles: bool) -> Result<TeleportVector<T>> {
    match m.articles() {
        Some(a) if by_articles => TeleportVector::article_share(a),
        _ => Ok(TeleportVector::uniform(m.n())),
    }
}

/// The smoothed chain behind a PR, EIFA or PSJR score. The empirical-Bayes
/// chain comes from [`crate::eb::posterior_smoothing_matrix`] instead.
pub fn scoring_matrix<T: Real>(
    m: &CitationMatrix,
    method: Method,
    opts: &ScoringOptions<T>,
) -> Result<TransitionMatrix<T>> {
    match method {
        Method::Pr | Method::Eifa => {
            let t = teleport(m, method == Method::Eifa)?;
            let m = m.with_mask_policy(method.mask_policy());
            let p = m.transition_matrix(&DanglingPolicy::Prior(t.probabilities().to_vec()))?;
            google_matrix(&p, opts.alpha, &t)
        }
        Method::Psjr => {
            let pi = teleport(m, true)?;
            let m = m
                .cap_self_citations(opts.self_citation_cap)
                .with_mask_policy(MaskPolicy::None);
            let p = m.transition_matrix(&DanglingPolicy::Prior(pi.probabilities().to_vec()))?;
            psjr_matrix(&p, opts.alpha2, opts.beta, &pi)
        }
        Method::Ebpr | Method::Ebef => Err(Error::InvalidParameter(format!(
            "{method} smooths with a fitted prior, not a fixed teleportation"
        ))),
    }
}

fn markov_score<T: Real>(m: &CitationMatrix, method: Method, opts: &ScoringOptions<T>) -> Result<ScoreVector<T>> {
    stationary_distribution(&scoring_matrix(m, method, opts)?, &opts.power)
}

fn finish<T: Real>(
    m: &CitationMatrix,
    method: Method,
    scores: ScoreVector<T>,
    params: Option<DirichletParams<T>>,
    report: Option<FitReport<T>>,
) -> Result<MethodScore<T>> {
    let article_influence = m.articles().map(|a| article_influence(&scores, a)).transpose()?;
    Ok(MethodScore {
        method,
        scores,
        article_influence,
        params,
        report,
    })
}

/// Scores `m` with `method`; the mask carried by `m` is replaced by the
/// method's own.
pub fn score<T: Real>(m: &CitationMatrix, method: Method, opts: &ScoringOptions<T>) -> Result<MethodScore<T>> {
    if method.is_empirical_bayes() {
        let out = eb_score(&m.with_mask_policy(method.mask_policy()), &opts.eb)?;
        return finish(m, method, out.scores, Some(out.params), Some(out.report));
    }
    let scores = markov_score(m, method, opts)?;
    finish(m, method, scores, None, None)
}

/// Scores `target` with hyperparameters fitted on `train` (empirical-Bayes
/// methods); the other methods only look at `target`.
pub fn score_split<T: Real>(
    train: &CitationMatrix,
    target: &CitationMatrix,
    method: Method,
    opts: &ScoringOptions<T>,
) -> Result<MethodScore<T>> {
    if !method.is_empirical_bayes() {
        return score(target, method, opts);
    }
    let policy = method.mask_policy();
    let fitted = eb_score(&train.with_mask_policy(policy), &opts.eb)?;
    let target_masked = target.with_mask_policy(policy);
    let params = fitted.params.rebind(&target_masked)?;
    let scores = score_with_params(&target_masked, &params, &opts.eb.power)?;
    finish(target, method, scores, Some(params), Some(fitted.report))
}

/// Scores with preset hyperparameters instead of a fit.
pub fn score_with_prior<T: Real>(
    m: &CitationMatrix,
    method: Method,
    params: &DirichletParams<T>,
    opts: &ScoringOptions<T>,
) -> Result<MethodScore<T>> {
    if !method.is_empirical_bayes() {
        return Err(Error::InvalidParameter(format!("{method} takes no Dirichlet prior")));
    }
    let masked = m.with_mask_policy(method.mask_policy());
    let params = params.rebind(&masked)?;
    let scores = score_with_params(&masked, &params, &opts.eb.power)?;
    finish(m, method, scores, Some(params), None)
}
