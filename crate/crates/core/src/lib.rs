//! Influence scores for citation networks.
//!
//! Two families are provided. PageRank-style scores (PR, EIFA, PSJR) smooth
//! the row-normalized citation matrix with a fixed teleportation term.
//! Empirical-Bayes scores (EBPR, EBEF) instead shrink each row towards a
//! Dirichlet prior whose hyperparameters are fitted by maximizing the
//! marginal Dirichlet-multinomial likelihood; EBEF treats self-citations as
//! structural zeros rather than observed counts.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.
//!
//! ```
//! use citerank::{score, CitationMatrix, MaskPolicy, Method, ScoringOptions};
//!
//! let m = CitationMatrix::from_counts(
//!     vec![vec![43, 0, 9, 0, 1], vec![1, 18, 24, 5, 7], vec![2, 3, 291, 2, 27],
//!          vec![0, 3, 4, 5, 0], vec![0, 5, 53, 0, 22]],
//!     MaskPolicy::None,
//! )?;
//! let out = score::<f64>(&m, Method::Ebef, &ScoringOptions::default())?;
//! assert_eq!(out.scores.order()[0], 2);
//! # Ok::<(), citerank::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dirichlet;
pub mod eb;
pub mod error;
pub mod linalg;
pub mod markov;
pub mod matrix;
pub mod method;
pub mod scalar;
pub mod special;

#[cfg(test)]
mod testdata;

pub use analysis::{
    apply_kappa, half_sample, half_sampling_study, kendall_tau, self_citation_profile, spearman, HalfSampleConfig,
    RankComparison, SamplingMode,
};
pub use dirichlet::{
    fit_concentration_only, fit_fixed_point, fit_inversion, fit_levenberg_marquardt, marginal_log_likelihood,
    prior_preset, starting_gamma, Algorithm, FitOptions, PriorPreset, StartingValue,
};
pub use eb::{ebef_score, ebpr_score, posterior_smoothing_matrix, EbOptions, Optimizer};
pub use error::{Error, Result};
pub use linalg::SquareMatrix;
pub use markov::{
    article_influence, google_matrix, psjr_matrix, stationary_distribution, Normalization, PowerOptions,
    TeleportVector,
};
pub use matrix::{load_articles, load_matrix, CitationMatrix, DanglingPolicy, MaskPolicy, SelfCitationCap};
pub use method::{score, score_split, score_with_prior, scoring_matrix, Method, ScoringOptions};
pub use scalar::Real;

pub type ScoreVector = markov::ScoreVector<f64>;
pub type TransitionMatrix = markov::TransitionMatrix<f64>;
pub type DirichletParams = dirichlet::DirichletParams<f64>;
pub type Fit = dirichlet::Fit<f64>;
pub type FitReport = dirichlet::FitReport<f64>;
pub type SmoothedMatrix = eb::SmoothedMatrix<f64>;
pub type MethodScore = method::MethodScore<f64>;
pub type SelfCitationProfile = analysis::SelfCitationProfile<f64>;
pub type HalfSampleStudy = analysis::HalfSampleStudy<f64>;
pub type Comparison = analysis::RankComparison<f64>;
