//! Monte Carlo half sampling.
//!
//! Each replicate splits every count `c_ij` into a training part
//! `c̃_ij ~ Binomial(c_ij, p)` and its complement `c_ij − c̃_ij`. In Bernoulli
//! mode `p = 1/2`; in Beta-Bernoulli mode `p = 1 − q_ij` with a fresh
//! `q_ij ~ Beta(a, b)` per cell, which makes the citations of a cell
//! correlated with intra-class correlation `1/(a + b + 1)`.
//!
//! Randomness: cell `k = i·N + j` of replicate `r` draws from
//! `ChaCha8(seed)` on stream `(r << 32) | k`, so results do not depend on
//! thread scheduling or on which replicates are run.

use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::markov::{Normalization, ScoreVector};
use crate::matrix::CitationMatrix;
use crate::method::{score_split, Method, ScoringOptions};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    Bernoulli,
    #[default]
    BetaBernoulli,
}

impl FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "bernoulli" => Ok(SamplingMode::Bernoulli),
            "beta_bernoulli" | "beta" => Ok(SamplingMode::BetaBernoulli),
            other => Err(Error::InvalidParameter(format!("unknown sampling mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HalfSampleConfig {
    pub a: f64,
    pub b: f64,
    /// Number of replicates.
    pub m: usize,
    pub seed: u64,
    pub mode: SamplingMode,
}

impl Default for HalfSampleConfig {
    fn default() -> Self {
        Self {
            a: 10.0,
            b: 10.0,
            m: 200,
            seed: 0,
            mode: SamplingMode::BetaBernoulli,
        }
    }
}

impl HalfSampleConfig {
    pub fn validate(&self) -> Result<()> {
        for (what, v) in [("Beta shape a", self.a), ("Beta shape b", self.b)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain { what, value: v });
            }
        }
        if self.m == 0 {
            return Err(Error::InvalidParameter("at least one replicate is needed".into()));
        }
        if u32::try_from(self.m).is_err() {
            return Err(Error::InvalidParameter("too many replicates".into()));
        }
        Ok(())
    }

    /// `1/(a + b + 1)`.
    pub fn intra_class_correlation(&self) -> f64 {
        match self.mode {
            SamplingMode::Bernoulli => 0.0,
            SamplingMode::BetaBernoulli => 1.0 / (self.a + self.b + 1.0),
        }
    }
}

fn cell_rng(seed: u64, replicate: u64, cell: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((replicate << 32) | cell);
    rng
}

/// Training draw for a single count.
pub fn thin_count(count: u64, cfg: &HalfSampleConfig, rng: &mut ChaCha8Rng) -> Result<u64> {
    if count == 0 {
        return Ok(0);
    }
    let keep = match cfg.mode {
        SamplingMode::Bernoulli => 0.5,
        SamplingMode::BetaBernoulli => {
            let beta = Beta::new(cfg.a, cfg.b).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            1.0 - beta.sample(rng)
        }
    };
    let binomial = Binomial::new(count, keep).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(binomial.sample(rng))
}

/// Training matrix and its complement for one replicate; both keep the
/// labels, mask and article counts of `m`, and add up to `m` exactly.
pub fn half_sample(
    m: &CitationMatrix,
    cfg: &HalfSampleConfig,
    replicate: u64,
) -> Result<(CitationMatrix, CitationMatrix)> {
    cfg.validate()?;
    let n = m.n();
    if replicate >> 32 != 0 || (n * n) as u64 >> 32 != 0 {
        return Err(Error::InvalidParameter("replicate or cell index exceeds 32 bits".into()));
    }
    let raw = m.raw_counts();
    let mut train = SquareMatrix::from_elem(n, 0u64);
    for i in 0..n {
        for j in 0..n {
            let cell = (i * n + j) as u64;
            train[(i, j)] = thin_count(raw[(i, j)], cfg, &mut cell_rng(cfg.seed, replicate, cell))?;
        }
    }
    let rest = SquareMatrix::from_fn(n, |i, j| raw[(i, j)] - train[(i, j)]);
    Ok((m.with_raw_counts(train)?, m.with_raw_counts(rest)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodSummary<T> {
    pub method: Method,
    /// Mean of the unit-sum scores over successful replicates.
    pub mean: ScoreVector<T>,
    /// Mean article influence when article counts are available.
    pub article_mean: Option<ScoreVector<T>>,
    pub succeeded: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfSampleStudy<T> {
    pub config: HalfSampleConfig,
    pub methods: Vec<MethodSummary<T>>,
}

/// Fits on each training half, scores the complement and averages over
/// replicates. A replicate failing for one method is skipped for that
/// method; more than 10% failures is an error.
pub fn half_sampling_study<T: Real>(
    m: &CitationMatrix,
    methods: &[Method],
    cfg: &HalfSampleConfig,
    opts: &ScoringOptions<T>,
) -> Result<HalfSampleStudy<T>> {
    cfg.validate()?;
    if methods.is_empty() {
        return Err(Error::InvalidParameter("no methods requested".into()));
    }
    type Draw<T> = Vec<Option<(Vec<T>, Option<Vec<T>>)>>;
    let draws: Vec<Draw<T>> = (0..cfg.m as u64)
        .into_par_iter()
        .map(|r| -> Result<Draw<T>> {
            let (train, rest) = half_sample(m, cfg, r)?;
            Ok(methods
                .iter()
                .map(|&method| {
                    score_split(&train, &rest, method, opts)
                        .ok()
                        .map(|s| (s.scores.values, s.article_influence.map(|a| a.values)))
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let n = m.n();
    let mut summaries = Vec::with_capacity(methods.len());
    for (k, &method) in methods.iter().enumerate() {
        let mut sum = vec![T::zero(); n];
        let mut article_sum = m.articles().map(|_| vec![T::zero(); n]);
        let mut succeeded = 0;
        for draw in &draws {
            if let Some((values, article)) = &draw[k] {
                succeeded += 1;
                sum.iter_mut().zip(values).for_each(|(s, &v)| *s += v);
                if let (Some(acc), Some(a)) = (article_sum.as_mut(), article) {
                    acc.iter_mut().zip(a).for_each(|(s, &v)| *s += v);
                }
            }
        }
        let failed = cfg.m - succeeded;
        if failed * 10 > cfg.m || succeeded == 0 {
            return Err(Error::TooManyFailures {
                method: method.to_string(),
                failed,
                total: cfg.m,
            });
        }
        let count = T::from_len(succeeded);
        let mean = |v: Vec<T>, normalization| ScoreVector {
            labels: m.labels().to_vec(),
            values: v.into_iter().map(|s| s / count).collect(),
            normalization,
            iterations: 0,
        };
        summaries.push(MethodSummary {
            method,
            mean: mean(sum, Normalization::SumOne),
            article_mean: article_sum.map(|a| mean(a, Normalization::PerArticle)),
            succeeded,
            failed,
        });
    }
    Ok(HalfSampleStudy {
        config: *cfg,
        methods: summaries,
    })
}
