//! Self-citation attenuation.
//!
//! For node `i` with self-citations `c_ii`, external citations received
//! `R = c_+i − c_ii` and external references made `M = c_i+ − c_ii`, the
//! received/made ratio with self-citations weighted by `κ` is
//!
//! ```text
//! S(κ) = (κ·c_ii + R) / (κ·c_ii + M),    κ = min(min(R, M) / c_ii, 1)
//! ```
//!
//! and `κ = 1` when `c_ii = 0`. `S` is increasing in `κ` and stays below one
//! when `S(0) < 1`, is constant when `S(0) = 1`, and decreases towards one
//! from above when `S(0) > 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::CitationMatrix;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfCitationEntry<T> {
    pub label: String,
    pub self_citations: u64,
    /// `R`.
    pub received: u64,
    /// `M`.
    pub made: u64,
    /// `c_ii / c_i+`.
    pub rate: T,
    pub kappa: T,
    #[serde(rename = "S0")]
    pub s0: T,
    #[serde(rename = "S_kappa")]
    pub s_kappa: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfCitationProfile<T> {
    pub entries: Vec<SelfCitationEntry<T>>,
}

impl<T: Real> SelfCitationProfile<T> {
    pub fn kappas(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.kappa).collect()
    }

    pub fn mean_rate(&self) -> T {
        self.entries.iter().map(|e| e.rate).sum::<T>() / T::from_len(self.entries.len())
    }
}

/// `min(min(R, M) / c_ii, 1)`, or one without self-citations.
pub fn kappa<T: Real>(self_citations: u64, received: u64, made: u64) -> T {
    if self_citations == 0 {
        return T::one();
    }
    let bound = received.min(made);
    if bound >= self_citations {
        T::one()
    } else {
        T::from_count(bound) / T::from_count(self_citations)
    }
}

/// `S(κ)`; infinite when the node makes no references at all at this `κ`.
pub fn attenuated_ratio<T: Real>(self_citations: u64, received: u64, made: u64, kappa: T) -> T {
    let s = kappa * T::from_count(self_citations);
    (s + T::from_count(received)) / (s + T::from_count(made))
}

/// Per-node profile from the unmasked counts.
pub fn self_citation_profile<T: Real>(m: &CitationMatrix) -> Result<SelfCitationProfile<T>> {
    let raw = m.raw_counts();
    let made_total = m.raw_row_totals();
    let received_total = m.raw_column_totals();
    let mut entries = Vec::with_capacity(m.n());
    for i in 0..m.n() {
        if made_total[i] == 0 {
            return Err(Error::DegenerateData(format!(
                "node `{}` makes no references, its self-citation rate is undefined",
                m.labels()[i]
            )));
        }
        let c = raw[(i, i)];
        let received = received_total[i] - c;
        let made = made_total[i] - c;
        let k = kappa::<T>(c, received, made);
        // κ·c_ii is the integer min(R, M, c_ii), so S(κ) is computed exactly
        let weighted = c.min(received).min(made);
        let s_kappa = T::from_count(weighted + received) / T::from_count(weighted + made);
        entries.push(SelfCitationEntry {
            label: m.labels()[i].clone(),
            self_citations: c,
            received,
            made,
            rate: T::from_count(c) / T::from_count(made_total[i]),
            kappa: k,
            s0: T::from_count(received) / T::from_count(made),
            s_kappa,
        });
    }
    Ok(SelfCitationProfile { entries })
}

/// Replaces each diagonal count by `round(κ_i·c_ii)`; everything else,
/// including the mask, is unchanged.
pub fn apply_kappa<T: Real>(m: &CitationMatrix, kappa: &[T]) -> Result<CitationMatrix> {
    if kappa.len() != m.n() {
        return Err(Error::LengthMismatch {
            expected: m.n(),
            found: kappa.len(),
        });
    }
    if let Some(&k) = kappa.iter().find(|k| !(**k >= T::zero() && **k <= T::one())) {
        return Err(Error::Domain {
            what: "kappa",
            value: k.as_f64(),
        });
    }
    let mut raw = m.raw_counts().clone();
    for (i, &k) in kappa.iter().enumerate() {
        let c = raw[(i, i)];
        raw[(i, i)] = (k * T::from_count(c)).round().to_u64().unwrap_or(c);
    }
    m.with_raw_counts(raw)
}
