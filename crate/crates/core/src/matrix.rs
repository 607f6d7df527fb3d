//! Square citation-count matrices with an explicit structural-zero mask.
//!
//! Row `i` is the citing node and column `j` the cited node, so `c_ij` counts
//! references from `i` to `j`. Masked cells are structural zeros: they are
//! removed from the probability model, which is different from an observed
//! (sampling) zero. The unmasked counts are kept alongside the masked view so
//! self-citation analyses can still read the original diagonal.

use std::collections::{HashMap, HashSet};
use std::io::Read;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::markov::TransitionMatrix;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MaskPolicy {
    None,
    Diagonal,
}

impl FromStr for MaskPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(MaskPolicy::None),
            "diag" | "diagonal" => Ok(MaskPolicy::Diagonal),
            other => Err(Error::InvalidParameter(format!("unknown mask policy `{other}`"))),
        }
    }
}

/// How rows without any non-masked citations are filled when building `P`.
#[derive(Clone, Debug, PartialEq)]
pub enum DanglingPolicy<T> {
    Uniform,
    /// Prior distribution over all nodes; masked cells are dropped and the
    /// remainder renormalized.
    Prior(Vec<T>),
    Error,
}

/// Rule bounding self-citations before scoring.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SelfCitationCap {
    None,
    /// `c_ii ← min(c_ii, ⌊share·c_i+⌋)` with `c_i+` recomputed after each
    /// clamp, repeated until the diagonal is stable.
    Iterative { share: f64 },
    /// `c_ii ← min(c_ii, ⌊share·m_i/(1−share)⌋)` where `m_i` is the
    /// off-diagonal row total: the largest diagonal that is at most `share`
    /// of the row.
    ClosedForm { share: f64 },
}

impl Default for SelfCitationCap {
    fn default() -> Self {
        SelfCitationCap::Iterative { share: 0.33 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CitationMatrix {
    labels: Vec<String>,
    raw: SquareMatrix<u64>,
    counts: SquareMatrix<u64>,
    mask: SquareMatrix<bool>,
    articles: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowTotals {
    /// Per-row totals over non-masked cells.
    pub n: Vec<u64>,
    pub grand_total: u64,
}

impl CitationMatrix {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<u64>>, policy: MaskPolicy) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n {
            return Err(Error::NonSquare {
                rows: rows.len(),
                cols: n,
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NonSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        check_unique(&labels)?;
        let raw = SquareMatrix::from_rows(rows).expect("row lengths checked");
        Ok(Self::assemble(labels, raw, mask_for(policy, n), None))
    }

    /// Labels `0..n` for quick construction in code.
    pub fn from_counts(rows: Vec<Vec<u64>>, policy: MaskPolicy) -> Result<Self> {
        let labels = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(labels, rows, policy)
    }

    fn assemble(
        labels: Vec<String>,
        raw: SquareMatrix<u64>,
        mask: SquareMatrix<bool>,
        articles: Option<Vec<u64>>,
    ) -> Self {
        let counts = SquareMatrix::from_fn(raw.n(), |i, j| if mask[(i, j)] { 0 } else { raw[(i, j)] });
        Self {
            labels,
            raw,
            counts,
            mask,
            articles,
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Counts with masked cells zeroed.
    pub fn counts(&self) -> &SquareMatrix<u64> {
        &self.counts
    }

    /// Counts before masking.
    pub fn raw_counts(&self) -> &SquareMatrix<u64> {
        &self.raw
    }

    pub fn mask(&self) -> &SquareMatrix<bool> {
        &self.mask
    }

    #[inline]
    pub fn is_masked(&self, i: usize, j: usize) -> bool {
        self.mask[(i, j)]
    }

    /// The original self-citation counts `c_ii`, regardless of masking.
    pub fn preserved_diagonal(&self) -> Vec<u64> {
        self.raw.diagonal()
    }

    pub fn mask_policy(&self) -> Option<MaskPolicy> {
        let n = self.n();
        if self.mask.as_slice().iter().all(|&m| !m) {
            Some(MaskPolicy::None)
        } else if self.mask == mask_for(MaskPolicy::Diagonal, n) {
            Some(MaskPolicy::Diagonal)
        } else {
            None
        }
    }

    pub fn with_mask_policy(&self, policy: MaskPolicy) -> Self {
        Self::assemble(
            self.labels.clone(),
            self.raw.clone(),
            mask_for(policy, self.n()),
            self.articles.clone(),
        )
    }

    /// Applies an arbitrary structural-zero pattern, for example excluding
    /// links between groups of nodes.
    pub fn with_mask(&self, mask: SquareMatrix<bool>) -> Result<Self> {
        if mask.n() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                found: mask.n(),
            });
        }
        Ok(Self::assemble(
            self.labels.clone(),
            self.raw.clone(),
            mask,
            self.articles.clone(),
        ))
    }

    /// Same labels, mask and articles, different raw counts.
    pub fn with_raw_counts(&self, raw: SquareMatrix<u64>) -> Result<Self> {
        if raw.n() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                found: raw.n(),
            });
        }
        Ok(Self::assemble(
            self.labels.clone(),
            raw,
            self.mask.clone(),
            self.articles.clone(),
        ))
    }

    pub fn articles(&self) -> Option<&[u64]> {
        self.articles.as_deref()
    }

    pub fn require_articles(&self) -> Result<&[u64]> {
        self.articles().ok_or(Error::MissingArticles)
    }

    /// Attaches article counts in matrix order.
    pub fn with_article_counts(mut self, articles: Vec<u64>) -> Result<Self> {
        if articles.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                found: articles.len(),
            });
        }
        if let Some(i) = articles.iter().position(|&a| a == 0) {
            return Err(Error::InvalidArticles {
                label: self.labels[i].clone(),
                message: "count must be positive".into(),
            });
        }
        self.articles = Some(articles);
        Ok(self)
    }

    /// Attaches `(label, count)` pairs given in any order; every node must be
    /// covered exactly once.
    pub fn with_articles(self, pairs: Vec<(String, u64)>) -> Result<Self> {
        let mut by_label: HashMap<String, u64> = HashMap::with_capacity(pairs.len());
        for (label, count) in pairs {
            if !self.labels.contains(&label) {
                return Err(Error::InvalidArticles {
                    label,
                    message: "not a node of the matrix".into(),
                });
            }
            if by_label.insert(label.clone(), count).is_some() {
                return Err(Error::DuplicateLabel(label));
            }
        }
        let mut articles = Vec::with_capacity(self.n());
        for label in &self.labels {
            match by_label.get(label) {
                Some(&a) => articles.push(a),
                None => {
                    return Err(Error::InvalidArticles {
                        label: label.clone(),
                        message: "missing from the articles file".into(),
                    })
                }
            }
        }
        self.with_article_counts(articles)
    }

    pub fn row_totals(&self) -> RowTotals {
        let n: Vec<u64> = self.counts.rows().map(|r| r.iter().sum()).collect();
        let grand_total = n.iter().sum();
        RowTotals { n, grand_total }
    }

    /// Column totals over non-masked cells.
    pub fn column_totals(&self) -> Vec<u64> {
        (0..self.n())
            .map(|j| (0..self.n()).map(|i| self.counts[(i, j)]).sum())
            .collect()
    }

    /// `c_i+` over the unmasked matrix.
    pub fn raw_row_totals(&self) -> Vec<u64> {
        self.raw.rows().map(|r| r.iter().sum()).collect()
    }

    /// `c_+j` over the unmasked matrix.
    pub fn raw_column_totals(&self) -> Vec<u64> {
        (0..self.n())
            .map(|j| (0..self.n()).map(|i| self.raw[(i, j)]).sum())
            .collect()
    }

    /// Reorders nodes so that new node `k` is old node `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidParameter("not a permutation of the node indices".into()));
        }
        Ok(Self::assemble(
            perm.iter().map(|&p| self.labels[p].clone()).collect(),
            self.raw.permuted(perm),
            self.mask.permuted(perm),
            self.articles
                .as_ref()
                .map(|a| perm.iter().map(|&p| a[p]).collect()),
        ))
    }

    /// Bounds the diagonal according to `rule`; the mask is kept.
    pub fn cap_self_citations(&self, rule: SelfCitationCap) -> Self {
        let mut raw = self.raw.clone();
        for i in 0..self.n() {
            let off: u64 = raw.row(i).iter().sum::<u64>() - raw[(i, i)];
            let capped = match rule {
                SelfCitationCap::None => raw[(i, i)],
                SelfCitationCap::Iterative { share } => {
                    let mut c = raw[(i, i)];
                    loop {
                        let bound = (share * (off + c) as f64).floor() as u64;
                        let next = c.min(bound);
                        if next == c {
                            break c;
                        }
                        c = next;
                    }
                }
                SelfCitationCap::ClosedForm { share } => {
                    let bound = if share >= 1.0 {
                        u64::MAX
                    } else {
                        (share * off as f64 / (1.0 - share)).floor() as u64
                    };
                    raw[(i, i)].min(bound)
                }
            };
            raw[(i, i)] = capped;
        }
        Self::assemble(
            self.labels.clone(),
            raw,
            self.mask.clone(),
            self.articles.clone(),
        )
    }

    /// Row-normalized transition matrix over non-masked cells.
    pub fn transition_matrix<T: Real>(
        &self,
        dangling: &DanglingPolicy<T>,
    ) -> Result<TransitionMatrix<T>> {
        let n = self.n();
        let totals = self.row_totals();
        let mut rows = SquareMatrix::zeros(n);
        let mut flags = vec![false; n];
        for i in 0..n {
            let total = totals.n[i];
            let open: Vec<usize> = (0..n).filter(|&j| !self.mask[(i, j)]).collect();
            if total > 0 {
                let denom = T::from_count(total);
                for &j in &open {
                    rows[(i, j)] = T::from_count(self.counts[(i, j)]) / denom;
                }
                continue;
            }
            flags[i] = true;
            if open.is_empty() {
                return Err(Error::DegenerateData(format!(
                    "row `{}` has every cell masked",
                    self.labels[i]
                )));
            }
            let fill_uniform = |rows: &mut SquareMatrix<T>| {
                let w = T::from_len(open.len()).recip();
                for &j in &open {
                    rows[(i, j)] = w;
                }
            };
            match dangling {
                DanglingPolicy::Error => return Err(Error::Dangling(self.labels[i].clone())),
                DanglingPolicy::Uniform => fill_uniform(&mut rows),
                DanglingPolicy::Prior(prior) => {
                    if prior.len() != n {
                        return Err(Error::LengthMismatch {
                            expected: n,
                            found: prior.len(),
                        });
                    }
                    let mass: T = open.iter().map(|&j| prior[j]).sum();
                    if mass > T::zero() {
                        for &j in &open {
                            rows[(i, j)] = prior[j] / mass;
                        }
                    } else {
                        fill_uniform(&mut rows);
                    }
                }
            }
        }
        TransitionMatrix::new(self.labels.clone(), rows, flags, self.mask.clone())
    }

    /// Delimited text in the load format, unmasked counts. Loading the output
    /// with the same mask policy reproduces this matrix.
    pub fn to_delimited(&self, delimiter: char) -> String {
        let d = delimiter.to_string();
        let mut out = String::new();
        out.push_str(&d);
        out.push_str(&self.labels.join(&d));
        out.push('\n');
        for (label, row) in self.labels.iter().zip(self.raw.rows()) {
            out.push_str(label);
            for c in row {
                out.push_str(&d);
                out.push_str(&c.to_string());
            }
            out.push('\n');
        }
        out
    }
}

fn mask_for(policy: MaskPolicy, n: usize) -> SquareMatrix<bool> {
    match policy {
        MaskPolicy::None => SquareMatrix::from_elem(n, false),
        MaskPolicy::Diagonal => SquareMatrix::from_fn(n, |i, j| i == j),
    }
}

fn check_unique(labels: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

fn sniff_delimiter(text: &str) -> u8 {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.contains('\t') {
        b'\t'
    } else {
        b','
    }
}

fn read_records(text: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .delimiter(sniff_delimiter(text))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let fields: Vec<String> = record.iter().map(str::to_owned).collect();
        if fields.iter().all(String::is_empty) {
            continue;
        }
        out.push((line, fields));
    }
    Ok(out)
}

/// Reads a square count table: a header row of labels (first cell empty or
/// `journal`), then one row per node starting with its label.
pub fn load_matrix<R: Read>(mut source: R, policy: MaskPolicy) -> Result<CitationMatrix> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let mut records = read_records(&text)?.into_iter();
    let (line, header) = records.next().ok_or(Error::Parse {
        line: 1,
        message: "empty matrix file".into(),
    })?;
    let corner = header[0].to_ascii_lowercase();
    if !(corner.is_empty() || corner == "journal") {
        return Err(Error::Parse {
            line,
            message: format!("first header cell must be empty or `journal`, found `{}`", header[0]),
        });
    }
    let labels: Vec<String> = header[1..].to_vec();
    check_unique(&labels)?;
    let n = labels.len();
    let mut rows = Vec::with_capacity(n);
    for (index, (line, fields)) in records.enumerate() {
        if index >= n {
            return Err(Error::NonSquare {
                rows: index + 1,
                cols: n,
            });
        }
        if fields.len() != n + 1 {
            return Err(Error::Parse {
                line,
                message: format!(
                    "row `{}` has {} entries, expected {n}",
                    fields[0],
                    fields.len() - 1
                ),
            });
        }
        if fields[0] != labels[index] {
            return Err(Error::LabelMismatch {
                index,
                expected: labels[index].clone(),
                found: fields[0].clone(),
            });
        }
        let row = fields[1..]
            .iter()
            .enumerate()
            .map(|(j, v)| {
                v.parse::<u64>().map_err(|_| Error::InvalidCount {
                    row: fields[0].clone(),
                    col: labels[j].clone(),
                    value: v.clone(),
                })
            })
            .collect::<Result<Vec<u64>>>()?;
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::NonSquare {
            rows: rows.len(),
            cols: n,
        });
    }
    CitationMatrix::new(labels, rows, policy)
}

/// Reads `label,count` pairs. A header line is allowed when its second field
/// is not an integer.
pub fn load_articles<R: Read>(mut source: R) -> Result<Vec<(String, u64)>> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let mut out = Vec::new();
    for (index, (line, fields)) in read_records(&text)?.into_iter().enumerate() {
        if fields.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        match fields[1].parse::<u64>() {
            Ok(0) => {
                return Err(Error::InvalidArticles {
                    label: fields[0].clone(),
                    message: "count must be positive".into(),
                })
            }
            Ok(a) => out.push((fields[0].clone(), a)),
            Err(_) if index == 0 => continue,
            Err(_) => {
                return Err(Error::InvalidArticles {
                    label: fields[0].clone(),
                    message: format!("`{}` is not a positive integer", fields[1]),
                })
            }
        }
    }
    Ok(out)
}
