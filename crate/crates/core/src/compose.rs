//! Multi-word tag embeddings from token vectors.
//!
//! A tag label is normalised into tokens by [`preprocess_tag`], each token is
//! looked up in a [`TokenTable`], and the token vectors are pooled either by a
//! plain mean or by smooth-inverse-frequency (SIF) weighting. SIF pooling is
//! followed by removal of the first singular direction of the tag matrix.
//!
//! Token frequencies are not read from anywhere: vocabularies ship sorted by
//! descending frequency, so the frequency of the token at 1-based rank `z` is
//! approximated by `1 / z`.

use std::collections::{BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::embedding::{dot, is_zero, EmbeddingSet};
use crate::error::{Error, Result};

/// Default SIF smoothing constant.
pub const DEFAULT_SIF_A: f64 = 1e-3;

const POWER_TOL: f64 = 1e-9;
const POWER_MAX_ITER: usize = 1000;
const POWER_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Avg,
    Sif,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "avg" => Ok(Strategy::Avg),
            "sif" => Ok(Strategy::Sif),
            _ => Err(Error::Config(format!("unknown composition strategy `{s}` (expected avg|sif)"))),
        }
    }
}

/// Token vocabulary with vectors and frequency ranks.
#[derive(Debug, Clone)]
pub struct TokenTable {
    dim: usize,
    tokens: Vec<String>,
    ranks: Vec<usize>,
    data: Vec<f64>,
    index: HashMap<String, usize>,
}

impl TokenTable {
    pub fn new(dim: usize) -> Self {
        TokenTable { dim, tokens: Vec::new(), ranks: Vec::new(), data: Vec::new(), index: HashMap::new() }
    }

    /// Builds a table whose ranks follow the order of `entries`.
    pub fn from_entries<S: Into<String>>(dim: usize, entries: impl IntoIterator<Item = (S, Vec<f64>)>) -> Result<Self> {
        let mut table = TokenTable::new(dim);
        for (rank, (token, vector)) in entries.into_iter().enumerate() {
            table.push(token, vector, rank + 1)?;
        }
        Ok(table)
    }

    /// Adds a token at an explicit rank. Repeated tokens keep their first entry.
    pub fn push(&mut self, token: impl Into<String>, vector: Vec<f64>, rank: usize) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Validation(format!(
                "token vector has dimension {}, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if rank == 0 {
            return Err(Error::Validation("token ranks start at 1".into()));
        }
        let token = token.into();
        if self.index.contains_key(&token) {
            return Ok(());
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.ranks.push(rank);
        self.data.extend_from_slice(&vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    pub fn rank(&self, token: &str) -> Option<usize> {
        self.index.get(token).map(|&i| self.ranks[i])
    }

    /// The same table with every vector multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> TokenTable {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= factor);
        out
    }
}

/// Normalises a raw tag into lowercase tokens.
///
/// `_ - / ,` become spaces and `( ) ' : . ! $` are deleted.
pub fn preprocess_tag(raw: &str) -> Vec<String> {
    let cleaned: String = raw
        .chars()
        .filter_map(|c| match c {
            '_' | '-' | '/' | ',' => Some(' '),
            '(' | ')' | '\'' | ':' | '.' | '!' | '$' => None,
            c => Some(c),
        })
        .collect();
    cleaned.to_lowercase().split_whitespace().map(str::to_string).collect()
}

/// Arithmetic mean of token vectors; out-of-vocabulary tokens count as zeros.
pub fn compose_avg<S: AsRef<str>>(tokens: &[S], table: &TokenTable) -> Result<Vec<f64>> {
    weighted_mean(tokens, table, |_| 1.0)
}

/// SIF weighted mean: each token vector is scaled by `a / (a + 1/rank)`.
pub fn sif_weighted_mean<S: AsRef<str>>(tokens: &[S], table: &TokenTable, a: f64) -> Result<Vec<f64>> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Validation(format!("SIF parameter must be positive, got {a}")));
    }
    weighted_mean(tokens, table, |rank| sif_weight(rank, a))
}

/// Weight given to a token of 1-based frequency rank `rank`.
pub fn sif_weight(rank: usize, a: f64) -> f64 {
    a / (a + 1.0 / rank as f64)
}

fn weighted_mean<S: AsRef<str>>(tokens: &[S], table: &TokenTable, weight: impl Fn(usize) -> f64) -> Result<Vec<f64>> {
    if tokens.is_empty() {
        return Err(Error::EmptyComposition);
    }
    let mut acc = vec![0.0; table.dim()];
    for t in tokens {
        let t = t.as_ref();
        if let (Some(v), Some(rank)) = (table.vector(t), table.rank(t)) {
            let w = weight(rank);
            acc.iter_mut().zip(v).for_each(|(a, x)| *a += w * x);
        }
    }
    let m = tokens.len() as f64;
    acc.iter_mut().for_each(|a| *a /= m);
    Ok(acc)
}

/// Unit vector maximising `sum_i (u . row_i)^2`, by power iteration on the
/// `d x d` Gram matrix. `None` when every row is zero.
pub fn first_singular_direction(rows: &[Vec<f64>]) -> Option<Vec<f64>> {
    let d = rows.first()?.len();
    if rows.iter().all(|r| is_zero(r)) {
        return None;
    }
    let mut gram = vec![0.0; d * d];
    for r in rows {
        for i in 0..d {
            if r[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                gram[i * d + j] += r[i] * r[j];
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    normalize(&mut v);
    let mut next = vec![0.0; d];
    for _ in 0..POWER_MAX_ITER {
        for i in 0..d {
            next[i] = dot(&gram[i * d..(i + 1) * d], &v);
        }
        if normalize(&mut next) == 0.0 {
            // The start vector fell into the null space; restart along the largest row.
            let largest = rows.iter().max_by(|a, b| dot(a, a).total_cmp(&dot(b, b))).expect("rows checked non-empty");
            next.copy_from_slice(largest);
            normalize(&mut next);
        }
        let change = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut next);
        if change < POWER_TOL {
            break;
        }
    }
    Some(v)
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Projects every row off the unit vector `u`.
pub fn project_off(rows: &mut [Vec<f64>], u: &[f64]) {
    for r in rows {
        let p = dot(u, r);
        r.iter_mut().zip(u).for_each(|(x, ui)| *x -= p * ui);
    }
}

/// Removes the first singular direction from every row, returning it.
/// An all-zero matrix is left unchanged.
pub fn remove_first_component(rows: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    match first_singular_direction(rows) {
        Some(u) => {
            project_off(rows, &u);
            Some(u)
        }
        None => {
            if !rows.is_empty() {
                log::warn!("principal component removal skipped: all vectors are zero");
            }
            None
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ComposeReport {
    pub tags: usize,
    /// Tags whose preprocessing produced no tokens.
    pub empty_tags: usize,
    /// Tags whose tokens were all out of vocabulary.
    pub oov_tags: usize,
}

/// Tag vectors keyed by raw tag label.
#[derive(Debug, Clone)]
pub struct ComposedEmbeddings {
    pub embeddings: EmbeddingSet,
    pub zero_mask: BTreeSet<String>,
    /// Direction removed by SIF post-processing, if any.
    pub principal: Option<Vec<f64>>,
    pub report: ComposeReport,
}

/// Preprocesses and pools each tag, without principal-component removal.
pub fn compose_tags<S: AsRef<str>>(
    tags: &[S],
    table: &TokenTable,
    strategy: Strategy,
    a: f64,
) -> Result<ComposedEmbeddings> {
    let mut embeddings = EmbeddingSet::new(table.dim());
    let mut zero_mask = BTreeSet::new();
    let mut report = ComposeReport::default();
    for tag in tags {
        let tag = tag.as_ref();
        if embeddings.contains(tag) {
            continue;
        }
        report.tags += 1;
        let tokens = preprocess_tag(tag);
        if tokens.is_empty() {
            report.empty_tags += 1;
            zero_mask.insert(tag.to_string());
            embeddings.insert_with_flag(tag, vec![0.0; table.dim()], false)?;
            continue;
        }
        if tokens.iter().all(|t| table.vector(t).is_none()) {
            report.oov_tags += 1;
            zero_mask.insert(tag.to_string());
            embeddings.insert_with_flag(tag, vec![0.0; table.dim()], false)?;
            continue;
        }
        let v = match strategy {
            Strategy::Avg => compose_avg(&tokens, table)?,
            Strategy::Sif => sif_weighted_mean(&tokens, table, a)?,
        };
        embeddings.insert_with_flag(tag, v, true)?;
    }
    if report.empty_tags + report.oov_tags > 0 {
        log::info!(
            "{} of {} tags have no in-vocabulary token ({} empty after preprocessing)",
            report.empty_tags + report.oov_tags,
            report.tags,
            report.empty_tags
        );
    }
    Ok(ComposedEmbeddings { embeddings, zero_mask, principal: None, report })
}

/// Full composition pipeline for one language: preprocessing, pooling and,
/// for SIF, removal of the first singular direction of the tag matrix.
pub fn build_tag_embeddings<S: AsRef<str>>(
    tags: &[S],
    table: &TokenTable,
    strategy: Strategy,
    a: f64,
) -> Result<ComposedEmbeddings> {
    if tags.is_empty() {
        return Err(Error::Validation("no tags to compose".into()));
    }
    let mut composed = compose_tags(tags, table, strategy, a)?;
    if strategy == Strategy::Sif {
        let mut rows: Vec<Vec<f64>> = composed.embeddings.iter().map(|(_, v)| v.to_vec()).collect();
        composed.principal = remove_first_component(&mut rows);
        composed.embeddings = rebuild(&composed.embeddings, rows, &composed.zero_mask)?;
    }
    Ok(composed)
}

/// Removes one shared singular direction fitted over several composed sets.
pub fn remove_joint_component(sets: &mut [&mut ComposedEmbeddings]) -> Result<Option<Vec<f64>>> {
    let rows: Vec<Vec<f64>> =
        sets.iter().flat_map(|s| s.embeddings.iter().map(|(_, v)| v.to_vec()).collect::<Vec<_>>()).collect();
    let Some(u) = first_singular_direction(&rows) else {
        return Ok(None);
    };
    for s in sets.iter_mut() {
        let mut rows: Vec<Vec<f64>> = s.embeddings.iter().map(|(_, v)| v.to_vec()).collect();
        project_off(&mut rows, &u);
        s.embeddings = rebuild(&s.embeddings, rows, &s.zero_mask)?;
        s.principal = Some(u.clone());
    }
    Ok(Some(u))
}

fn rebuild(old: &EmbeddingSet, rows: Vec<Vec<f64>>, zero_mask: &BTreeSet<String>) -> Result<EmbeddingSet> {
    let mut out = EmbeddingSet::new(old.dim());
    for (id, row) in old.ids().iter().zip(rows) {
        out.insert_with_flag(id.clone(), row, !zero_mask.contains(id))?;
    }
    Ok(out)
}
