//! TF-IDF weighting followed by truncated SVD.
//!
//! Tokens are lowercased runs of alphanumeric characters, keeping those of
//! two or more characters. Weights are `tf * (ln((1 + N) / (1 + df)) + 1)`
//! with rows scaled to unit L2 norm. Components come from randomized
//! subspace iteration run to convergence, so results are deterministic.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::FeatureBlock;
use crate::corpus::EmbeddingMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_TOPIC_DIMS: usize = 100;
const OVERSAMPLE: usize = 10;
const MAX_SWEEPS: usize = 500;
const SWEEP_TOL: f64 = 1e-12;
const SKETCH_SEED: u64 = 0x7f4a_7c15;

pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(str::to_lowercase)
        .collect()
}

/// Which rows a topic model is fit on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FitSplit<'a> {
    All,
    Rows { name: &'a str, indices: &'a [usize] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModelState {
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
    /// `dims x vocab`, rows orthonormal.
    pub components: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub fitted_on: String,
}

type SparseRow = Vec<(usize, f64)>;

fn tfidf_row(text: &str, vocab: &BTreeMap<String, usize>, idf: &[f64]) -> SparseRow {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for tok in tokenize(text) {
        if let Some(&j) = vocab.get(&tok) {
            *counts.entry(j).or_default() += 1.0;
        }
    }
    let mut row: SparseRow = counts.into_iter().map(|(j, tf)| (j, tf * idf[j])).collect();
    let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, v) in &mut row {
            *v /= norm;
        }
    }
    row
}

/// `A * M` for sparse `A` (rows) and dense `M` (vocab x l).
fn sparse_mul(rows: &[SparseRow], m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows.len(), m.ncols());
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            for c in 0..m.ncols() {
                out[(i, c)] += v * m[(j, c)];
            }
        }
    }
    out
}

/// `A^T * M` for sparse `A` (rows) and dense `M` (n x l).
fn sparse_tmul(rows: &[SparseRow], vocab: usize, m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(vocab, m.ncols());
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            for c in 0..m.ncols() {
                out[(j, c)] += v * m[(i, c)];
            }
        }
    }
    out
}

fn orthonormalize(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

/// Top right singular vectors (as columns) and singular values of the
/// sparse matrix, by subspace iteration with Rayleigh–Ritz extraction.
fn truncated_svd(rows: &[SparseRow], vocab: usize, dims: usize) -> (DMatrix<f64>, Vec<f64>) {
    let n = rows.len();
    let width = (dims + OVERSAMPLE).min(n).min(vocab);
    let mut rng = ChaCha8Rng::seed_from_u64(SKETCH_SEED);
    let omega = DMatrix::from_fn(vocab, width, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut q = orthonormalize(sparse_mul(rows, &omega));
    let mut previous: Option<Vec<f64>> = None;
    let mut ritz = ritz_step(rows, vocab, &q);
    for _ in 0..MAX_SWEEPS {
        let z = orthonormalize(sparse_tmul(rows, vocab, &q));
        q = orthonormalize(sparse_mul(rows, &z));
        ritz = ritz_step(rows, vocab, &q);
        let top: Vec<f64> = ritz.1.iter().take(dims).copied().collect();
        if let Some(prev) = &previous {
            let scale = top.first().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
            let change = top
                .iter()
                .zip(prev)
                .map(|(a, b)| (a - b).abs() / scale)
                .fold(0.0, f64::max);
            if change < SWEEP_TOL {
                break;
            }
        }
        previous = Some(top);
    }
    let (vectors, values) = ritz;
    let mut comps = vectors.columns(0, dims).into_owned();
    for c in 0..dims {
        let col = comps.column(c);
        let pivot = col.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(0.0);
        if pivot < 0.0 {
            comps.column_mut(c).neg_mut();
        }
    }
    (comps, values.into_iter().take(dims).collect())
}

/// Right singular vectors and values of `Q^T A`, sorted descending.
fn ritz_step(rows: &[SparseRow], vocab: usize, q: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let m = sparse_tmul(rows, vocab, q); // = (Q^T A)^T, vocab x width
    let svd = m.svd(true, false);
    let u = svd.u.expect("left vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let vectors = DMatrix::from_fn(vocab, order.len(), |i, c| u[(i, order[c])]);
    let values = order.iter().map(|&c| svd.singular_values[c]).collect();
    (vectors, values)
}

pub fn fit_topic_block<S: AsRef<str>>(texts: &[S], dims: usize, fit_split: &FitSplit<'_>) -> Result<TopicModelState> {
    let (fit_texts, fitted_on): (Vec<&str>, String) = match fit_split {
        FitSplit::All => (texts.iter().map(AsRef::as_ref).collect(), "all".to_string()),
        FitSplit::Rows { name, indices } => {
            let mut out = Vec::with_capacity(indices.len());
            for &i in *indices {
                let t = texts.get(i).ok_or_else(|| {
                    Error::InvalidInput(format!("fit index {i} out of range for {} texts", texts.len()))
                })?;
                out.push(t.as_ref());
            }
            (out, (*name).to_string())
        }
    };

    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for t in &fit_texts {
        let uniq: BTreeSet<String> = tokenize(t).into_iter().collect();
        for tok in uniq {
            *df.entry(tok).or_default() += 1;
        }
    }
    if df.is_empty() {
        return Err(Error::InvalidInput("empty vocabulary".into()));
    }
    let n_docs = fit_texts.len() as f64;
    let vocabulary: BTreeMap<String, usize> = df.keys().enumerate().map(|(i, k)| (k.clone(), i)).collect();
    let idf: Vec<f64> = df
        .values()
        .map(|&d| ((1.0 + n_docs) / (1.0 + d as f64)).ln() + 1.0)
        .collect();
    if dims == 0 || dims > vocabulary.len().min(fit_texts.len()) {
        return Err(Error::InvalidInput(format!(
            "topic dims {dims} must lie in 1..={} (vocabulary {}, fit documents {})",
            vocabulary.len().min(fit_texts.len()),
            vocabulary.len(),
            fit_texts.len()
        )));
    }

    let rows: Vec<SparseRow> = fit_texts.iter().map(|t| tfidf_row(t, &vocabulary, &idf)).collect();
    let (comps, singular_values) = truncated_svd(&rows, vocabulary.len(), dims);
    let components = (0..dims).map(|c| comps.column(c).iter().copied().collect()).collect();
    Ok(TopicModelState {
        vocabulary,
        idf,
        components,
        singular_values,
        fitted_on,
    })
}

impl TopicModelState {
    pub fn dims(&self) -> usize {
        self.components.len()
    }

    pub fn project(&self, text: &str) -> Vec<f64> {
        let row = tfidf_row(text, &self.vocabulary, &self.idf);
        self.components
            .iter()
            .map(|comp| row.iter().map(|&(j, v)| v * comp[j]).sum())
            .collect()
    }

    /// Squared Frobenius residual of the TF-IDF rows after projecting onto
    /// the retained components.
    pub fn reconstruction_error<S: AsRef<str>>(&self, texts: &[S]) -> f64 {
        texts
            .iter()
            .map(|t| {
                let row = tfidf_row(t.as_ref(), &self.vocabulary, &self.idf);
                let total: f64 = row.iter().map(|(_, v)| v * v).sum();
                let kept: f64 = self.project(t.as_ref()).iter().map(|p| p * p).sum();
                total - kept
            })
            .sum()
    }
}

/// Projects texts onto fitted components; out-of-vocabulary tokens are
/// ignored, so an all-OOV text maps to the zero vector.
pub fn apply_topic_block<S: AsRef<str>>(state: &TopicModelState, texts: &[S]) -> FeatureBlock {
    let dims = state.dims();
    let values: Vec<f64> = texts.iter().flat_map(|t| state.project(t.as_ref())).collect();
    let matrix = EmbeddingMatrix::new(texts.len(), dims, values, "topic").expect("projections are finite");
    FeatureBlock {
        block_name: "topic".to_string(),
        feature_names: (0..dims).map(|i| format!("topic_{i}")).collect(),
        matrix,
        provenance: BTreeMap::from([
            ("kind".to_string(), "tfidf_svd".to_string()),
            ("dims".to_string(), dims.to_string()),
            ("vocabulary".to_string(), state.vocabulary.len().to_string()),
            ("fitted_on".to_string(), state.fitted_on.clone()),
        ]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{logistic_fit, FitOptions};

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn tokenizer_rules() {
        assert_eq!(tokenize("I'm A-OK, Thanks!! x2"), vec!["ok", "thanks", "x2"]);
    }

    #[test]
    fn identical_documents_share_coordinates() {
        let texts = ["the cat sat", "the cat sat"];
        let st = fit_topic_block(&texts, 1, &FitSplit::All).unwrap();
        let b = apply_topic_block(&st, &texts);
        assert_eq!(b.matrix.row(0), b.matrix.row(1));
    }

    #[test]
    fn disjoint_vocabularies_are_orthogonal() {
        let texts = ["aa aa", "bb bb"];
        let st = fit_topic_block(&texts, 2, &FitSplit::All).unwrap();
        let b = apply_topic_block(&st, &texts);
        assert!(dot(b.matrix.row(0), b.matrix.row(1)).abs() < 1e-12);
        assert!(dot(b.matrix.row(0), b.matrix.row(0)) > 0.5);
    }

    fn two_topic_corpus() -> (Vec<String>, Vec<f64>) {
        let sport = ["goal", "match", "team", "score", "coach", "league", "keeper", "pitch"];
        let food = ["pasta", "sauce", "bread", "oven", "salt", "flour", "butter", "garlic"];
        let mut texts = Vec::new();
        let mut labels = Vec::new();
        for i in 0..100 {
            let words = if i % 2 == 0 { &sport } else { &food };
            let t: Vec<&str> = (0..6).map(|k| words[(i * 7 + k * 3) % 8]).collect();
            texts.push(t.join(" "));
            labels.push(f64::from(u8::from(i % 2 == 0)));
        }
        (texts, labels)
    }

    #[test]
    fn two_topic_corpus_is_linearly_separable() {
        let (texts, labels) = two_topic_corpus();
        let st = fit_topic_block(&texts, 2, &FitSplit::All).unwrap();
        let b = apply_topic_block(&st, &texts);
        let probe = logistic_fit(&b.matrix.to_dmatrix(), &labels, &FitOptions::default()).unwrap();
        let pred = probe.predict(&b.matrix.to_dmatrix());
        let correct = pred
            .iter()
            .zip(&labels)
            .filter(|(p, l)| (**p > 0.5) == (**l > 0.5))
            .count();
        assert!(correct as f64 / 100.0 >= 0.95, "accuracy {correct}/100");
    }

    #[test]
    fn apply_reproduces_fit_projection_and_handles_oov() {
        let (texts, _) = two_topic_corpus();
        let st = fit_topic_block(&texts, 4, &FitSplit::All).unwrap();
        let b = apply_topic_block(&st, &texts);
        // fit-time projection computed directly from the sparse rows
        let rows: Vec<SparseRow> = texts.iter().map(|t| tfidf_row(t, &st.vocabulary, &st.idf)).collect();
        for (i, row) in rows.iter().enumerate() {
            for (c, comp) in st.components.iter().enumerate() {
                let direct: f64 = row.iter().map(|&(j, v)| v * comp[j]).sum();
                assert!((direct - b.matrix.row(i)[c]).abs() < 1e-9);
            }
        }
        let oov = apply_topic_block(&st, &["zzz qqq unseen"]);
        assert!(oov.matrix.row(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn permutation_equivariance() {
        let (texts, _) = two_topic_corpus();
        let st = fit_topic_block(&texts, 3, &FitSplit::All).unwrap();
        let fwd = apply_topic_block(&st, &texts[..10]);
        let rev: Vec<&String> = texts[..10].iter().rev().collect();
        let bwd = apply_topic_block(&st, &rev);
        for i in 0..10 {
            assert_eq!(fwd.matrix.row(i), bwd.matrix.row(9 - i));
        }
    }

    #[test]
    fn components_are_orthonormal_and_errors_shrink() {
        let (mut texts, _) = two_topic_corpus();
        texts.extend((0..40).map(|i| format!("mixed goal pasta token{} shared{}", i % 9, i % 4)));
        let mut last = f64::INFINITY;
        for dims in [1, 2, 4, 8] {
            let st = fit_topic_block(&texts, dims, &FitSplit::All).unwrap();
            for a in 0..dims {
                for b in 0..dims {
                    let d = dot(&st.components[a], &st.components[b]);
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((d - expect).abs() < 1e-10);
                }
            }
            let err = st.reconstruction_error(&texts);
            assert!(err <= last + 1e-9, "dims {dims}: {err} > {last}");
            last = err;
        }
    }

    #[test]
    fn fit_split_restricts_vocabulary() {
        let texts = ["alpha beta", "gamma delta", "alpha gamma"];
        let st = fit_topic_block(&texts, 1, &FitSplit::Rows { name: "train", indices: &[0, 2] }).unwrap();
        assert!(!st.vocabulary.contains_key("delta"));
        assert_eq!(st.fitted_on, "train");
    }

    #[test]
    fn errors() {
        assert!(fit_topic_block(&["a b c"], 1, &FitSplit::All).is_err());
        assert!(fit_topic_block(&["aa bb", "cc"], 3, &FitSplit::All).is_err());
    }
}
