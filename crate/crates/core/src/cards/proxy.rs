use serde::{Deserialize, Serialize};

use super::config::{ProxySpec, Scope};
use crate::corpus::{read_matrix, CorpusManifest, LabelKind, SplitPolicy};
use crate::error::{Error, Result};
use crate::geometry::neutralize_matrix;
use crate::stats::{fit, FitOptions, ModelKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxySource {
    EmbeddingProbe,
    ExternalColumn,
    NeutralizedDifferential,
}

/// A score per document standing in for the construct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyScore {
    pub values: Vec<f64>,
    pub source: ProxySource,
    pub variant_id: Option<String>,
    /// Documents the cards should evaluate (sorted); `None` means all.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<Vec<usize>>,
}

impl ProxyScore {
    pub fn new(values: Vec<f64>, source: ProxySource, variant_id: Option<String>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("proxy value at row {i} is not finite")));
        }
        Ok(Self { values, source, variant_id, scope: None })
    }

    pub fn with_scope(mut self, mut rows: Vec<usize>) -> Result<Self> {
        rows.sort_unstable();
        rows.dedup();
        if rows.last().is_some_and(|&r| r >= self.values.len()) {
            return Err(Error::InvalidInput("proxy scope exceeds document count".into()));
        }
        self.scope = Some(rows);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Evaluation rows: the scope, or every document.
    pub fn rows(&self) -> Vec<usize> {
        self.scope.clone().unwrap_or_else(|| (0..self.values.len()).collect())
    }

    pub fn at(&self, rows: &[usize]) -> Vec<f64> {
        rows.iter().map(|&i| self.values[i]).collect()
    }

    pub fn from_label(manifest: &CorpusManifest, name: &str) -> Result<Self> {
        let col = manifest.label(name)?;
        let values = (0..col.len())
            .map(|i| col.get(i).ok_or_else(|| Error::InvalidInput(format!("proxy column {name:?} is missing row {i}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(values, ProxySource::ExternalColumn, None)
    }

    /// `w·e + bias` for every row of `variant`.
    pub fn linear(manifest: &CorpusManifest, variant: &str, weights: &[f64], bias: f64) -> Result<Self> {
        let m = manifest.matrix(variant)?;
        if m.dims() != weights.len() {
            return Err(Error::DimensionMismatch { expected: m.dims(), actual: weights.len() });
        }
        let values = (0..m.rows())
            .map(|i| m.row(i).iter().zip(weights).map(|(a, b)| a * b).sum::<f64>() + bias)
            .collect();
        Self::new(values, ProxySource::EmbeddingProbe, Some(variant.to_string()))
    }

    /// Trains a probe for `label` on the training rows of `split` and scores
    /// every document. Binary labels get a penalized logistic probe whose
    /// score is `p(label = 1 | e)`; real labels get least squares.
    pub fn probe(
        manifest: &CorpusManifest,
        variant: &str,
        label: &str,
        split: &SplitPolicy,
        scope: Scope,
    ) -> Result<Self> {
        let col = manifest.label(label)?;
        let assignment = manifest.resolve_splits(split)?;
        let (train, test) = assignment.train_test()?;
        let train: Vec<usize> = train.into_iter().filter(|&i| col.get(i).is_some()).collect();
        let m = manifest.matrix(variant)?;
        let y: Vec<f64> = train.iter().map(|&i| col.get(i).unwrap_or_default()).collect();
        let model = match col.kind {
            LabelKind::Binary => ModelKind::Logistic,
            LabelKind::Real => ModelKind::Ols,
        };
        let options = FitOptions { ridge_fallback: true, standardize: false, ..FitOptions::default() };
        let fitted = fit(model, &m.select_rows(&train), &y, &options)?;
        let values = fitted.predict(&m.to_dmatrix());
        let proxy = Self::new(values, ProxySource::EmbeddingProbe, Some(variant.to_string()))?;
        match scope {
            Scope::All => Ok(proxy),
            Scope::Test => proxy.with_scope(test),
        }
    }
}

fn default_variant<'a>(manifest: &'a CorpusManifest, variant: &'a Option<String>) -> Result<&'a str> {
    match variant {
        Some(v) => Ok(v),
        None => manifest
            .variants
            .first()
            .map(|v| v.descriptor.variant_id.as_str())
            .ok_or_else(|| Error::Missing("embedding variant".into())),
    }
}

fn read_weights(manifest: &CorpusManifest, path: &std::path::Path) -> Result<Vec<f64>> {
    let full = manifest.base_dir().join(path);
    let w = read_matrix(&full)?;
    if w.rows() != 1 {
        return Err(Error::InvalidInput(format!("weights file {} has {} rows, expected 1", full.display(), w.rows())));
    }
    Ok(w.values().to_vec())
}

pub fn build_proxy(manifest: &CorpusManifest, spec: &ProxySpec) -> Result<ProxyScore> {
    match spec {
        ProxySpec::Label { name } => ProxyScore::from_label(manifest, name),
        ProxySpec::Probe { label, variant, split, evaluate_on } => {
            ProxyScore::probe(manifest, default_variant(manifest, variant)?, label, split, *evaluate_on)
        }
        ProxySpec::Linear { weights_path, bias, variant } => {
            let w = read_weights(manifest, weights_path)?;
            ProxyScore::linear(manifest, default_variant(manifest, variant)?, &w, *bias)
        }
        ProxySpec::Neutralized { scorer, observed_variant, baseline_variant } => {
            let scorer = scorer.build();
            let obs = manifest.matrix(observed_variant)?;
            let base = manifest.matrix(baseline_variant)?;
            let values = neutralize_matrix(scorer.as_ref(), &obs, &base)?;
            ProxyScore::new(values, ProxySource::NeutralizedDifferential, Some(observed_variant.clone()))
        }
    }
}

/// One proxy per embedding variant, built the same way. Variants default to
/// all variants in the manifest.
pub fn build_variant_proxies(manifest: &CorpusManifest, spec: &ProxySpec, variants: &[String]) -> Result<Vec<ProxyScore>> {
    let ids: Vec<String> = if variants.is_empty() {
        manifest.variants.iter().map(|v| v.descriptor.variant_id.clone()).collect()
    } else {
        variants.to_vec()
    };
    match spec {
        ProxySpec::Probe { label, split, evaluate_on, .. } => ids
            .iter()
            .map(|v| ProxyScore::probe(manifest, v, label, split, *evaluate_on))
            .collect(),
        ProxySpec::Linear { weights_path, bias, .. } => {
            let w = read_weights(manifest, weights_path)?;
            ids.iter().map(|v| ProxyScore::linear(manifest, v, &w, *bias)).collect()
        }
        _ => Err(Error::Missing(
            "per-variant scores (the proxy is not computed from an embedding variant)".into(),
        )),
    }
}
