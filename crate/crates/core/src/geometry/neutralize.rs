use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::dot;
use crate::corpus::EmbeddingMatrix;
use crate::error::{Error, Result};

/// A scalar function of one embedding.
pub trait Scorer: Send + Sync {
    fn name(&self) -> &str;

    /// Required input length, if fixed.
    fn dims(&self) -> Option<usize>;

    fn score_unchecked(&self, e: &[f64]) -> f64;

    fn score(&self, e: &[f64]) -> Result<f64> {
        match self.dims() {
            Some(d) if d != e.len() => Err(Error::DimensionMismatch { expected: d, actual: e.len() }),
            _ => Ok(self.score_unchecked(e)),
        }
    }
}

/// `w·e + b`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProbe {
    pub weights: Vec<f64>,
    #[serde(default)]
    pub bias: f64,
}

impl Scorer for LinearProbe {
    fn name(&self) -> &str {
        "linear_probe"
    }

    fn dims(&self) -> Option<usize> {
        Some(self.weights.len())
    }

    fn score_unchecked(&self, e: &[f64]) -> f64 {
        dot(&self.weights, e) + self.bias
    }
}

/// Cosine similarity to a fixed reference vector; 0 for a zero input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosineToReference {
    pub reference: Vec<f64>,
}

impl Scorer for CosineToReference {
    fn name(&self) -> &str {
        "cosine_to_reference"
    }

    fn dims(&self) -> Option<usize> {
        Some(self.reference.len())
    }

    fn score_unchecked(&self, e: &[f64]) -> f64 {
        let denom = (dot(e, e) * dot(&self.reference, &self.reference)).sqrt();
        if denom == 0.0 { 0.0 } else { dot(e, &self.reference) / denom }
    }
}

/// Serializable description of a built-in scorer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScorerSpec {
    LinearProbe { weights: Vec<f64>, #[serde(default)] bias: f64 },
    CosineToReference { reference: Vec<f64> },
}

impl ScorerSpec {
    pub fn build(&self) -> Arc<dyn Scorer> {
        match self {
            Self::LinearProbe { weights, bias } => Arc::new(LinearProbe { weights: weights.clone(), bias: *bias }),
            Self::CosineToReference { reference } => Arc::new(CosineToReference { reference: reference.clone() }),
        }
    }
}

/// Named scorers available to the neutralization diagnostic.
#[derive(Default, Clone)]
pub struct ScorerRegistry {
    scorers: BTreeMap<String, Arc<dyn Scorer>>,
}

impl ScorerRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: impl Into<String>, scorer: Arc<dyn Scorer>) -> &mut Self {
        self.scorers.insert(name.into(), scorer);
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Scorer>> {
        self.scorers
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Missing(format!("scorer '{name}'")))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.scorers.keys().map(String::as_str)
    }
}

/// `f(e_obs) - f(e_base)`
pub fn neutralize_score(scorer: &dyn Scorer, e_obs: &[f64], e_base: &[f64]) -> Result<f64> {
    if e_obs.len() != e_base.len() {
        return Err(Error::DimensionMismatch { expected: e_obs.len(), actual: e_base.len() });
    }
    Ok(scorer.score(e_obs)? - scorer.score(e_base)?)
}

/// Row-wise differential scores for paired observed/baseline matrices.
pub fn neutralize_matrix(scorer: &dyn Scorer, obs: &EmbeddingMatrix, base: &EmbeddingMatrix) -> Result<Vec<f64>> {
    if obs.rows() != base.rows() {
        return Err(Error::DimensionMismatch { expected: obs.rows(), actual: base.rows() });
    }
    (0..obs.rows()).map(|i| neutralize_score(scorer, obs.row(i), base.row(i))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_inputs_score_zero() {
        let e = [0.3, -1.0, 2.0];
        let linear = LinearProbe { weights: vec![1.0, 2.0, 3.0], bias: 0.5 };
        let cosine = CosineToReference { reference: vec![1.0, 1.0, 0.0] };
        assert_eq!(neutralize_score(&linear, &e, &e).unwrap(), 0.0);
        assert_eq!(neutralize_score(&cosine, &e, &e).unwrap(), 0.0);
    }

    #[test]
    fn shift_along_direction() {
        let w = vec![1.0, -2.0, 0.5];
        let u = [0.0, 1.0, 4.0];
        let base = [1.0, 1.0, 1.0];
        let delta = 3.0;
        let obs: Vec<f64> = base.iter().zip(&u).map(|(b, v)| b + delta * v).collect();
        let s = neutralize_score(&LinearProbe { weights: w.clone(), bias: 0.0 }, &obs, &base).unwrap();
        assert!((s - delta * dot(&w, &u)).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let linear = LinearProbe { weights: vec![1.0, 2.0], bias: 0.0 };
        assert!(neutralize_score(&linear, &[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(neutralize_score(&linear, &[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn registry_lookup() {
        let mut reg = ScorerRegistry::new();
        let spec: ScorerSpec = serde_json::from_str(r#"{"kind":"linear_probe","weights":[2.0]}"#).unwrap();
        reg.register("probe", spec.build());
        assert_eq!(reg.get("probe").unwrap().score(&[3.0]).unwrap(), 6.0);
        assert!(reg.get("other").is_err());
        assert_eq!(reg.names().collect::<Vec<_>>(), ["probe"]);
    }

    proptest! {
        #[test]
        fn linear_common_shift_invariance(
            w in prop::collection::vec(-10.0f64..10.0, 8),
            a in prop::collection::vec(-10.0f64..10.0, 8),
            b in prop::collection::vec(-10.0f64..10.0, 8),
            s in prop::collection::vec(-100.0f64..100.0, 8),
        ) {
            let f = LinearProbe { weights: w, bias: 1.0 };
            let before = neutralize_score(&f, &a, &b).unwrap();
            let sa: Vec<f64> = a.iter().zip(&s).map(|(x, y)| x + y).collect();
            let sb: Vec<f64> = b.iter().zip(&s).map(|(x, y)| x + y).collect();
            let after = neutralize_score(&f, &sa, &sb).unwrap();
            let scale: f64 = (0..8).map(|i| f.weights[i].abs() * (a[i].abs() + b[i].abs() + 2.0 * s[i].abs())).sum();
            prop_assert!((before - after).abs() <= 1e-12 * scale.max(1.0));
        }
    }
}
