//! Embedding-space diagnostics: similarity decompositions over a known
//! concept/nuisance split, differential scoring against a baseline embedding,
//! iterative nullspace projection and the rotation-ambiguity experiment.

mod neutralize;
mod nullspace;
mod rotation;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use neutralize::{
    neutralize_matrix, neutralize_score, CosineToReference, LinearProbe, Scorer, ScorerRegistry,
    ScorerSpec,
};
pub use nullspace::{nullspace_project, ProjectionState, INLP_TOLERANCE};
pub use rotation::{rotation_ambiguity_experiment, AmbiguityReport};

/// An embedding with its concept and nuisance coordinates held apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEmbedding {
    pub concept_part: Vec<f64>,
    pub nuisance_part: Vec<f64>,
}

impl SplitEmbedding {
    pub fn new(concept_part: Vec<f64>, nuisance_part: Vec<f64>) -> Result<Self> {
        if concept_part.is_empty() && nuisance_part.is_empty() {
            return Err(Error::InvalidInput("split embedding has no coordinates".into()));
        }
        Ok(Self { concept_part, nuisance_part })
    }

    pub fn norm(&self) -> f64 {
        (dot(&self.concept_part, &self.concept_part) + dot(&self.nuisance_part, &self.nuisance_part)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub total: f64,
    pub concept_term: f64,
    pub nuisance_term: f64,
    /// `|nuisance| / (|concept| + |nuisance|)`, 0 when both terms vanish.
    pub dominance_ratio: f64,
}

impl DecompositionReport {
    fn new(concept_term: f64, nuisance_term: f64, total: f64) -> Self {
        let denom = concept_term.abs() + nuisance_term.abs();
        let dominance_ratio = if denom == 0.0 { 0.0 } else { nuisance_term.abs() / denom };
        Self { total, concept_term, nuisance_term, dominance_ratio }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_parts(a: &SplitEmbedding, b: &SplitEmbedding) -> Result<()> {
    for (x, y) in [
        (a.concept_part.len(), b.concept_part.len()),
        (a.nuisance_part.len(), b.nuisance_part.len()),
    ] {
        if x != y {
            return Err(Error::DimensionMismatch { expected: x, actual: y });
        }
    }
    Ok(())
}

/// Cosine similarity split into the concept and nuisance inner products,
/// both divided by the full-vector norms.
pub fn cosine_decomposition(a: &SplitEmbedding, b: &SplitEmbedding) -> Result<DecompositionReport> {
    check_parts(a, b)?;
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        return Err(Error::InvalidInput("cosine of a zero-norm embedding".into()));
    }
    let cc = dot(&a.concept_part, &b.concept_part);
    let zz = dot(&a.nuisance_part, &b.nuisance_part);
    Ok(DecompositionReport::new(cc / denom, zz / denom, (cc + zz) / denom))
}

/// Squared Euclidean distance as the sum of concept and nuisance squared
/// distances.
pub fn euclidean_decomposition(a: &SplitEmbedding, b: &SplitEmbedding) -> Result<DecompositionReport> {
    check_parts(a, b)?;
    let sq = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
    let c = sq(&a.concept_part, &b.concept_part);
    let z = sq(&a.nuisance_part, &b.nuisance_part);
    Ok(DecompositionReport::new(c, z, c + z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn se(c: &[f64], z: &[f64]) -> SplitEmbedding {
        SplitEmbedding::new(c.to_vec(), z.to_vec()).unwrap()
    }

    #[test]
    fn cosine_without_nuisance_is_plain_cosine() {
        let a = se(&[1.0, 2.0], &[0.0, 0.0]);
        let b = se(&[2.0, -1.0], &[0.0, 0.0]);
        let r = cosine_decomposition(&a, &b).unwrap();
        assert_eq!(r.total, 0.0);
        assert_eq!(r.dominance_ratio, 0.0);
    }

    #[test]
    fn cosine_large_shared_nuisance() {
        let a = se(&[1.0, 0.0], &[10.0, 0.0]);
        let r = cosine_decomposition(&a, &a.clone()).unwrap();
        assert!((r.total - 1.0).abs() < 1e-15);
        assert!((r.nuisance_term - 100.0 / 101.0).abs() < 1e-15);
        assert!((r.concept_term - 1.0 / 101.0).abs() < 1e-15);
    }

    #[test]
    fn same_topic_failure() {
        let a = se(&[1.0, 0.0], &[50.0, 20.0]);
        let b = se(&[0.0, 1.0], &[50.0, 20.0]);
        let r = cosine_decomposition(&a, &b).unwrap();
        assert_eq!(r.concept_term, 0.0);
        assert!(r.total > 0.999);
        assert_eq!(r.dominance_ratio, 1.0);
    }

    #[test]
    fn cosine_zero_norm_errors() {
        let a = se(&[0.0], &[0.0]);
        assert!(cosine_decomposition(&a, &se(&[1.0], &[0.0])).is_err());
    }

    #[test]
    fn euclidean_pythagorean() {
        let a = se(&[3.0, 0.0], &[4.0, 0.0]);
        let b = se(&[0.0, 0.0], &[0.0, 0.0]);
        let r = euclidean_decomposition(&a, &b).unwrap();
        assert_eq!((r.concept_term, r.nuisance_term, r.total), (9.0, 16.0, 25.0));
        let r = euclidean_decomposition(&a, &a).unwrap();
        assert_eq!((r.total, r.dominance_ratio), (0.0, 0.0));
    }

    #[test]
    fn mismatched_parts() {
        assert!(euclidean_decomposition(&se(&[1.0], &[]), &se(&[1.0, 2.0], &[])).is_err());
        assert!(SplitEmbedding::new(vec![], vec![]).is_err());
    }

    proptest! {
        #[test]
        fn euclidean_additive(
            v in prop::collection::vec(-100.0f64..100.0, 100),
            split in 1usize..49,
        ) {
            let a = se(&v[..split], &v[split..50]);
            let b = se(&v[50..50 + split], &v[50 + split..]);
            let r = euclidean_decomposition(&a, &b).unwrap();
            let direct: f64 = v[..50].iter().zip(&v[50..]).map(|(p, q)| (p - q).powi(2)).sum();
            prop_assert!((r.total - direct).abs() <= 1e-9 * direct.max(1e-300));
        }
    }
}
