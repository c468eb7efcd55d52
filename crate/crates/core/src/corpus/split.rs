use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named, pairwise-disjoint groups of document indices.
///
/// Order is significant: k-fold assignments list `fold_0 .. fold_{k-1}`,
/// holdout assignments list `train` then `test`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SplitAssignment {
    parts: IndexMap<String, Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitPolicy {
    UseManifest,
    KFold { k: usize, seed: u64 },
    Holdout { fraction: f64, seed: u64 },
}

impl SplitAssignment {
    pub fn new(parts: IndexMap<String, Vec<usize>>) -> Self {
        Self { parts }
    }

    pub fn k_fold(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidInput(format!("k-fold needs k >= 2, got {k}")));
        }
        if k > n {
            return Err(Error::InvalidInput(format!(
                "k = {k} exceeds document count {n}"
            )));
        }
        let order = shuffled(n, seed);
        let mut parts = IndexMap::new();
        let (base, extra) = (n / k, n % k);
        let mut start = 0;
        for f in 0..k {
            let len = base + usize::from(f < extra);
            let mut fold = order[start..start + len].to_vec();
            fold.sort_unstable();
            parts.insert(format!("fold_{f}"), fold);
            start += len;
        }
        Ok(Self { parts })
    }

    /// `fraction` of the documents (rounded) go to `test`, the rest to `train`.
    pub fn holdout(n: usize, fraction: f64, seed: u64) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidInput(format!(
                "holdout fraction must lie in (0, 1), got {fraction}"
            )));
        }
        let n_test = ((n as f64) * fraction).round() as usize;
        if n_test == 0 || n_test == n {
            return Err(Error::InvalidInput(format!(
                "holdout fraction {fraction} leaves an empty part for {n} documents"
            )));
        }
        let order = shuffled(n, seed);
        let mut test = order[..n_test].to_vec();
        let mut train = order[n_test..].to_vec();
        test.sort_unstable();
        train.sort_unstable();
        let mut parts = IndexMap::new();
        parts.insert("train".to_string(), train);
        parts.insert("test".to_string(), test);
        Ok(Self { parts })
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&[usize]> {
        self.parts.get(name).map(Vec::as_slice)
    }

    pub fn parts(&self) -> impl Iterator<Item = (&str, &[usize])> {
        self.parts.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn folds(&self) -> impl Iterator<Item = &[usize]> {
        self.parts.values().map(Vec::as_slice)
    }

    /// Training and held-out indices. Uses parts named `train`/`test` when
    /// present, otherwise holds out the last part and trains on the rest.
    pub fn train_test(&self) -> Result<(Vec<usize>, Vec<usize>)> {
        if let (Some(train), Some(test)) = (self.parts.get("train"), self.parts.get("test")) {
            return Ok((train.clone(), test.clone()));
        }
        if self.parts.len() < 2 {
            return Err(Error::InvalidInput(
                "split assignment needs at least two parts".into(),
            ));
        }
        let last = self.parts.len() - 1;
        let test = self.parts[last].clone();
        let train = self.parts.values().take(last).flatten().copied().collect();
        Ok((train, test))
    }

    /// Checks that every index is below `n` and appears in at most one part.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut owner: Vec<Option<&str>> = vec![None; n];
        for (name, indices) in &self.parts {
            for &i in indices {
                if i >= n {
                    return Err(Error::integrity(
                        format!("splits.{name}"),
                        format!("index {i} out of range for {n} documents"),
                    ));
                }
                if let Some(prev) = owner[i] {
                    return Err(Error::integrity(
                        format!("splits.{name}"),
                        format!("index {i} already assigned to split {prev:?}"),
                    ));
                }
                owner[i] = Some(name);
            }
        }
        Ok(())
    }
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ten_docs_five_folds_of_two() {
        let s = SplitAssignment::k_fold(10, 5, 1).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s.folds().all(|f| f.len() == 2));
    }

    #[test]
    fn holdout_is_seven_three_and_repeatable() {
        let a = SplitAssignment::holdout(10, 0.3, 1).unwrap();
        let b = SplitAssignment::holdout(10, 0.3, 1).unwrap();
        assert_eq!(a.get("train").unwrap().len(), 7);
        assert_eq!(a.get("test").unwrap().len(), 3);
        assert_eq!(a, b);
    }

    #[test]
    fn two_thousand_docs_even_folds() {
        let s = SplitAssignment::k_fold(2000, 5, 42).unwrap();
        let sizes: Vec<_> = s.folds().map(<[usize]>::len).collect();
        assert_eq!(sizes, vec![400; 5]);
    }

    #[test]
    fn k_above_n_is_rejected() {
        assert!(SplitAssignment::k_fold(3, 4, 0).is_err());
    }

    #[test]
    fn overlapping_parts_fail_validation() {
        let mut parts = IndexMap::new();
        parts.insert("a".to_string(), vec![0, 1]);
        parts.insert("b".to_string(), vec![1, 2]);
        let err = SplitAssignment::new(parts).validate(3).unwrap_err();
        assert!(err.to_string().contains("splits.b"));
    }

    proptest! {
        #[test]
        fn k_fold_partitions_index_set(n in 2usize..300, k in 2usize..12, seed in any::<u64>()) {
            prop_assume!(k <= n);
            let s = SplitAssignment::k_fold(n, k, seed).unwrap();
            s.validate(n).unwrap();
            let mut all: Vec<usize> = s.folds().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }
}
