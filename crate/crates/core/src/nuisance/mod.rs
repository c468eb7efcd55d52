//! Nuisance feature blocks built from raw text.

mod style;
mod topic;

use std::collections::BTreeMap;
use std::path::Path;

use crate::corpus::{write_feature_block, EmbeddingMatrix, FeatureBlockRef};
use crate::error::Result;

pub use style::{style_block, style_features, STYLE_FEATURES};
pub use topic::{
    apply_topic_block, fit_topic_block, tokenize, FitSplit, TopicModelState, DEFAULT_TOPIC_DIMS,
};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBlock {
    pub block_name: String,
    pub feature_names: Vec<String>,
    /// documents x features
    pub matrix: EmbeddingMatrix,
    pub provenance: BTreeMap<String, String>,
}

impl FeatureBlock {
    /// Writes the matrix and its feature-name sidecar under `dir`.
    pub fn write(&self, dir: &Path) -> Result<FeatureBlockRef> {
        write_feature_block(dir, &self.block_name, &self.feature_names, &self.matrix)
    }
}
