use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::corpus::SplitPolicy;
use crate::geometry::ScorerSpec;

/// Seed and cross-validation settings shared by all cards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunOptions {
    pub seed: u64,
    pub cv_folds: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { seed: 0, cv_folds: 5 }
    }
}

/// Which documents a card evaluates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    All,
    #[default]
    Test,
}

fn manifest_split() -> SplitPolicy {
    SplitPolicy::UseManifest
}

/// How the proxy score is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProxySpec {
    /// A precomputed label column.
    Label { name: String },
    /// A probe for `label` trained on the training split of an embedding
    /// variant (logistic for binary labels, linear otherwise).
    Probe {
        label: String,
        #[serde(default)]
        variant: Option<String>,
        #[serde(default = "manifest_split")]
        split: SplitPolicy,
        #[serde(default)]
        evaluate_on: Scope,
    },
    /// `w·e + bias` with `w` read from a 1-row matrix file, relative to the
    /// manifest directory.
    Linear {
        weights_path: PathBuf,
        #[serde(default)]
        bias: f64,
        #[serde(default)]
        variant: Option<String>,
    },
    /// Differential score between two paired variants.
    Neutralized {
        scorer: ScorerSpec,
        observed_variant: String,
        baseline_variant: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Card1Config {
    /// Variants to compare; empty means all.
    pub variants: Vec<String>,
    /// Binary label for per-variant AUC.
    pub label: Option<String>,
    pub warn_below: f64,
    pub fail_below: f64,
    pub excellent_at: f64,
}

impl Default for Card1Config {
    fn default() -> Self {
        Self {
            variants: Vec::new(),
            label: None,
            warn_below: 0.75,
            fail_below: 0.5,
            excellent_at: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Card2Config {
    pub gold: Option<String>,
    /// Label columns holding independent ratings of the gold measure.
    pub gold_raters: Vec<String>,
    pub min_gold: usize,
    /// Gold reliability (Krippendorff's alpha) below this raises a warning.
    pub reliability_warn_below: f64,
}

impl Default for Card2Config {
    fn default() -> Self {
        Self {
            gold: None,
            gold_raters: Vec::new(),
            min_gold: 30,
            reliability_warn_below: 0.667,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Card3Config {
    /// Nuisance blocks; empty means every block in the manifest.
    pub blocks: Vec<String>,
    pub label: Option<String>,
    pub surrogacy_warn: f64,
    pub surrogacy_fail: f64,
    pub ridge_fallback: bool,
    /// Refit over every non-empty subset of blocks when there are at most
    /// this many.
    pub max_subset_blocks: usize,
}

impl Default for Card3Config {
    fn default() -> Self {
        Self {
            blocks: Vec::new(),
            label: None,
            surrogacy_warn: 0.7,
            surrogacy_fail: 0.95,
            ridge_fallback: false,
            max_subset_blocks: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Card4Config {
    pub min_per_group: usize,
}

impl Default for Card4Config {
    fn default() -> Self {
        Self { min_per_group: 2 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Card5Config {
    pub outcome: Option<String>,
    pub controls: Vec<String>,
    pub placebo: Option<String>,
    pub ridge_fallback: bool,
}

fn all_cards() -> Vec<u8> {
    vec![1, 2, 3, 4, 5]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    #[serde(default = "all_cards")]
    pub cards: Vec<u8>,
    #[serde(default)]
    pub run: RunOptions,
    pub proxy: ProxySpec,
    #[serde(default)]
    pub card1: Card1Config,
    #[serde(default)]
    pub card2: Card2Config,
    #[serde(default)]
    pub card3: Card3Config,
    #[serde(default)]
    pub card4: Card4Config,
    #[serde(default)]
    pub card5: Card5Config,
}

impl SuiteConfig {
    pub fn new(proxy: ProxySpec) -> Self {
        Self {
            cards: all_cards(),
            run: RunOptions::default(),
            proxy,
            card1: Card1Config::default(),
            card2: Card2Config::default(),
            card3: Card3Config::default(),
            card4: Card4Config::default(),
            card5: Card5Config::default(),
        }
    }
}
