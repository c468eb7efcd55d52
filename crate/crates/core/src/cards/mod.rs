//! The five validity cards and the suite runner.
//!
//! Every card returns a [`ValidityCardReport`]: named statistics with
//! optional 95% intervals, scalar diagnostics, structured details, flags,
//! and an echo of the configuration that produced it. Statistics a card is
//! expected to report but cannot compute are listed under `unavailable`
//! together with the reason.

mod config;
mod convergent;
mod discriminant;
mod known_groups;
mod predictive;
mod proxy;
mod reliability;
mod suite;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusManifest, SplitAssignment};
use crate::error::{Error, Result};

pub use config::{
    Card1Config, Card2Config, Card3Config, Card4Config, Card5Config, ProxySpec, RunOptions,
    Scope, SuiteConfig,
};
pub use convergent::card2_convergent;
pub use discriminant::card3_discriminant_incremental;
pub use known_groups::card4_known_groups;
pub use predictive::card5_predictive;
pub use proxy::{build_proxy, build_variant_proxies, ProxyScore, ProxySource};
pub use reliability::{card1_reliability, icc_band};
pub use suite::{run_suite, Overall, SuiteReport};

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CardId {
    Reliability,
    Convergent,
    DiscriminantIncremental,
    KnownGroups,
    Predictive,
}

impl CardId {
    pub const ALL: [CardId; 5] = [
        CardId::Reliability,
        CardId::Convergent,
        CardId::DiscriminantIncremental,
        CardId::KnownGroups,
        CardId::Predictive,
    ];

    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.get(usize::from(n).wrapping_sub(1)).copied()
    }

    pub fn title(self) -> &'static str {
        match self {
            CardId::Reliability => "Reliability",
            CardId::Convergent => "Convergent validity",
            CardId::DiscriminantIncremental => "Discriminant and incremental validity",
            CardId::KnownGroups => "Known-groups validity",
            CardId::Predictive => "Predictive validity",
        }
    }

    /// Statistics the card always reports, or marks unavailable.
    pub fn required_statistics(self) -> &'static [&'static str] {
        match self {
            CardId::Reliability => &["icc_2_1", "icc_2_k", "icc_3_1", "n_variants", "auc_min"],
            CardId::Convergent => &["beta_conv_std", "correlation", "r_squared", "cv_r_squared", "gold_reliability"],
            CardId::DiscriminantIncremental => &[
                "step1.r_squared_full",
                "step1.cv_r_squared_full",
                "step2.beta_inc_std",
                "step2.delta_cv",
            ],
            CardId::KnownGroups => &["tau", "cohens_d"],
            CardId::Predictive => &["beta_pred_std", "delta_r_squared", "delta_cv_r_squared", "placebo.beta_pred_std"],
        }
    }
}

impl fmt::Display for CardId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "card{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CardStatus {
    Complete,
    Unavailable,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_hi: Option<f64>,
}

impl Statistic {
    pub fn point(value: f64) -> Self {
        Self { value, ci_lo: None, ci_hi: None }
    }

    pub fn with_ci(value: f64, (lo, hi): (f64, f64)) -> Self {
        Self { value, ci_lo: Some(lo), ci_hi: Some(hi) }
    }

    /// True when the interval exists and contains zero.
    pub fn ci_contains_zero(&self) -> bool {
        matches!((self.ci_lo, self.ci_hi), (Some(lo), Some(hi)) if lo <= 0.0 && hi >= 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagLevel {
    Warn,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flag {
    pub level: FlagLevel,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityCardReport {
    pub schema_version: String,
    pub card_id: CardId,
    pub status: CardStatus,
    pub statistics: BTreeMap<String, Statistic>,
    pub diagnostics: BTreeMap<String, f64>,
    pub details: BTreeMap<String, serde_json::Value>,
    /// statistic name -> reason
    pub unavailable: BTreeMap<String, String>,
    pub flags: Vec<Flag>,
    pub config_echo: serde_json::Value,
}

impl ValidityCardReport {
    pub fn new(card_id: CardId, config_echo: serde_json::Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            card_id,
            status: CardStatus::Complete,
            statistics: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            details: BTreeMap::new(),
            unavailable: BTreeMap::new(),
            flags: Vec::new(),
            config_echo,
        }
    }

    /// A report for a card that could not run at all.
    pub fn not_run(card_id: CardId, status: CardStatus, reason: &str, config_echo: serde_json::Value) -> Self {
        let mut r = Self::new(card_id, config_echo);
        r.status = status;
        for name in card_id.required_statistics() {
            r.unavailable.insert(name.to_string(), reason.to_string());
        }
        r
    }

    pub fn stat(&mut self, name: impl Into<String>, s: Statistic) {
        self.statistics.insert(name.into(), s);
    }

    pub fn diag(&mut self, name: impl Into<String>, v: f64) {
        self.diagnostics.insert(name.into(), v);
    }

    pub fn detail(&mut self, name: impl Into<String>, v: impl Serialize) {
        let v = serde_json::to_value(v).expect("detail serializes");
        self.details.insert(name.into(), v);
    }

    pub fn mark_unavailable(&mut self, name: impl Into<String>, reason: impl Into<String>) {
        self.unavailable.insert(name.into(), reason.into());
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.flags.push(Flag { level: FlagLevel::Warn, message: message.into() });
    }

    pub fn fail(&mut self, message: impl Into<String>) {
        self.flags.push(Flag { level: FlagLevel::Fail, message: message.into() });
    }

    pub fn worst_flag(&self) -> Option<FlagLevel> {
        self.flags.iter().map(|f| f.level).max()
    }

    /// Required statistics that are neither reported nor marked unavailable.
    pub fn missing_required(&self) -> Vec<&'static str> {
        self.card_id
            .required_statistics()
            .iter()
            .copied()
            .filter(|n| !self.statistics.contains_key(*n) && !self.unavailable.contains_key(*n))
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<&Statistic> {
        self.statistics.get(name)
    }
}

pub(crate) fn echo(value: &impl Serialize) -> serde_json::Value {
    serde_json::to_value(value).expect("config serializes")
}

/// Rows of `base` (sorted) where every listed label is present.
pub(crate) fn rows_with(manifest: &CorpusManifest, base: &[usize], labels: &[&str]) -> Result<Vec<usize>> {
    let cols = labels.iter().map(|l| manifest.label(l)).collect::<Result<Vec<_>>>()?;
    Ok(base.iter().copied().filter(|&i| cols.iter().all(|c| c.get(i).is_some())).collect())
}

pub(crate) fn label_values(manifest: &CorpusManifest, name: &str, rows: &[usize]) -> Result<Vec<f64>> {
    let col = manifest.label(name)?;
    rows.iter()
        .map(|&i| col.get(i).ok_or_else(|| Error::Missing(format!("label {name:?} at row {i}"))))
        .collect()
}

pub(crate) fn block_matrix(manifest: &CorpusManifest, name: &str, rows: &[usize]) -> Result<DMatrix<f64>> {
    Ok(manifest.block(name)?.matrix.load()?.select_rows(rows))
}

pub(crate) fn hstack(parts: &[&DMatrix<f64>], n: usize) -> DMatrix<f64> {
    let cols: usize = parts.iter().map(|m| m.ncols()).sum();
    let mut out = DMatrix::zeros(n, cols);
    let mut at = 0;
    for m in parts {
        out.columns_mut(at, m.ncols()).copy_from(m);
        at += m.ncols();
    }
    out
}

pub(crate) fn column(values: &[f64]) -> DMatrix<f64> {
    DMatrix::from_column_slice(values.len(), 1, values)
}

pub(crate) fn folds(n: usize, options: &RunOptions) -> Result<SplitAssignment> {
    SplitAssignment::k_fold(n, options.cv_folds, options.seed)
}

/// Maps a collinearity error from a stacked design onto block names.
pub(crate) fn attribute_collinear(err: Error, blocks: &[(String, usize)]) -> Error {
    match err {
        Error::Collinear { columns } => {
            let named: Vec<String> = columns
                .iter()
                .map(|&c| {
                    let mut start = 0;
                    for (name, width) in blocks {
                        if c < start + width {
                            return format!("{name}[{}]", c - start);
                        }
                        start += width;
                    }
                    format!("column {c}")
                })
                .collect();
            Error::CollinearBlock(named.join(", "))
        }
        e => e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn card_numbers_round_trip() {
        for id in CardId::ALL {
            assert_eq!(CardId::from_number(id.number()), Some(id));
        }
        assert_eq!(CardId::from_number(0), None);
        assert_eq!(CardId::from_number(6), None);
    }

    #[test]
    fn collinear_attribution() {
        let e = attribute_collinear(
            Error::Collinear { columns: vec![1, 4] },
            &[("style".into(), 3), ("topic".into(), 2)],
        );
        assert_eq!(e.to_string(), Error::CollinearBlock("style[1], topic[1]".into()).to_string());
    }

    #[test]
    fn statistic_ci() {
        assert!(Statistic::with_ci(0.1, (-0.1, 0.3)).ci_contains_zero());
        assert!(!Statistic::with_ci(0.5, (0.1, 0.9)).ci_contains_zero());
        assert!(!Statistic::point(0.0).ci_contains_zero());
    }
}
