use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    build_proxy, build_variant_proxies, card1_reliability, card2_convergent, card3_discriminant_incremental,
    card4_known_groups, card5_predictive, echo, CardId, CardStatus, FlagLevel, SuiteConfig, ValidityCardReport,
    SCHEMA_VERSION,
};
use crate::corpus::CorpusManifest;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overall {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: String,
    pub overall: Overall,
    pub reports: Vec<ValidityCardReport>,
}

impl SuiteReport {
    pub fn report(&self, id: CardId) -> Option<&ValidityCardReport> {
        self.reports.iter().find(|r| r.card_id == id)
    }
}

fn overall(reports: &[ValidityCardReport]) -> Overall {
    reports
        .iter()
        .map(|r| match (r.status, r.worst_flag()) {
            (CardStatus::Error, _) | (_, Some(FlagLevel::Fail)) => Overall::Fail,
            (_, Some(FlagLevel::Warn)) => Overall::Warn,
            _ => Overall::Pass,
        })
        .max()
        .unwrap_or(Overall::Pass)
}

/// A report standing in for a card that raised an error. Missing inputs
/// make the card unavailable; anything else is an error.
fn failed(id: CardId, err: &Error, echo: serde_json::Value) -> ValidityCardReport {
    let (status, reason) = match err {
        Error::Missing(what) => (CardStatus::Unavailable, format!("missing {what}")),
        e => (CardStatus::Error, format!("{}: {e}", e.code())),
    };
    let mut report = ValidityCardReport::not_run(id, status, &reason, echo);
    report.detail("reason", &reason);
    if status == CardStatus::Error {
        report.detail("error_code", err.code());
    }
    report
}

/// Runs the configured cards in order 1 to 5. A failing card does not stop
/// the others.
pub fn run_suite(manifest: &CorpusManifest, config: &SuiteConfig) -> Result<SuiteReport> {
    let mut ids = Vec::new();
    for &n in &config.cards {
        let id = CardId::from_number(n).ok_or_else(|| Error::Config(format!("unknown card number {n}")))?;
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    ids.sort();

    let proxy = build_proxy(manifest, &config.proxy);
    let run = &config.run;
    let mut reports = Vec::with_capacity(ids.len());
    for id in ids {
        let card_echo = match id {
            CardId::Reliability => json!({ "card1": echo(&config.card1) }),
            CardId::Convergent => json!({ "card2": echo(&config.card2) }),
            CardId::DiscriminantIncremental => json!({ "card3": echo(&config.card3) }),
            CardId::KnownGroups => json!({ "card4": echo(&config.card4) }),
            CardId::Predictive => json!({ "card5": echo(&config.card5) }),
        };
        let mut report = match (id, &proxy) {
            (CardId::Reliability, _) => build_variant_proxies(manifest, &config.proxy, &config.card1.variants)
                .and_then(|p| card1_reliability(manifest, &p, &config.card1)),
            (_, Err(e)) => Ok(failed(id, e, card_echo.clone())),
            (CardId::Convergent, Ok(p)) => card2_convergent(manifest, p, &config.card2, run),
            (CardId::DiscriminantIncremental, Ok(p)) => card3_discriminant_incremental(manifest, p, &config.card3, run),
            (CardId::KnownGroups, Ok(p)) => card4_known_groups(manifest, p, &config.card4),
            (CardId::Predictive, Ok(p)) => card5_predictive(manifest, p, &config.card5, run),
        }
        .unwrap_or_else(|e| failed(id, &e, card_echo));
        if let serde_json::Value::Object(map) = &mut report.config_echo {
            map.insert("proxy".into(), echo(&config.proxy));
            map.insert("run".into(), echo(run));
        }
        reports.push(report);
    }
    Ok(SuiteReport {
        schema_version: SCHEMA_VERSION.to_string(),
        overall: overall(&reports),
        reports,
    })
}
