use serde_json::json;

use super::{column, echo, Card4Config, CardId, ProxyScore, Statistic, ValidityCardReport};
use crate::corpus::CorpusManifest;
use crate::error::{Error, Result};
use crate::stats::describe::mean;
use crate::stats::{cohens_d, d_band, ecdf, ols_fit, FitOptions};

fn indices(manifest: &CorpusManifest, ids: &[String]) -> Result<Vec<usize>> {
    ids.iter()
        .map(|id| manifest.doc_index(id).ok_or_else(|| Error::Missing(format!("anchor document {id:?}"))))
        .collect()
}

/// Card 4: separation of pre-specified high and low anchor documents.
pub fn card4_known_groups(
    manifest: &CorpusManifest,
    proxy: &ProxyScore,
    config: &Card4Config,
) -> Result<ValidityCardReport> {
    let anchors = &manifest.anchors;
    let min = config.min_per_group.max(2);
    if anchors.high_ids.len() < min || anchors.low_ids.len() < min {
        return Err(Error::Missing(format!(
            "anchor set with at least {min} high and {min} low documents (found {} and {})",
            anchors.high_ids.len(),
            anchors.low_ids.len()
        )));
    }
    let high_rows = indices(manifest, &anchors.high_ids)?;
    let low_rows = indices(manifest, &anchors.low_ids)?;
    let high = proxy.at(&high_rows);
    let low = proxy.at(&low_rows);

    let mut report = ValidityCardReport::new(
        CardId::KnownGroups,
        json!({ "card4": echo(config), "proxy_source": proxy.source }),
    );
    let indicator: Vec<f64> = high.iter().map(|_| 1.0).chain(low.iter().map(|_| 0.0)).collect();
    let scores: Vec<f64> = high.iter().chain(&low).copied().collect();
    let fit = ols_fit(&column(&indicator), &scores, &FitOptions { standardize: false, ..FitOptions::default() })?;
    report.stat("tau", Statistic::with_ci(fit.coefficients[0], fit.conf_intervals[0]));
    let d = cohens_d(&high, &low)?;
    report.stat("cohens_d", Statistic::with_ci(d.d, (d.ci_lo, d.ci_hi)));
    report.detail("band", d_band(d.d));
    report.detail("direction", if d.d > 0.0 { "high > low" } else { "high <= low" });
    report.diag("n_high", high.len() as f64);
    report.diag("n_low", low.len() as f64);
    report.diag("mean_high", mean(&high));
    report.diag("mean_low", mean(&low));
    report.diag("pooled_sd", d.pooled_sd);
    report.detail("ecdf_high", ecdf(&high));
    report.detail("ecdf_low", ecdf(&low));
    let borderline: Vec<serde_json::Value> = anchors
        .borderline_ids
        .iter()
        .zip(indices(manifest, &anchors.borderline_ids)?)
        .map(|(id, i)| json!({ "id": id, "score": proxy.values[i] }))
        .collect();
    report.detail("borderline", borderline);

    let stat = report.statistics["cohens_d"];
    if d.d <= 0.0 {
        report.fail(format!("high anchors do not score above low anchors (d = {:.4})", d.d));
    } else if stat.ci_contains_zero() {
        report.warn("95% CI for Cohen's d contains 0: anchors are not separated");
    }
    Ok(report)
}
