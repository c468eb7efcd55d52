use serde_json::json;

use super::{echo, rows_with, label_values, Card1Config, CardId, ProxyScore, Statistic, ValidityCardReport};
use crate::corpus::{CorpusManifest, LabelKind};
use crate::error::{Error, Result};
use crate::stats::{auc, icc_two_way, RatingsMatrix};

/// Interpretation band for an ICC value under the configured cut points.
pub fn icc_band(icc: f64, config: &Card1Config) -> &'static str {
    if icc >= config.excellent_at {
        "excellent"
    } else if icc >= config.warn_below {
        "good"
    } else if icc >= config.fail_below {
        "moderate"
    } else {
        "poor"
    }
}

/// Card 1: agreement of the proxy across perturbation variants, one
/// [`ProxyScore`] per variant.
pub fn card1_reliability(
    manifest: &CorpusManifest,
    proxies: &[ProxyScore],
    config: &Card1Config,
) -> Result<ValidityCardReport> {
    if proxies.len() < 2 {
        return Err(Error::Missing(format!("at least 2 variants (found {})", proxies.len())));
    }
    let n = manifest.len();
    if let Some(p) = proxies.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, actual: p.len() });
    }
    let rows = proxies[0].rows();
    let columns: Vec<Vec<f64>> = proxies.iter().map(|p| p.at(&rows)).collect();
    let icc = icc_two_way(&RatingsMatrix::from_columns(&columns)?);

    let variant_names: Vec<String> = proxies
        .iter()
        .enumerate()
        .map(|(i, p)| p.variant_id.clone().unwrap_or_else(|| format!("variant_{i}")))
        .collect();
    let mut report = ValidityCardReport::new(
        CardId::Reliability,
        json!({ "card1": echo(config), "variants": variant_names, "proxy_source": proxies[0].source }),
    );
    report.stat("icc_2_1", Statistic::point(icc.icc_2_1));
    report.stat("icc_2_k", Statistic::point(icc.icc_2_k));
    report.stat("icc_3_1", Statistic::point(icc.icc_3_1));
    report.stat("n_variants", Statistic::point(proxies.len() as f64));
    report.diag("n_docs", rows.len() as f64);
    report.diag("ms_rows", icc.ms_rows);
    report.diag("ms_cols", icc.ms_cols);
    report.diag("ms_error", icc.ms_error);

    let enumeration: Vec<serde_json::Value> = variant_names
        .iter()
        .map(|id| match manifest.variant(id) {
            Ok(v) => json!({
                "variant_id": id,
                "encoder_name": v.descriptor.encoder_name,
                "pooling": v.descriptor.pooling,
                "normalization": v.descriptor.normalization,
            }),
            Err(_) => json!({ "variant_id": id }),
        })
        .collect();
    report.detail("variants", enumeration);
    report.detail("icc_form", "ICC(2,1) and ICC(2,k): two-way random effects, absolute agreement");
    let band = icc_band(icc.icc_2_1, config);
    report.detail("band", band);

    match &config.label {
        Some(label) if manifest.label(label)?.kind == LabelKind::Binary => {
            let labelled = rows_with(manifest, &rows, &[label])?;
            let y = label_values(manifest, label, &labelled)?;
            let mut aucs = Vec::with_capacity(proxies.len());
            for (name, p) in variant_names.iter().zip(proxies) {
                let a = auc(&p.at(&labelled), &y)?;
                report.stat(format!("auc[{name}]"), Statistic::point(a));
                aucs.push(a);
            }
            report.stat("auc_min", Statistic::point(aucs.iter().copied().fold(f64::INFINITY, f64::min)));
            report.stat("auc_max", Statistic::point(aucs.iter().copied().fold(f64::NEG_INFINITY, f64::max)));
        }
        Some(label) => report.mark_unavailable("auc_min", format!("label {label:?} is not binary")),
        None => report.mark_unavailable("auc_min", "no binary label configured"),
    }

    if icc.degenerate {
        report.warn("all ratings are identical; ICC is reported as 1 by convention");
    }
    if icc.icc_2_1 < config.fail_below {
        report.fail(format!("ICC(2,1) = {:.4} is below {} ({band})", icc.icc_2_1, config.fail_below));
    } else if icc.icc_2_1 < config.warn_below {
        report.warn(format!("ICC(2,1) = {:.4} is below {} ({band})", icc.icc_2_1, config.warn_below));
    }
    Ok(report)
}
