use serde_json::json;

use super::{column, echo, folds, label_values, rows_with, Card2Config, CardId, ProxyScore, RunOptions, Statistic, ValidityCardReport};
use crate::corpus::CorpusManifest;
use crate::error::{Error, Result};
use crate::stats::describe::{pearson, pearson_ci};
use crate::stats::{
    cv_metric, icc_two_way, krippendorff_alpha, ols_fit, CvMetric, FitOptions, MeasurementLevel, ModelKind,
    RatingsMatrix,
};

/// Conventional band for a correlation-sized effect.
pub(crate) fn correlation_band(r: f64) -> &'static str {
    match r.abs() {
        a if a >= 0.5 => "large",
        a if a >= 0.3 => "moderate",
        a if a >= 0.1 => "small",
        _ => "negligible",
    }
}

/// Card 2: agreement of the proxy with an independent gold measure.
pub fn card2_convergent(
    manifest: &CorpusManifest,
    proxy: &ProxyScore,
    config: &Card2Config,
    run: &RunOptions,
) -> Result<ValidityCardReport> {
    let gold = config
        .gold
        .as_deref()
        .ok_or_else(|| Error::Missing("gold measure (card2.gold)".into()))?;
    let rows = rows_with(manifest, &proxy.rows(), &[gold])?;
    if rows.len() < config.min_gold {
        return Err(Error::Missing(format!(
            "gold values for at least {} documents (found {})",
            config.min_gold,
            rows.len()
        )));
    }
    let p = proxy.at(&rows);
    let y = label_values(manifest, gold, &rows)?;
    let x = column(&p);

    let mut report = ValidityCardReport::new(
        CardId::Convergent,
        json!({ "card2": echo(config), "run": echo(run), "proxy_source": proxy.source }),
    );
    let fit = ols_fit(&x, &y, &FitOptions::default())?;
    let beta = fit.standardized_coefficients[0];
    report.stat("beta_conv_std", Statistic::with_ci(beta, fit.standardized_conf_intervals[0]));
    report.stat("r_squared", Statistic::point(fit.r_squared));
    let r = pearson(&p, &y)?;
    report.stat("correlation", Statistic::with_ci(r, pearson_ci(r, rows.len())));
    let cv = cv_metric(&x, &y, ModelKind::Ols, &folds(rows.len(), run)?, CvMetric::R2, &FitOptions::default())?;
    report.stat("cv_r_squared", Statistic::point(cv.pooled));
    report.diag("n_docs", rows.len() as f64);
    report.detail("band", correlation_band(beta));
    report.detail("scatter", p.iter().zip(&y).map(|(a, b)| [*a, *b]).collect::<Vec<_>>());

    if config.gold_raters.is_empty() {
        report.mark_unavailable("gold_reliability", "no gold rater columns configured");
    } else {
        let scope = proxy.rows();
        let cols = config
            .gold_raters
            .iter()
            .map(|name| manifest.label(name))
            .collect::<Result<Vec<_>>>()?;
        let ratings: Vec<Vec<Option<f64>>> = cols.iter().map(|c| scope.iter().map(|&i| c.get(i)).collect()).collect();
        let alpha = krippendorff_alpha(&ratings, MeasurementLevel::Interval)?;
        report.stat("gold_reliability", Statistic::point(alpha.alpha));
        report.detail("gold_reliability_measure", "Krippendorff's alpha (interval)");
        report.diag("gold_pairable_values", alpha.pairable as f64);
        let names: Vec<&str> = config.gold_raters.iter().map(String::as_str).collect();
        let complete = rows_with(manifest, &scope, &names)?;
        if cols.len() >= 2 && complete.len() >= 2 {
            let columns: Vec<Vec<f64>> = cols
                .iter()
                .map(|c| complete.iter().map(|&i| c.get(i).unwrap_or_default()).collect())
                .collect();
            let icc = icc_two_way(&RatingsMatrix::from_columns(&columns)?);
            report.stat("gold_icc_2_1", Statistic::point(icc.icc_2_1));
        }
        if alpha.alpha > 0.0 {
            report.diag("correlation_ceiling", alpha.alpha.sqrt());
        }
        if alpha.alpha < config.reliability_warn_below {
            report.warn(format!(
                "gold reliability alpha = {:.3} is below {}; convergent evidence is bounded by it",
                alpha.alpha, config.reliability_warn_below
            ));
        }
    }

    if report.statistics["beta_conv_std"].ci_contains_zero() {
        report.warn("95% CI for standardized beta_conv contains 0: no convergent evidence");
    }
    Ok(report)
}
