use nalgebra::DMatrix;
use serde_json::json;

use super::{
    attribute_collinear, block_matrix, column, echo, folds, hstack, label_values, rows_with, Card5Config, CardId,
    ProxyScore, RunOptions, Statistic, ValidityCardReport,
};
use crate::corpus::{CorpusManifest, SplitAssignment};
use crate::error::{Error, Result};
use crate::stats::describe::mean;
use crate::stats::{cv_metric, ols_fit, CvMetric, FitOptions, ModelKind};

struct Assessment {
    beta: Statistic,
    r2_controls: f64,
    r2_full: f64,
    cv_controls: f64,
    cv_full: f64,
}

/// Out-of-fold R² when each fold is predicted by the training mean.
fn cv_mean_only(y: &[f64], folds: &SplitAssignment) -> f64 {
    let parts: Vec<&[usize]> = folds.folds().collect();
    let mut pred = vec![0.0; y.len()];
    for (f, held) in parts.iter().enumerate() {
        let train: Vec<f64> = parts
            .iter()
            .enumerate()
            .filter(|&(g, _)| g != f)
            .flat_map(|(_, idx)| idx.iter().map(|&i| y[i]))
            .collect();
        let m = mean(&train);
        for &i in *held {
            pred[i] = m;
        }
    }
    let ybar = mean(y);
    let ss_tot: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(&pred).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - ss_res / ss_tot
}

fn assess(
    controls: &DMatrix<f64>,
    widths: &[(String, usize)],
    c: &DMatrix<f64>,
    y: &[f64],
    options: &FitOptions,
    run: &RunOptions,
) -> Result<Assessment> {
    let n = y.len();
    let attribute = |e| attribute_collinear(e, widths);
    let full = hstack(&[controls, c], n);
    let fit_full = ols_fit(&full, y, options).map_err(attribute)?;
    let k = controls.ncols();
    let f = folds(n, run)?;
    let cv_opts = FitOptions { standardize: false, ..*options };
    let (r2_controls, cv_controls) = if k == 0 {
        (0.0, cv_mean_only(y, &f))
    } else {
        (
            ols_fit(controls, y, options).map_err(attribute)?.r_squared,
            cv_metric(controls, y, ModelKind::Ols, &f, CvMetric::R2, &cv_opts).map_err(attribute)?.pooled,
        )
    };
    let cv_full = cv_metric(&full, y, ModelKind::Ols, &f, CvMetric::R2, &cv_opts).map_err(attribute)?.pooled;
    Ok(Assessment {
        beta: Statistic::with_ci(fit_full.standardized_coefficients[k], fit_full.standardized_conf_intervals[k]),
        r2_controls,
        r2_full: fit_full.r_squared,
        cv_controls,
        cv_full,
    })
}

/// Card 5: association of the proxy with a downstream outcome beyond
/// nuisance controls, with an optional negative-control outcome.
pub fn card5_predictive(
    manifest: &CorpusManifest,
    proxy: &ProxyScore,
    config: &Card5Config,
    run: &RunOptions,
) -> Result<ValidityCardReport> {
    let outcome = config
        .outcome
        .as_deref()
        .ok_or_else(|| Error::Missing("outcome (card5.outcome)".into()))?;
    for b in &config.controls {
        manifest.block(b)?;
    }
    let options = FitOptions { ridge_fallback: config.ridge_fallback, ..FitOptions::default() };
    let mut report = ValidityCardReport::new(
        CardId::Predictive,
        json!({ "card5": echo(config), "run": echo(run), "proxy_source": proxy.source }),
    );

    type Design = (DMatrix<f64>, Vec<(String, usize)>, DMatrix<f64>);
    let design = |rows: &[usize]| -> Result<Design> {
        let mats = config.controls.iter().map(|b| block_matrix(manifest, b, rows)).collect::<Result<Vec<_>>>()?;
        let widths = config.controls.iter().cloned().zip(mats.iter().map(DMatrix::ncols)).collect();
        let controls = hstack(&mats.iter().collect::<Vec<_>>(), rows.len());
        Ok((controls, widths, column(&proxy.at(rows))))
    };

    let rows = rows_with(manifest, &proxy.rows(), &[outcome])?;
    let y = label_values(manifest, outcome, &rows)?;
    let (controls, widths, c) = design(&rows)?;
    let a = assess(&controls, &widths, &c, &y, &options, run)?;
    report.stat("beta_pred_std", a.beta);
    report.stat("r_squared_controls", Statistic::point(a.r2_controls));
    report.stat("r_squared_full", Statistic::point(a.r2_full));
    report.stat("delta_r_squared", Statistic::point(a.r2_full - a.r2_controls));
    report.stat("cv_r_squared_controls", Statistic::point(a.cv_controls));
    report.stat("cv_r_squared_full", Statistic::point(a.cv_full));
    report.stat("delta_cv_r_squared", Statistic::point(a.cv_full - a.cv_controls));
    report.diag("n_docs", rows.len() as f64);
    if a.beta.ci_contains_zero() {
        report.warn("95% CI for standardized beta_pred contains 0: no predictive evidence");
    }

    match config.placebo.as_deref() {
        None => report.mark_unavailable("placebo.beta_pred_std", "no negative-control outcome configured"),
        Some(placebo) => {
            let rows = rows_with(manifest, &proxy.rows(), &[placebo])?;
            let y = label_values(manifest, placebo, &rows)?;
            let (controls, widths, c) = design(&rows)?;
            let p = assess(&controls, &widths, &c, &y, &options, run)?;
            report.stat("placebo.beta_pred_std", p.beta);
            report.stat("placebo.delta_r_squared", Statistic::point(p.r2_full - p.r2_controls));
            report.stat("placebo.delta_cv_r_squared", Statistic::point(p.cv_full - p.cv_controls));
            report.diag("placebo.n_docs", rows.len() as f64);
            if !p.beta.ci_contains_zero() {
                report.fail(format!(
                    "proxy predicts the negative-control outcome {placebo:?} (standardized beta = {:.4}, CI excludes 0): possible dataset artifact",
                    p.beta.value
                ));
            }
        }
    }
    Ok(report)
}
