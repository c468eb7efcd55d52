use nalgebra::DMatrix;
use serde_json::json;

use super::{
    attribute_collinear, block_matrix, column, echo, folds, hstack, label_values, rows_with, Card3Config, CardId,
    ProxyScore, RunOptions, Statistic, ValidityCardReport,
};
use crate::corpus::{CorpusManifest, LabelKind};
use crate::error::{Error, Result};
use crate::stats::{auc, cv_metric, fit, CvMetric, FitOptions, ModelKind, RegressionResult};

struct Blocks {
    names: Vec<String>,
    mats: Vec<DMatrix<f64>>,
}

impl Blocks {
    fn load(manifest: &CorpusManifest, names: &[String], rows: &[usize]) -> Result<Self> {
        let mats = names.iter().map(|b| block_matrix(manifest, b, rows)).collect::<Result<_>>()?;
        Ok(Self { names: names.to_vec(), mats })
    }

    /// Columns of the selected blocks side by side, plus optional extra
    /// columns, with widths for error attribution.
    fn design(&self, pick: &[usize], extra: Option<(&str, &DMatrix<f64>)>, n: usize) -> (DMatrix<f64>, Vec<(String, usize)>) {
        let mut parts: Vec<&DMatrix<f64>> = pick.iter().map(|&b| &self.mats[b]).collect();
        let mut widths: Vec<(String, usize)> = pick.iter().map(|&b| (self.names[b].clone(), self.mats[b].ncols())).collect();
        if let Some((name, m)) = extra {
            parts.push(m);
            widths.push((name.to_string(), m.ncols()));
        }
        (hstack(&parts, n), widths)
    }
}

fn fit_attributed(
    model: ModelKind,
    x: &DMatrix<f64>,
    y: &[f64],
    options: &FitOptions,
    widths: &[(String, usize)],
) -> Result<RegressionResult> {
    fit(model, x, y, options).map_err(|e| attribute_collinear(e, widths))
}

fn cv_attributed(
    model: ModelKind,
    x: &DMatrix<f64>,
    y: &[f64],
    metric: CvMetric,
    run: &RunOptions,
    options: &FitOptions,
    widths: &[(String, usize)],
) -> Result<f64> {
    let f = folds(y.len(), run)?;
    Ok(cv_metric(x, y, model, &f, metric, options)
        .map_err(|e| attribute_collinear(e, widths))?
        .pooled)
}

/// Card 3: how much of the proxy the nuisance blocks explain (step 1) and
/// what the proxy adds beyond them for an external label (step 2).
pub fn card3_discriminant_incremental(
    manifest: &CorpusManifest,
    proxy: &ProxyScore,
    config: &Card3Config,
    run: &RunOptions,
) -> Result<ValidityCardReport> {
    let block_names: Vec<String> = if config.blocks.is_empty() {
        manifest.nuisance_blocks.keys().cloned().collect()
    } else {
        config.blocks.clone()
    };
    if block_names.is_empty() {
        return Err(Error::Missing("nuisance blocks".into()));
    }
    for b in &block_names {
        manifest.block(b)?;
    }
    let options = FitOptions { ridge_fallback: config.ridge_fallback, ..FitOptions::default() };
    let mut report = ValidityCardReport::new(
        CardId::DiscriminantIncremental,
        json!({ "card3": echo(config), "blocks": block_names, "run": echo(run), "proxy_source": proxy.source }),
    );

    // step 1: proxy ~ Z
    let rows = proxy.rows();
    let n = rows.len();
    let p = proxy.at(&rows);
    let blocks = Blocks::load(manifest, &block_names, &rows)?;
    let all: Vec<usize> = (0..block_names.len()).collect();
    for (b, name) in block_names.iter().enumerate() {
        let (x, w) = blocks.design(&[b], None, n);
        let r2 = fit_attributed(ModelKind::Ols, &x, &p, &options, &w)?.r_squared;
        let cv = cv_attributed(ModelKind::Ols, &x, &p, CvMetric::R2, run, &options, &w)?;
        report.stat(format!("step1.r_squared[{name}]"), Statistic::point(r2));
        report.stat(format!("step1.cv_r_squared[{name}]"), Statistic::point(cv));
    }
    let (z_full, w_full) = blocks.design(&all, None, n);
    let r2_full = fit_attributed(ModelKind::Ols, &z_full, &p, &options, &w_full)?.r_squared;
    let cv_full = cv_attributed(ModelKind::Ols, &z_full, &p, CvMetric::R2, run, &options, &w_full)?;
    report.stat("step1.r_squared_full", Statistic::point(r2_full));
    report.stat("step1.cv_r_squared_full", Statistic::point(cv_full));
    for (b, name) in block_names.iter().enumerate() {
        let unique = if all.len() == 1 {
            r2_full
        } else {
            let others: Vec<usize> = all.iter().copied().filter(|&o| o != b).collect();
            let (x, w) = blocks.design(&others, None, n);
            r2_full - fit_attributed(ModelKind::Ols, &x, &p, &options, &w)?.r_squared
        };
        report.stat(format!("step1.unique_r_squared[{name}]"), Statistic::point(unique));
    }
    report.diag("step1.n_docs", n as f64);
    if cv_full >= config.surrogacy_fail {
        report.fail(format!(
            "nuisance blocks predict the proxy with cross-validated R^2 = {cv_full:.4} (>= {}): likely surrogate",
            config.surrogacy_fail
        ));
    } else if cv_full > config.surrogacy_warn {
        report.warn(format!(
            "nuisance blocks predict the proxy with cross-validated R^2 = {cv_full:.4} (> {}): possible surrogate",
            config.surrogacy_warn
        ));
    }

    // step 2: L ~ Z and L ~ Z + proxy
    let Some(label) = config.label.as_deref() else {
        for name in ["step2.beta_inc_std", "step2.delta_cv"] {
            report.mark_unavailable(name, "no external label configured (card3.label)");
        }
        return Ok(report);
    };
    let kind = manifest.label(label)?.kind;
    let rows2 = rows_with(manifest, &rows, &[label])?;
    let n2 = rows2.len();
    let y = label_values(manifest, label, &rows2)?;
    let blocks2 = Blocks::load(manifest, &block_names, &rows2)?;
    let c = column(&proxy.at(&rows2));
    let (model, metric, metric_name) = match kind {
        LabelKind::Binary => (ModelKind::Logistic, CvMetric::Auc, "auc"),
        LabelKind::Real => (ModelKind::Ols, CvMetric::R2, "r_squared"),
    };
    let (xz, wz) = blocks2.design(&all, None, n2);
    let (xzc, wzc) = blocks2.design(&all, Some(("proxy", &c)), n2);
    let fz = fit_attributed(model, &xz, &y, &options, &wz)?;
    let fzc = fit_attributed(model, &xzc, &y, &options, &wzc)?;
    let k = fzc.coefficients.len() - 1;
    let beta_inc = fzc.standardized_coefficients[k];
    report.stat("step2.beta_inc_std", Statistic::with_ci(beta_inc, fzc.standardized_conf_intervals[k]));
    report.stat("step2.beta_inc", Statistic::with_ci(fzc.coefficients[k], fzc.conf_intervals[k]));
    match model {
        ModelKind::Logistic => {
            let auc_z = auc(&fz.linear_predictor(&xz), &y)?;
            let auc_zc = auc(&fzc.linear_predictor(&xzc), &y)?;
            report.stat("step2.auc_z", Statistic::point(auc_z));
            report.stat("step2.auc_zc", Statistic::point(auc_zc));
            report.stat("step2.delta_auc", Statistic::point(auc_zc - auc_z));
            report.diag("step2.mcfadden_r_squared_z", fz.r_squared);
            report.diag("step2.mcfadden_r_squared_zc", fzc.r_squared);
            if let (Some(a), Some(b)) = (fz.log_likelihood, fzc.log_likelihood) {
                report.diag("step2.penalized_log_likelihood_z", a);
                report.diag("step2.penalized_log_likelihood_zc", b);
            }
        }
        ModelKind::Ols => {
            report.stat("step2.r_squared_z", Statistic::point(fz.r_squared));
            report.stat("step2.r_squared_zc", Statistic::point(fzc.r_squared));
            report.stat("step2.delta_r_squared", Statistic::point(fzc.r_squared - fz.r_squared));
        }
    }
    let cv_z = cv_attributed(model, &xz, &y, metric, run, &options, &wz)?;
    let cv_zc = cv_attributed(model, &xzc, &y, metric, run, &options, &wzc)?;
    report.stat("step2.cv_z", Statistic::point(cv_z));
    report.stat("step2.cv_zc", Statistic::point(cv_zc));
    report.stat("step2.delta_cv", Statistic::point(cv_zc - cv_z));
    report.detail("step2.metric", metric_name);
    report.diag("step2.n_docs", n2 as f64);

    if block_names.len() <= config.max_subset_blocks {
        let mut by_set = Vec::new();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for mask in 1u32..(1 << block_names.len()) {
            let pick: Vec<usize> = all.iter().copied().filter(|&b| mask & (1 << b) != 0).collect();
            let (x, w) = blocks2.design(&pick, Some(("proxy", &c)), n2);
            let f = fit_attributed(model, &x, &y, &options, &w)?;
            let b = *f.standardized_coefficients.last().expect("proxy column");
            lo = lo.min(b);
            hi = hi.max(b);
            let names: Vec<&str> = pick.iter().map(|&i| block_names[i].as_str()).collect();
            by_set.push(json!({ "blocks": names, "beta_inc_std": b }));
        }
        report.detail("step2.beta_inc_by_block_set", by_set);
        report.diag("step2.beta_inc_std_min", lo);
        report.diag("step2.beta_inc_std_max", hi);
        if lo < 0.0 && hi > 0.0 {
            report.warn(format!(
                "standardized beta_inc changes sign across nuisance sets (range {lo:.4} to {hi:.4})"
            ));
        }
    }
    if report.statistics["step2.beta_inc_std"].ci_contains_zero() {
        report.warn("95% CI for standardized beta_inc contains 0: no incremental evidence beyond nuisance blocks");
    }
    Ok(report)
}

