use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::auc::auc;
use super::describe::mean;
use super::regression::{fit, FitOptions, ModelKind};
use crate::corpus::SplitAssignment;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvMetric {
    R2,
    Auc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    /// Metric over the concatenated out-of-fold predictions.
    pub pooled: f64,
    /// Metric within each held-out fold; `None` where undefined (e.g. a
    /// single-class fold under AUC) or skipped.
    pub per_fold: Vec<Option<f64>>,
    /// Folds whose training portion lacked a class and were not scored.
    pub skipped_folds: Vec<usize>,
}

fn r2(y: &[f64], pred: &[f64]) -> Option<f64> {
    let ybar = mean(y);
    let ss_tot: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    if ss_tot == 0.0 {
        return None;
    }
    let ss_res: f64 = y.iter().zip(pred).map(|(a, b)| (a - b).powi(2)).sum();
    Some(1.0 - ss_res / ss_tot)
}

fn score(metric: CvMetric, y: &[f64], pred: &[f64]) -> Option<f64> {
    match metric {
        CvMetric::R2 => r2(y, pred),
        CvMetric::Auc => auc(pred, y).ok(),
    }
}

/// K-fold evaluation: each fold is predicted by a model fit on all other
/// folds. Folds are processed in index order, so results are deterministic.
pub fn cv_metric(
    x: &DMatrix<f64>,
    y: &[f64],
    model: ModelKind,
    folds: &SplitAssignment,
    metric: CvMetric,
    options: &FitOptions,
) -> Result<CvResult> {
    let n = y.len();
    if x.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: x.nrows(),
        });
    }
    folds.validate(n)?;
    let covered: usize = folds.folds().map(<[usize]>::len).sum();
    if covered != n {
        return Err(Error::InvalidInput(format!(
            "folds cover {covered} of {n} rows"
        )));
    }
    let fold_list: Vec<&[usize]> = folds.folds().collect();
    if fold_list.len() < 2 {
        return Err(Error::InvalidInput("cross-validation needs at least two folds".into()));
    }

    let opts = FitOptions {
        standardize: false,
        ..*options
    };
    let mut pooled_y = Vec::with_capacity(n);
    let mut pooled_pred = Vec::with_capacity(n);
    let mut per_fold = Vec::with_capacity(fold_list.len());
    let mut skipped = Vec::new();

    for (f, held) in fold_list.iter().enumerate() {
        let train: Vec<usize> = fold_list
            .iter()
            .enumerate()
            .filter(|&(g, _)| g != f)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        let x_train = select_rows(x, &train);
        let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let fitted = match fit(model, &x_train, &y_train, &opts) {
            Ok(r) => r,
            Err(Error::SingleClass) if model == ModelKind::Logistic => {
                skipped.push(f);
                per_fold.push(None);
                continue;
            }
            Err(e) => return Err(e),
        };
        let x_held = select_rows(x, held);
        let y_held: Vec<f64> = held.iter().map(|&i| y[i]).collect();
        let pred = fitted.predict(&x_held);
        per_fold.push(score(metric, &y_held, &pred));
        pooled_y.extend(y_held);
        pooled_pred.extend(pred);
    }

    let pooled = score(metric, &pooled_y, &pooled_pred).ok_or_else(|| {
        Error::InvalidInput("pooled metric undefined (constant outcome or single class)".into())
    })?;
    Ok(CvResult {
        pooled,
        per_fold,
        skipped_folds: skipped,
    })
}

pub(crate) fn select_rows(x: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), x.ncols(), |i, j| x[(rows[i], j)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn exact_relationship_has_unit_cv_r2() {
        let xs: Vec<f64> = (0..30).map(|i| f64::from(i) * 0.7 - 3.0).collect();
        let x = DMatrix::from_column_slice(30, 1, &xs);
        let folds = SplitAssignment::k_fold(30, 5, 9).unwrap();
        let r = cv_metric(&x, &xs, ModelKind::Ols, &folds, CvMetric::R2, &FitOptions::default()).unwrap();
        assert!((r.pooled - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_outcome_has_no_cv_r2() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = DMatrix::from_fn(500, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y: Vec<f64> = (0..500).map(|_| rng.sample(StandardNormal)).collect();
        let folds = SplitAssignment::k_fold(500, 5, 0).unwrap();
        let r = cv_metric(&x, &y, ModelKind::Ols, &folds, CvMetric::R2, &FitOptions::default()).unwrap();
        assert!(r.pooled <= 0.05, "{}", r.pooled);
        assert_eq!(r.per_fold.len(), 5);
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = DMatrix::from_fn(120, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y: Vec<f64> = (0..120)
            .map(|i| f64::from(u8::from(x[(i, 0)] + rng.sample::<f64, _>(StandardNormal) > 0.0)))
            .collect();
        let folds = SplitAssignment::k_fold(120, 4, 2).unwrap();
        let run = || cv_metric(&x, &y, ModelKind::Logistic, &folds, CvMetric::Auc, &FitOptions::default()).unwrap();
        let (a, b) = (run(), run());
        assert_eq!(a.pooled.to_bits(), b.pooled.to_bits());
        assert_eq!(a, b);
        assert!(a.pooled > 0.6);
    }

    #[test]
    fn single_class_training_fold_is_skipped() {
        // all positives sit in fold_0, so training on the rest sees one class
        let y = vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        let x = DMatrix::from_fn(9, 1, |i, _| i as f64 * 0.3 + if y[i] > 0.5 { 1.0 } else { 0.0 });
        let mut parts = indexmap::IndexMap::new();
        parts.insert("fold_0".to_string(), vec![0, 1, 6]);
        parts.insert("fold_1".to_string(), vec![2, 3, 4]);
        parts.insert("fold_2".to_string(), vec![5, 7, 8]);
        let folds = SplitAssignment::new(parts);
        let r = cv_metric(&x, &y, ModelKind::Logistic, &folds, CvMetric::Auc, &FitOptions::default());
        // the remaining folds are all-negative, so the pooled AUC is undefined
        assert!(r.is_err());
    }
}
