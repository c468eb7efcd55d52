//! Two-way random-effects intraclass correlation under absolute agreement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` targets (documents) rated by `k` raters (perturbation variants),
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsMatrix {
    targets: usize,
    raters: usize,
    values: Vec<f64>,
}

impl RatingsMatrix {
    pub fn new(targets: usize, raters: usize, values: Vec<f64>) -> Result<Self> {
        if targets < 2 || raters < 2 {
            return Err(Error::InvalidInput(format!(
                "ratings need n >= 2 targets and k >= 2 raters, got {targets} x {raters}"
            )));
        }
        if values.len() != targets * raters {
            return Err(Error::DimensionMismatch {
                expected: targets * raters,
                actual: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("ratings contain non-finite values".into()));
        }
        Ok(Self {
            targets,
            raters,
            values,
        })
    }

    /// Builds the matrix from one score column per rater.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let k = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: c.len(),
            });
        }
        let mut values = Vec::with_capacity(n * k);
        for i in 0..n {
            values.extend(columns.iter().map(|c| c[i]));
        }
        Self::new(n, k, values)
    }

    pub fn targets(&self) -> usize {
        self.targets
    }

    pub fn raters(&self) -> usize {
        self.raters
    }

    pub fn get(&self, target: usize, rater: usize) -> f64 {
        self.values[target * self.raters + rater]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IccResult {
    pub icc_2_1: f64,
    pub icc_2_k: f64,
    /// Consistency form ICC(3,1), reported alongside for contrast.
    pub icc_3_1: f64,
    pub ms_rows: f64,
    pub ms_cols: f64,
    pub ms_error: f64,
    pub n: usize,
    pub k: usize,
    /// All ratings equal; both ICC forms are reported as 1.
    pub degenerate: bool,
}

/// Mean squares from a two-way ANOVA without replication.
fn mean_squares(r: &RatingsMatrix) -> (f64, f64, f64, f64) {
    let (n, k) = (r.targets, r.raters);
    let grand = r.values.iter().sum::<f64>() / (n * k) as f64;
    let row_means: Vec<f64> = (0..n)
        .map(|i| (0..k).map(|j| r.get(i, j)).sum::<f64>() / k as f64)
        .collect();
    let col_means: Vec<f64> = (0..k)
        .map(|j| (0..n).map(|i| r.get(i, j)).sum::<f64>() / n as f64)
        .collect();

    let ss_rows = k as f64 * row_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_cols = n as f64 * col_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let mut ss_err = 0.0;
    let mut ss_total = 0.0;
    for (i, rm) in row_means.iter().enumerate() {
        for (j, cm) in col_means.iter().enumerate() {
            let x = r.get(i, j);
            ss_err += (x - rm - cm + grand).powi(2);
            ss_total += (x - grand).powi(2);
        }
    }
    let ms_rows = ss_rows / (n - 1) as f64;
    let ms_cols = ss_cols / (k - 1) as f64;
    let ms_err = ss_err / ((n - 1) * (k - 1)) as f64;
    (ms_rows, ms_cols, ms_err, ss_total)
}

pub fn icc_two_way(ratings: &RatingsMatrix) -> IccResult {
    let (n, k) = (ratings.targets, ratings.raters);
    let (msr, msc, mse, ss_total) = mean_squares(ratings);
    if ss_total == 0.0 {
        return IccResult {
            icc_2_1: 1.0,
            icc_2_k: 1.0,
            icc_3_1: 1.0,
            ms_rows: msr,
            ms_cols: msc,
            ms_error: mse,
            n,
            k,
            degenerate: true,
        };
    }
    let (nf, kf) = (n as f64, k as f64);
    let icc_2_1 = (msr - mse) / (msr + (kf - 1.0) * mse + kf / nf * (msc - mse));
    let den_k = msr + (msc - mse) / nf;
    // A non-positive denominator only arises when rows carry less variance
    // than the residual; the average-measure form is then not a reliability.
    let icc_2_k = if den_k > 0.0 { (msr - mse) / den_k } else { -1.0 };
    let den_3 = msr + (kf - 1.0) * mse;
    let icc_3_1 = if den_3 > 0.0 { (msr - mse) / den_3 } else { 1.0 };
    IccResult {
        icc_2_1,
        icc_2_k: icc_2_k.min(1.0),
        icc_3_1,
        ms_rows: msr,
        ms_cols: msc,
        ms_error: mse,
        n,
        k,
        degenerate: false,
    }
}
