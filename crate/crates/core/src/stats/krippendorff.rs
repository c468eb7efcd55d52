//! Krippendorff's alpha for nominal and interval data with missing ratings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementLevel {
    Nominal,
    Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaResult {
    pub alpha: f64,
    pub observed_disagreement: f64,
    pub expected_disagreement: f64,
    /// Number of pairable values (ratings on items with at least two).
    pub pairable: usize,
    /// Expected disagreement was zero; alpha reported as 1.
    pub degenerate: bool,
}

fn delta2(level: MeasurementLevel, a: f64, b: f64) -> f64 {
    match level {
        MeasurementLevel::Nominal => f64::from(u8::from(a != b)),
        MeasurementLevel::Interval => (a - b) * (a - b),
    }
}

/// `ratings[r][u]` is rater `r`'s value for item `u`, `None` when missing.
pub fn krippendorff_alpha(ratings: &[Vec<Option<f64>>], level: MeasurementLevel) -> Result<AlphaResult> {
    let n_items = ratings.iter().map(Vec::len).max().unwrap_or(0);
    let units: Vec<Vec<f64>> = (0..n_items)
        .map(|u| {
            ratings
                .iter()
                .filter_map(|r| r.get(u).copied().flatten())
                .collect::<Vec<f64>>()
        })
        .filter(|vals| vals.len() >= 2)
        .collect();
    if units.len() < 2 {
        return Err(Error::InvalidInput(
            "need at least 2 items with 2 or more ratings".into(),
        ));
    }
    if units.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("ratings contain non-finite values".into()));
    }

    let pairable: usize = units.iter().map(Vec::len).sum();
    let n = pairable as f64;

    let mut observed = 0.0;
    for vals in &units {
        let m = vals.len() as f64;
        let mut s = 0.0;
        for (i, &a) in vals.iter().enumerate() {
            for &b in &vals[i + 1..] {
                s += 2.0 * delta2(level, a, b);
            }
        }
        observed += s / (m - 1.0);
    }
    observed /= n;

    // sum over all ordered pairs of distinct pairable values
    let all: Vec<f64> = units.iter().flatten().copied().collect();
    let expected_sum = match level {
        MeasurementLevel::Interval => {
            let mu = all.iter().sum::<f64>() / n;
            2.0 * n * all.iter().map(|v| (v - mu).powi(2)).sum::<f64>()
        }
        MeasurementLevel::Nominal => {
            let mut counts: BTreeMap<u64, f64> = BTreeMap::new();
            for v in &all {
                *counts.entry(v.to_bits()).or_default() += 1.0;
            }
            n * n - counts.values().map(|c| c * c).sum::<f64>()
        }
    };
    let expected = expected_sum / (n * (n - 1.0));

    if expected == 0.0 {
        return Ok(AlphaResult {
            alpha: 1.0,
            observed_disagreement: observed,
            expected_disagreement: 0.0,
            pairable,
            degenerate: true,
        });
    }
    Ok(AlphaResult {
        alpha: 1.0 - observed / expected,
        observed_disagreement: observed,
        expected_disagreement: expected,
        pairable,
        degenerate: false,
    })
}
