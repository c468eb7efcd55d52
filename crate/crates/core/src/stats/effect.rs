use serde::{Deserialize, Serialize};

use super::describe::{mean, variance, z_975};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohensD {
    pub d: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub pooled_sd: f64,
}

/// Standardized mean difference `(mean_a - mean_b) / pooled_sd` with a
/// large-sample normal interval.
pub fn cohens_d(group_a: &[f64], group_b: &[f64]) -> Result<CohensD> {
    let (na, nb) = (group_a.len(), group_b.len());
    if na < 2 || nb < 2 {
        return Err(Error::InvalidInput(format!(
            "each group needs at least 2 values, got {na} and {nb}"
        )));
    }
    let (na_f, nb_f) = (na as f64, nb as f64);
    let pooled_var =
        ((na_f - 1.0) * variance(group_a) + (nb_f - 1.0) * variance(group_b)) / (na_f + nb_f - 2.0);
    let pooled_sd = pooled_var.sqrt();
    if pooled_sd == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let d = (mean(group_a) - mean(group_b)) / pooled_sd;
    let se = ((na_f + nb_f) / (na_f * nb_f) + d * d / (2.0 * (na_f + nb_f))).sqrt();
    let q = z_975();
    Ok(CohensD {
        d,
        ci_lo: d - q * se,
        ci_hi: d + q * se,
        pooled_sd,
    })
}

/// Conventional magnitude label for a standardized difference.
pub fn d_band(d: f64) -> &'static str {
    match d.abs() {
        x if x >= 0.8 => "large",
        x if x >= 0.5 => "medium",
        x if x >= 0.2 => "small",
        _ => "negligible",
    }
}
