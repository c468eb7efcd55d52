use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::corpus::SplitAssignment;
use crate::error::{Error, Result};
use crate::stats::{logistic_fit, select_rows, FitOptions};

/// Accuracy margin over the majority-class rate below which a probe is
/// considered to have found nothing.
pub const INLP_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionState {
    /// Probes fit.
    pub iterations: usize,
    /// Orthonormal directions removed, in order.
    pub removed_directions: Vec<Vec<f64>>,
    /// Held-out accuracy of the probe fit at each iteration, measured before
    /// that iteration's projection.
    pub probe_scores: Vec<f64>,
    /// Majority-class rate on the held-out rows.
    pub majority_baseline: f64,
}

pub(crate) fn accuracy(scores: &[f64], labels: &[f64]) -> f64 {
    let hits = scores.iter().zip(labels).filter(|(s, l)| (**s > 0.5) == (**l > 0.5)).count();
    hits as f64 / labels.len() as f64
}

/// Iterative nullspace projection.
///
/// Each iteration fits a penalized logistic probe for `z_labels` on the
/// training rows of `split`, scores it on the held-out rows, and stops if the
/// accuracy is within [`INLP_TOLERANCE`] of the majority-class rate.
/// Otherwise the probe direction is orthogonalized against earlier ones and
/// projected out of every row.
pub fn nullspace_project(
    embeddings: &DMatrix<f64>,
    z_labels: &[f64],
    max_iter: usize,
    split: &SplitAssignment,
) -> Result<(DMatrix<f64>, ProjectionState)> {
    let (n, d) = embeddings.shape();
    if z_labels.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: z_labels.len() });
    }
    if max_iter == 0 {
        return Err(Error::InvalidInput("max_iter must be at least 1".into()));
    }
    if let Some(v) = z_labels.iter().find(|&&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidInput(format!("z label {v} is not binary")));
    }
    let positives = z_labels.iter().filter(|&&v| v == 1.0).count();
    if positives == 0 || positives == n {
        return Err(Error::SingleClass);
    }
    split.validate(n)?;
    let (train, test) = split.train_test()?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| z_labels[i]).collect::<Vec<f64>>();
    let (z_train, z_test) = (pick(&train), pick(&test));
    let test_pos = z_test.iter().sum::<f64>() / z_test.len() as f64;
    let majority_baseline = test_pos.max(1.0 - test_pos);

    let options = FitOptions { ridge_fallback: true, standardize: false, ..FitOptions::default() };
    let mut projected = embeddings.clone();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut state = ProjectionState {
        iterations: 0,
        removed_directions: Vec::new(),
        probe_scores: Vec::new(),
        majority_baseline,
    };

    while state.iterations < max_iter {
        state.iterations += 1;
        let probe = logistic_fit(&select_rows(&projected, &train), &z_train, &options)?;
        let acc = accuracy(&probe.predict(&select_rows(&projected, &test)), &z_test);
        state.probe_scores.push(acc);
        if acc <= majority_baseline + INLP_TOLERANCE {
            break;
        }
        let mut u = DVector::from_column_slice(&probe.coefficients);
        for q in &basis {
            let c = q.dot(&u);
            u.axpy(-c, q, 1.0);
        }
        let norm = u.norm();
        if norm <= 1e-12 || basis.len() == d {
            break;
        }
        u /= norm;
        let xu = &projected * &u;
        projected -= xu * u.transpose();
        state.removed_directions.push(u.iter().copied().collect());
        basis.push(u);
    }
    Ok((projected, state))
}
