use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::describe::pearson;
use crate::stats::{ols_fit, FitOptions};
use crate::synthetic::{random_orthogonal, Rotation, SyntheticSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityReport {
    pub seed: u64,
    pub dims: usize,
    pub n_docs: usize,
    /// corr(coordinate 1, c) before rotation.
    pub coord1_corr_unrotated: f64,
    /// corr(coordinate 1, c) after rotation.
    pub coord1_corr_rotated: f64,
    /// R² of a linear probe for c on all coordinates, before rotation.
    pub probe_r2_unrotated: f64,
    /// Same probe after rotation.
    pub probe_r2_rotated: f64,
}

/// Draws isotropic latents `h = [c; z]` of `c_dims + z_dims` coordinates,
/// observes `e = h + noise`, and compares the first coordinate and a
/// full-vector probe for `c = h_1` before and after an orthogonal rotation.
///
/// The rotation is Haar-random from `seed` unless `spec.rotation` is
/// [`Rotation::None`], in which case it is the identity.
pub fn rotation_ambiguity_experiment(spec: &SyntheticSpec, seed: u64) -> Result<AmbiguityReport> {
    spec.validate()?;
    let dims = spec.c_dims + spec.z_dims;
    if dims < 2 {
        return Err(Error::InvalidInput(format!("rotation experiment needs at least 2 dims, got {dims}")));
    }
    let n = spec.n_docs;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = DMatrix::from_fn(n, dims, |_, _| rng.sample::<f64, _>(StandardNormal));
    let e = DMatrix::from_fn(n, dims, |i, j| h[(i, j)] + spec.noise_sd * rng.sample::<f64, _>(StandardNormal));
    let r = match spec.rotation {
        Rotation::None => DMatrix::identity(dims, dims),
        Rotation::Random { .. } => random_orthogonal(dims, &mut rng),
    };
    let rotated = &e * r.transpose();
    let c: Vec<f64> = h.column(0).iter().copied().collect();
    let col0 = |m: &DMatrix<f64>| m.column(0).iter().copied().collect::<Vec<f64>>();
    let options = FitOptions { standardize: false, ..FitOptions::default() };
    Ok(AmbiguityReport {
        seed,
        dims,
        n_docs: n,
        coord1_corr_unrotated: pearson(&col0(&e), &c)?,
        coord1_corr_rotated: pearson(&col0(&rotated), &c)?,
        probe_r2_unrotated: ols_fit(&e, &c, &options)?.r_squared,
        probe_r2_rotated: ols_fit(&rotated, &c, &options)?.r_squared,
    })
}
