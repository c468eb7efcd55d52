//! Latent-factor corpus generator with planted ground truth.
//!
//! Documents are drawn from independent standard-normal concept factors `c`
//! and nuisance factors `z`. Each factor group is mapped into the embedding
//! space through its own block of orthonormal columns, the nuisance block is
//! scaled to a target norm ratio, isotropic Gaussian noise is added, and the
//! result is optionally rotated by a random orthogonal matrix.
//!
//! Because the mixing columns are orthonormal, explained-variance figures
//! have closed forms: a full-embedding linear probe for any concept
//! coordinate has population R² of `1 / (1 + noise_sd²)`.

mod export;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::corpus::LabelKind;
use crate::error::{Error, Result};
use crate::stats::sigmoid;

pub use export::{export_as_manifest, PerturbationRecipe, PROXY_DIRECTION_FILE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rotation {
    None,
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelLink {
    /// The label is the concept score itself.
    Linear,
    /// `L ~ Bernoulli(sigmoid(score - threshold))`.
    Logistic { threshold: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_docs: usize,
    pub c_dims: usize,
    pub z_dims: usize,
    pub embed_dims: usize,
    /// Target `||nuisance signal|| / ||concept signal||` (Frobenius norms).
    pub nuisance_to_concept_ratio: f64,
    pub noise_sd: f64,
    pub rotation: Rotation,
    pub label_link: LabelLink,
    /// Share of the exported proxy's variance carried by the first nuisance
    /// factor; this is the proxy's population R² on the nuisance block.
    pub proxy_nuisance_share: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_docs: 2000,
            c_dims: 2,
            z_dims: 6,
            embed_dims: 16,
            nuisance_to_concept_ratio: 1.0,
            noise_sd: 0.3,
            rotation: Rotation::None,
            label_link: LabelLink::Logistic { threshold: 0.0 },
            proxy_nuisance_share: 0.0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.n_docs < 2 {
            return bad(format!("n_docs must be at least 2, got {}", self.n_docs));
        }
        if self.c_dims == 0 {
            return bad("c_dims must be at least 1".into());
        }
        let factors = self.c_dims + self.z_dims + self.embed_dims;
        if self.n_docs <= factors {
            return bad(format!(
                "n_docs must exceed c_dims + z_dims + embed_dims = {factors}, got {}",
                self.n_docs
            ));
        }
        if self.embed_dims < self.c_dims + self.z_dims {
            return bad(format!(
                "embed_dims {} is smaller than c_dims + z_dims = {}",
                self.embed_dims,
                self.c_dims + self.z_dims
            ));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return bad(format!("noise_sd must be non-negative, got {}", self.noise_sd));
        }
        let ratio = self.nuisance_to_concept_ratio;
        if !ratio.is_finite() || ratio < 0.0 {
            return bad(format!("nuisance_to_concept_ratio must be non-negative, got {ratio}"));
        }
        match (self.z_dims, ratio > 0.0) {
            (0, true) => return bad(format!("ratio {ratio} is infeasible without nuisance dimensions")),
            (z, false) if z > 0 => return bad("ratio must be positive when z_dims > 0".into()),
            _ => {}
        }
        let share = self.proxy_nuisance_share;
        if !(0.0..1.0).contains(&share) {
            return bad(format!("proxy_nuisance_share must lie in [0, 1), got {share}"));
        }
        if share > 0.0 && self.z_dims == 0 {
            return bad("proxy_nuisance_share > 0 needs nuisance dimensions".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTruth {
    pub spec: SyntheticSpec,
    pub seed: u64,
    /// n x c_dims
    pub c_values: DMatrix<f64>,
    /// n x z_dims
    pub z_values: DMatrix<f64>,
    /// n x embed_dims
    pub embeddings: DMatrix<f64>,
    pub labels: Vec<f64>,
    pub label_kind: LabelKind,
    /// Population R² of a full-embedding linear probe for a concept factor.
    pub planted_r2_c: f64,
    /// Population R² of the proxy regressed on the nuisance factors.
    pub planted_r2_z: f64,
    /// Unit vector in embedding space defining the proxy.
    pub proxy_direction: Vec<f64>,
    /// `embeddings * proxy_direction`
    pub proxy: Vec<f64>,
    /// Realized multiplier applied to the nuisance block.
    pub nuisance_scale: f64,
}

impl SyntheticTruth {
    /// The concept score the labels are generated from (first concept factor).
    pub fn concept_score(&self) -> Vec<f64> {
        self.c_values.column(0).iter().copied().collect()
    }
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`.
pub fn random_orthogonal(dims: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dims, dims, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dims {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Centered columns with unit sample variance and zero sample covariance.
fn whitened(g: DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    let mut g = g;
    for mut col in g.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q * ((n - 1) as f64).sqrt()
}

pub fn generate(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticTruth> {
    spec.validate()?;
    let (n, cd, zd, ed) = (spec.n_docs, spec.c_dims, spec.z_dims, spec.embed_dims);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let factors = whitened(gaussian(&mut rng, n, cd + zd + ed));
    let c_values = factors.columns(0, cd).into_owned();
    let z_values = factors.columns(cd, zd).into_owned();
    let noise = factors.columns(cd + zd, ed).into_owned();
    let mixing = gaussian(&mut rng, ed, cd + zd).qr().q();
    let a = mixing.columns(0, cd).into_owned();
    let b = mixing.columns(cd, zd).into_owned();

    let concept_signal = &c_values * a.transpose();
    let mut embeddings = concept_signal.clone();
    let mut nuisance_scale = 0.0;
    if zd > 0 {
        let nuisance_signal = &z_values * b.transpose();
        nuisance_scale = spec.nuisance_to_concept_ratio * concept_signal.norm() / nuisance_signal.norm();
        embeddings += nuisance_signal * nuisance_scale;
    }
    if spec.noise_sd > 0.0 {
        embeddings += noise * spec.noise_sd;
    }

    // proxy = alpha * a_1 + beta * b_1, with beta chosen so the nuisance
    // factor explains `proxy_nuisance_share` of the proxy's variance
    let share = spec.proxy_nuisance_share;
    let sigma2 = spec.noise_sd * spec.noise_sd;
    let beta2 = if share > 0.0 {
        share * (1.0 + sigma2) / (nuisance_scale * nuisance_scale * (1.0 - share) + share)
    } else {
        0.0
    };
    if beta2 > 1.0 {
        return Err(Error::InvalidInput(format!(
            "proxy_nuisance_share {share} is unreachable at nuisance scale {nuisance_scale:.4}"
        )));
    }
    let mut direction: Vec<f64> = (0..ed)
        .map(|i| {
            let mut v = (1.0 - beta2).sqrt() * a[(i, 0)];
            if zd > 0 {
                v += beta2.sqrt() * b[(i, 0)];
            }
            v
        })
        .collect();

    if let Rotation::Random { seed: rot_seed } = spec.rotation {
        let r = random_orthogonal(ed, &mut ChaCha8Rng::seed_from_u64(rot_seed));
        embeddings = &embeddings * r.transpose();
        let rotated = &r * nalgebra::DVector::from_column_slice(&direction);
        direction = rotated.iter().copied().collect();
    }

    let proxy: Vec<f64> = (0..n)
        .map(|i| embeddings.row(i).iter().zip(&direction).map(|(e, w)| e * w).sum())
        .collect();

    let score: Vec<f64> = c_values.column(0).iter().copied().collect();
    let (labels, label_kind) = match spec.label_link {
        LabelLink::Linear => (score, LabelKind::Real),
        LabelLink::Logistic { threshold } => (
            score
                .iter()
                .map(|&s| f64::from(u8::from(rng.random::<f64>() < sigmoid(s - threshold))))
                .collect(),
            LabelKind::Binary,
        ),
    };

    let proxy_var = (1.0 - beta2) + beta2 * nuisance_scale * nuisance_scale + sigma2;
    Ok(SyntheticTruth {
        spec: spec.clone(),
        seed,
        c_values,
        z_values,
        embeddings,
        labels,
        label_kind,
        planted_r2_c: 1.0 / (1.0 + sigma2),
        planted_r2_z: beta2 * nuisance_scale * nuisance_scale / proxy_var,
        proxy_direction: direction,
        proxy,
        nuisance_scale,
    })
}
