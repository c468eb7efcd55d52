use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::SyntheticTruth;
use crate::corpus::{
    write_matrix, AnchorSet, CorpusManifest, DocumentRecord, EmbeddingMatrix, LabelColumn,
    LabelKind, ManifestBuilder, Normalization, Pooling, SplitAssignment,
};
use crate::error::{Error, Result};

pub const PROXY_DIRECTION_FILE: &str = "proxy_direction.bin";

/// How the exported corpus is perturbed and which auxiliary columns it gets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbationRecipe {
    pub n_variants: usize,
    /// Per-element sd of the Gaussian jitter added to each variant.
    pub jitter_sd: f64,
    /// Per-variant shift along the proxy direction; missing entries are 0.
    pub offsets: Vec<f64>,
    pub seed: u64,
    pub gold_noise_sd: f64,
    pub gold_raters: usize,
    pub outcome_noise_sd: f64,
    pub anchor_fraction: f64,
    pub test_fraction: f64,
}

impl Default for PerturbationRecipe {
    fn default() -> Self {
        Self {
            n_variants: 1,
            jitter_sd: 0.0,
            offsets: Vec::new(),
            seed: 0,
            gold_noise_sd: 0.5,
            gold_raters: 3,
            outcome_noise_sd: 1.0,
            anchor_fraction: 0.05,
            test_fraction: 0.3,
        }
    }
}

/// Writes the synthetic corpus under `dir` and returns the loaded manifest.
///
/// Labels: `L` (the configured link), `c` (first concept factor), `proxy`,
/// `gold` and `gold_rater_<r>` (noisy copies of `c`), `Y` (outcome driven by
/// `c`) and, with nuisance factors, `Y_placebo` (driven by the first nuisance
/// factor). Nuisance factors are exported as block `z`. The proxy direction is
/// written next to the manifest as a 1-row matrix.
pub fn export_as_manifest(
    truth: &SyntheticTruth,
    recipe: &PerturbationRecipe,
    dir: impl AsRef<Path>,
) -> Result<CorpusManifest> {
    let dir = dir.as_ref();
    if recipe.n_variants == 0 {
        return Err(Error::InvalidInput("recipe needs at least one variant".into()));
    }
    if !(recipe.jitter_sd >= 0.0 && recipe.jitter_sd.is_finite()) {
        return Err(Error::InvalidInput(format!("jitter_sd must be non-negative, got {}", recipe.jitter_sd)));
    }
    let n = truth.embeddings.nrows();
    let d = truth.embeddings.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);
    let mut normal = |sd: f64| sd * rng.sample::<f64, _>(StandardNormal);

    let mut builder = ManifestBuilder::new(dir)?;
    builder.documents(
        (0..n)
            .map(|i| DocumentRecord {
                doc_id: format!("syn-{i}"),
                text: String::new(),
                meta: BTreeMap::from([("source".to_string(), "synthetic".to_string())]),
            })
            .collect(),
    );

    for v in 0..recipe.n_variants {
        let offset = recipe.offsets.get(v).copied().unwrap_or(0.0);
        let m = DMatrix::from_fn(n, d, |i, j| {
            truth.embeddings[(i, j)] + offset * truth.proxy_direction[j] + normal(recipe.jitter_sd)
        });
        let matrix = EmbeddingMatrix::from_dmatrix(&m, format!("jitter-{v}"))?;
        builder.variant(
            &format!("synthetic-jitter-{v}"),
            Pooling::Mean,
            Normalization::Original,
            &matrix,
        )?;
    }

    let c = truth.concept_score();
    builder.label("L", &LabelColumn::complete(truth.label_kind, truth.labels.clone()));
    builder.label("c", &LabelColumn::complete(LabelKind::Real, c.clone()));
    builder.label("proxy", &LabelColumn::complete(LabelKind::Real, truth.proxy.clone()));
    let gold: Vec<f64> = c.iter().map(|v| v + normal(recipe.gold_noise_sd)).collect();
    builder.label("gold", &LabelColumn::complete(LabelKind::Real, gold));
    for r in 0..recipe.gold_raters {
        let rater: Vec<f64> = c.iter().map(|v| v + normal(recipe.gold_noise_sd)).collect();
        builder.label(&format!("gold_rater_{r}"), &LabelColumn::complete(LabelKind::Real, rater));
    }
    let y: Vec<f64> = c.iter().map(|v| v + normal(recipe.outcome_noise_sd)).collect();
    builder.label("Y", &LabelColumn::complete(LabelKind::Real, y));

    if truth.z_values.ncols() > 0 {
        let placebo: Vec<f64> = truth
            .z_values
            .column(0)
            .iter()
            .map(|v| v + normal(recipe.outcome_noise_sd))
            .collect();
        builder.label("Y_placebo", &LabelColumn::complete(LabelKind::Real, placebo));
        let names: Vec<String> = (0..truth.z_values.ncols()).map(|j| format!("z_{j}")).collect();
        builder.nuisance_block("z", &names, &EmbeddingMatrix::from_dmatrix(&truth.z_values, "z")?)?;
    }

    builder.anchors(anchors_from_score(&c, recipe.anchor_fraction));
    builder.splits(SplitAssignment::holdout(n, recipe.test_fraction, recipe.seed)?);

    let direction = EmbeddingMatrix::new(1, d, truth.proxy_direction.clone(), "proxy_direction")?;
    write_matrix(&direction, dir.join(PROXY_DIRECTION_FILE))?;
    builder.finish()
}

/// Top and bottom `fraction` of documents by score, plus as many documents
/// nearest the median as borderline.
fn anchors_from_score(score: &[f64], fraction: f64) -> AnchorSet {
    let n = score.len();
    let count = ((n as f64 * fraction).round() as usize).clamp(2, n / 3);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| score[a].partial_cmp(&score[b]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    let ids = |idx: &[usize]| idx.iter().map(|i| format!("syn-{i}")).collect::<Vec<_>>();
    let mid = n / 2 - count / 2;
    AnchorSet {
        high_ids: ids(&order[n - count..]),
        low_ids: ids(&order[..count]),
        borderline_ids: ids(&order[mid..mid + count]),
    }
}
