use std::fs;
use std::path::{Path, PathBuf};

use construct_validity::cards::{
    run_suite, CardStatus, Card1Config, Card2Config, Card3Config, Card5Config, FlagLevel, ProxySpec,
    SuiteConfig, ValidityCardReport,
};
use construct_validity::corpus::{load_manifest, read_matrix, CorpusManifest, EmbeddingMatrix, SplitAssignment, MANIFEST_FILE};
use construct_validity::geometry::{neutralize_matrix, nullspace_project, rotation_ambiguity_experiment, ScorerSpec};
use construct_validity::nuisance::{apply_topic_block, fit_topic_block, style_block, FeatureBlock, FitSplit};
use construct_validity::report::{to_json, write_card, write_suite};
use construct_validity::synthetic::{
    export_as_manifest, generate, LabelLink, PerturbationRecipe, Rotation, SyntheticSpec, PROXY_DIRECTION_FILE,
};
use construct_validity::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{Failure, Featurizer, Outcome, Settings};

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io { path: path.to_path_buf(), source: e }
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Error> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(io(&path))?;
    Ok(path)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })
}

fn list(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn load(settings: &Settings) -> Result<CorpusManifest, Error> {
    load_manifest(settings.manifest_path()?)
}

fn strict_check(settings: &Settings, reports: &[ValidityCardReport]) -> Outcome {
    let failing: Vec<String> = reports
        .iter()
        .filter(|r| r.worst_flag() == Some(FlagLevel::Fail))
        .map(|r| r.card_id.to_string())
        .collect();
    if settings.strict && !failing.is_empty() {
        return Err(Failure::Strict(format!("fail flags raised by {}", failing.join(", "))));
    }
    Ok(())
}

#[derive(Serialize)]
struct IngestSummary {
    manifest: PathBuf,
    documents: usize,
    variants: Vec<Value>,
    labels: Vec<Value>,
    nuisance_blocks: Vec<Value>,
    anchors: Value,
    splits: Vec<Value>,
}

fn summarize(path: PathBuf, m: &CorpusManifest) -> IngestSummary {
    IngestSummary {
        manifest: path,
        documents: m.len(),
        variants: m
            .variants
            .iter()
            .map(|v| {
                json!({
                    "variant_id": v.descriptor.variant_id,
                    "encoder_name": v.descriptor.encoder_name,
                    "dims": v.matrix.header().dims,
                })
            })
            .collect(),
        labels: m
            .labels
            .iter()
            .map(|(name, col)| json!({ "name": name, "kind": col.kind, "present": col.present_count() }))
            .collect(),
        nuisance_blocks: m
            .nuisance_blocks
            .iter()
            .map(|(name, b)| json!({ "name": name, "features": b.feature_names.len() }))
            .collect(),
        anchors: json!({
            "high": m.anchors.high_ids.len(),
            "low": m.anchors.low_ids.len(),
            "borderline": m.anchors.borderline_ids.len(),
        }),
        splits: m.splits.parts().map(|(name, rows)| json!({ "name": name, "size": rows.len() })).collect(),
    }
}

/// Feature blocks are written next to the manifest, which is then rewritten
/// to reference them and reloaded through validation.
fn add_blocks(manifest_path: &Path, m: &CorpusManifest, blocks: &[FeatureBlock]) -> Result<CorpusManifest, Error> {
    let file = if manifest_path.is_dir() { manifest_path.join(MANIFEST_FILE) } else { manifest_path.to_path_buf() };
    let mut raw: Value = read_json(&file)?;
    let entries = raw
        .as_object_mut()
        .ok_or_else(|| Error::Parse { path: file.clone(), message: "manifest is not a JSON object".into() })?
        .entry("nuisance_blocks")
        .or_insert_with(|| json!({}));
    for block in blocks {
        let reference = block.write(m.base_dir())?;
        entries[&block.block_name] = serde_json::to_value(reference).expect("reference serializes");
    }
    fs::write(&file, serde_json::to_string_pretty(&raw).expect("manifest serializes")).map_err(io(&file))?;
    load_manifest(&file)
}

pub(crate) fn ingest(settings: &Settings, featurize: &[Featurizer], topic_dims: usize) -> Outcome {
    let path = settings.manifest_path()?;
    let mut manifest = load_manifest(path)?;
    let no_text = manifest.texts().iter().all(|t| t.trim().is_empty());
    if !featurize.is_empty() && no_text {
        eprintln!("warning: documents carry no text; skipping text-derived nuisance blocks");
    } else if !featurize.is_empty() {
        let texts = manifest.texts();
        let mut blocks = Vec::new();
        for f in featurize {
            match f {
                Featurizer::Style => blocks.push(style_block(&texts)),
                Featurizer::Topic => {
                    let state = match manifest.splits.get("train") {
                        Some(rows) => fit_topic_block(&texts, topic_dims, &FitSplit::Rows { name: "train", indices: rows })?,
                        None => fit_topic_block(&texts, topic_dims, &FitSplit::All)?,
                    };
                    blocks.push(apply_topic_block(&state, &texts));
                }
            }
        }
        manifest = add_blocks(path, &manifest, &blocks)?;
    }
    let summary = summarize(path.to_path_buf(), &manifest);
    list(&[write_text(&settings.out, "ingest.json", &to_json(&summary))?]);
    Ok(())
}

pub(crate) fn card(settings: &Settings, number: u8) -> Outcome {
    let manifest = load(settings)?;
    let mut config = settings.suite_config()?;
    config.cards = vec![number];
    let suite = run_suite(&manifest, &config)?;
    let report = &suite.reports[0];
    list(&write_card(&settings.out, report, settings.format)?);
    let reason = report.details.get("reason").and_then(Value::as_str).unwrap_or("").to_string();
    match report.status {
        CardStatus::Error => {
            let code = report.details.get("error_code").and_then(Value::as_str).unwrap_or("E_CARD");
            eprintln!("{code}: {} could not be computed: {reason}", report.card_id);
            Err(Failure::Invalid(Error::InvalidInput(format!("{} failed", report.card_id))))
        }
        CardStatus::Unavailable => {
            eprintln!("{} unavailable: {reason}", report.card_id);
            Ok(())
        }
        CardStatus::Complete => strict_check(settings, &suite.reports),
    }
}

pub(crate) fn suite(settings: &Settings) -> Outcome {
    let manifest = load(settings)?;
    let config = settings.suite_config()?;
    let suite = run_suite(&manifest, &config)?;
    list(&write_suite(&settings.out, &suite, settings.format)?);
    eprintln!("overall: {:?}", suite.overall);
    strict_check(settings, &suite.reports)
}

pub(crate) fn rotation(settings: &Settings, dims: usize, seeds: u64, n_docs: usize, noise_sd: f64) -> Outcome {
    if dims < 2 {
        return Err(Error::InvalidInput(format!("dims must be at least 2, got {dims}")).into());
    }
    let spec = SyntheticSpec {
        n_docs,
        c_dims: 1,
        z_dims: dims - 1,
        embed_dims: dims,
        noise_sd,
        rotation: Rotation::Random { seed: settings.seed.unwrap_or(0) },
        label_link: LabelLink::Linear,
        ..SyntheticSpec::default()
    };
    let first = settings.seed.unwrap_or(0);
    let reports = (first..first + seeds)
        .map(|s| rotation_ambiguity_experiment(&spec, s))
        .collect::<Result<Vec<_>, _>>()?;
    let max_r2_diff = reports.iter().map(|r| (r.probe_r2_rotated - r.probe_r2_unrotated).abs()).fold(0.0, f64::max);
    let below = reports.iter().filter(|r| r.coord1_corr_rotated.abs() < 0.9).count();
    let summary = json!({
        "dims": dims,
        "n_docs": n_docs,
        "seeds": seeds,
        "max_probe_r2_difference": max_r2_diff,
        "seeds_with_coord1_corr_below_0.9": below,
        "runs": reports,
    });
    let mut csv = String::from("seed,coord1_corr_unrotated,coord1_corr_rotated,probe_r2_unrotated,probe_r2_rotated\n");
    for r in &reports {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.seed, r.coord1_corr_unrotated, r.coord1_corr_rotated, r.probe_r2_unrotated, r.probe_r2_rotated
        ));
    }
    list(&[
        write_text(&settings.out, "rotation.json", &to_json(&summary))?,
        write_text(&settings.out, "rotation.csv", &csv)?,
    ]);
    Ok(())
}

pub(crate) fn nullspace(
    settings: &Settings,
    label: &str,
    variant: Option<&str>,
    max_iter: usize,
    write_matrix: bool,
) -> Outcome {
    let manifest = load(settings)?;
    let variant = match variant {
        Some(v) => v.to_string(),
        None => manifest
            .variants
            .first()
            .map(|v| v.descriptor.variant_id.clone())
            .ok_or_else(|| Error::Missing("embedding variant".into()))?,
    };
    let col = manifest.label(label)?;
    let rows = col.present_indices();
    let z: Vec<f64> = rows.iter().map(|&i| col.get(i).unwrap_or_default()).collect();
    let x = manifest.matrix(&variant)?.select_rows(&rows);
    let split = SplitAssignment::holdout(rows.len(), 0.3, settings.seed.unwrap_or(0))?;
    let (projected, state) = nullspace_project(&x, &z, max_iter, &split)?;
    let summary = json!({ "variant": variant, "label": label, "n_docs": rows.len(), "state": state });
    let mut written = vec![write_text(&settings.out, "nullspace.json", &to_json(&summary))?];
    if write_matrix {
        let path = settings.out.join(format!("nullspace_{variant}.bin"));
        let m = EmbeddingMatrix::from_dmatrix(&projected, format!("{variant}-nullspace"))?;
        construct_validity::corpus::write_matrix(&m, &path)?;
        written.push(path);
    }
    list(&written);
    Ok(())
}

fn read_vector(path: &Path) -> Result<Vec<f64>, Error> {
    let m = read_matrix(path)?;
    if m.rows() != 1 {
        return Err(Error::InvalidInput(format!("{} has {} rows, expected 1", path.display(), m.rows())));
    }
    Ok(m.values().to_vec())
}

pub(crate) fn neutralize(
    settings: &Settings,
    observed: &str,
    baseline: &str,
    weights: Option<&Path>,
    bias: f64,
    reference: Option<&Path>,
) -> Outcome {
    let manifest = load(settings)?;
    let spec = match (weights, reference) {
        (Some(w), None) => ScorerSpec::LinearProbe { weights: read_vector(w)?, bias },
        (None, Some(r)) => ScorerSpec::CosineToReference { reference: read_vector(r)? },
        _ => return Err(Error::Config("give exactly one of --weights or --reference".into()).into()),
    };
    let scorer = spec.build();
    let scores = neutralize_matrix(scorer.as_ref(), &*manifest.matrix(observed)?, &*manifest.matrix(baseline)?)?;
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let sd = (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
    let summary = json!({
        "observed_variant": observed,
        "baseline_variant": baseline,
        "scorer": scorer.name(),
        "n_docs": scores.len(),
        "mean": mean,
        "sd": sd,
    });
    let mut csv = String::from("doc_id,score\n");
    for (doc, s) in manifest.documents.iter().zip(&scores) {
        csv.push_str(&format!("{},{s}\n", doc.doc_id));
    }
    list(&[
        write_text(&settings.out, "neutralize.json", &to_json(&summary))?,
        write_text(&settings.out, "neutralize.csv", &csv)?,
    ]);
    Ok(())
}

/// A suite configuration wired to the columns the synthetic export writes.
fn synthetic_suite_config(spec: &SyntheticSpec, recipe: &PerturbationRecipe, seed: u64) -> Value {
    let mut config = SuiteConfig::new(ProxySpec::Linear {
        weights_path: PROXY_DIRECTION_FILE.into(),
        bias: 0.0,
        variant: None,
    });
    config.run.seed = seed;
    if recipe.n_variants < 2 {
        config.cards.retain(|&c| c != 1);
    }
    config.card1 = Card1Config {
        label: matches!(spec.label_link, LabelLink::Logistic { .. }).then(|| "L".to_string()),
        ..Card1Config::default()
    };
    config.card2 = Card2Config {
        gold: Some("gold".into()),
        gold_raters: (0..recipe.gold_raters).map(|r| format!("gold_rater_{r}")).collect(),
        ..Card2Config::default()
    };
    if spec.z_dims > 0 {
        config.card3 = Card3Config { blocks: vec!["z".into()], label: Some("L".into()), ..Card3Config::default() };
    } else {
        config.cards.retain(|&c| c != 3);
    }
    config.card5 = Card5Config {
        outcome: Some("Y".into()),
        placebo: (spec.z_dims > 0).then(|| "Y_placebo".to_string()),
        ..Card5Config::default()
    };
    let mut value = serde_json::to_value(&config).expect("config serializes");
    value["manifest"] = json!(MANIFEST_FILE);
    value
}

pub(crate) fn synth(settings: &Settings, spec_path: Option<&Path>, recipe_path: Option<&Path>) -> Outcome {
    let spec: SyntheticSpec = spec_path.map(read_json).transpose()?.unwrap_or_default();
    let seed = settings.seed.unwrap_or(0);
    let mut recipe: PerturbationRecipe = recipe_path.map(read_json).transpose()?.unwrap_or_default();
    if recipe_path.is_none() {
        recipe.seed = seed;
    }
    let truth = generate(&spec, seed)?;
    fs::create_dir_all(&settings.out).map_err(io(&settings.out))?;
    export_as_manifest(&truth, &recipe, &settings.out)?;
    let planted = json!({
        "seed": seed,
        "spec": spec,
        "recipe": recipe,
        "planted_r2_c": truth.planted_r2_c,
        "planted_r2_z": truth.planted_r2_z,
        "nuisance_scale": truth.nuisance_scale,
        "proxy_direction": truth.proxy_direction,
    });
    list(&[
        settings.out.join(MANIFEST_FILE),
        write_text(&settings.out, "truth.json", &to_json(&planted))?,
        write_text(&settings.out, "suite_config.json", &to_json(&synthetic_suite_config(&spec, &recipe, seed)))?,
    ]);
    Ok(())
}
