//! Corpus manifests: documents, embedding variants, labels, nuisance blocks,
//! anchors and splits, with full integrity validation at load time.

mod matrix;
mod split;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use matrix::{
    read_matrix, read_matrix_header, scan_payload_finite, write_matrix, EmbeddingMatrix,
    MatrixHeader,
};
pub use split::{SplitAssignment, SplitPolicy};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    #[serde(rename = "id")]
    pub doc_id: String,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    Mean,
    Cls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Original,
    LowercaseStripPunct,
}

impl fmt::Display for Pooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pooling::Mean => "mean",
            Pooling::Cls => "cls",
        })
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Original => "original",
            Normalization::LowercaseStripPunct => "lowercase_strip_punct",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantDescriptor {
    pub variant_id: String,
    pub encoder_name: String,
    pub pooling: Pooling,
    pub normalization: Normalization,
    pub matrix_path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelKind {
    Binary,
    Real,
}

/// One label column; `present[i] == false` marks a missing entry whose
/// value is never read.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelColumn {
    pub kind: LabelKind,
    values: Vec<f64>,
    present: Vec<bool>,
}

impl LabelColumn {
    pub fn complete(kind: LabelKind, values: Vec<f64>) -> Self {
        let present = vec![true; values.len()];
        Self {
            kind,
            values,
            present,
        }
    }

    pub fn with_missing(kind: LabelKind, values: Vec<Option<f64>>) -> Self {
        let present = values.iter().map(Option::is_some).collect();
        let values = values.into_iter().map(|v| v.unwrap_or(0.0)).collect();
        Self {
            kind,
            values,
            present,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.present[i].then_some(self.values[i])
    }

    pub fn present_count(&self) -> usize {
        self.present.iter().filter(|&&p| p).count()
    }

    /// Indices with a present value.
    pub fn present_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.present[i]).collect()
    }

    fn validate(&self, name: &str, n_docs: usize) -> Result<()> {
        let field = || format!("labels.{name}");
        if self.values.len() != n_docs || self.present.len() != n_docs {
            return Err(Error::integrity(
                field(),
                format!(
                    "{} values / {} presence flags for {n_docs} documents",
                    self.values.len(),
                    self.present.len()
                ),
            ));
        }
        for i in self.present_indices() {
            let v = self.values[i];
            if !v.is_finite() {
                return Err(Error::integrity(field(), format!("non-finite value at {i}")));
            }
            if self.kind == LabelKind::Binary && v != 0.0 && v != 1.0 {
                return Err(Error::integrity(
                    field(),
                    format!("binary label has value {v} at {i}"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct LabelColumnFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<LabelKind>,
    values: Vec<Option<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    present: Option<Vec<bool>>,
}

impl LabelColumnFile {
    fn into_column(self, name: &str) -> Result<LabelColumn> {
        let present = match self.present {
            Some(p) => p,
            None => self.values.iter().map(Option::is_some).collect(),
        };
        if present.len() != self.values.len() {
            return Err(Error::integrity(
                format!("labels.{name}"),
                "presence bitmap length differs from values length",
            ));
        }
        let mut values = Vec::with_capacity(present.len());
        for (i, (v, &p)) in self.values.iter().zip(&present).enumerate() {
            match (v, p) {
                (Some(x), _) => values.push(*x),
                (None, false) => values.push(0.0),
                (None, true) => {
                    return Err(Error::integrity(
                        format!("labels.{name}"),
                        format!("entry {i} marked present but has no value"),
                    ))
                }
            }
        }
        let kind = self.kind.unwrap_or_else(|| {
            let binary = values
                .iter()
                .zip(&present)
                .filter(|(_, &p)| p)
                .all(|(&v, _)| v == 0.0 || v == 1.0);
            if binary {
                LabelKind::Binary
            } else {
                LabelKind::Real
            }
        });
        Ok(LabelColumn {
            kind,
            values,
            present,
        })
    }

    fn from_column(col: &LabelColumn) -> Self {
        Self {
            kind: Some(col.kind),
            values: (0..col.len()).map(|i| col.get(i)).collect(),
            present: Some(col.present.clone()),
        }
    }
}

/// Pointer to a nuisance feature block on disk: a matrix file plus a JSON
/// sidecar listing one name per column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureBlockRef {
    pub matrix_path: PathBuf,
    pub names_path: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorSet {
    #[serde(default)]
    pub high_ids: Vec<String>,
    #[serde(default)]
    pub low_ids: Vec<String>,
    #[serde(default)]
    pub borderline_ids: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ManifestFile {
    documents: Vec<DocumentRecord>,
    #[serde(default)]
    variants: Vec<VariantDescriptor>,
    #[serde(default)]
    labels: BTreeMap<String, LabelColumnFile>,
    #[serde(default)]
    nuisance_blocks: BTreeMap<String, FeatureBlockRef>,
    #[serde(default)]
    anchors: AnchorSet,
    #[serde(default)]
    splits: SplitAssignment,
}

/// A lazily loaded matrix whose header was checked at manifest load.
#[derive(Debug)]
pub struct MatrixHandle {
    path: PathBuf,
    header: MatrixHeader,
    cache: OnceLock<Arc<EmbeddingMatrix>>,
}

impl MatrixHandle {
    fn open(path: PathBuf) -> Result<Self> {
        let header = read_matrix_header(&path)?;
        Ok(Self {
            path,
            header,
            cache: OnceLock::new(),
        })
    }

    pub fn header(&self) -> &MatrixHeader {
        &self.header
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn load(&self) -> Result<Arc<EmbeddingMatrix>> {
        if let Some(m) = self.cache.get() {
            return Ok(Arc::clone(m));
        }
        let m = Arc::new(read_matrix(&self.path)?);
        Ok(Arc::clone(self.cache.get_or_init(|| m)))
    }
}

#[derive(Debug)]
pub struct Variant {
    pub descriptor: VariantDescriptor,
    pub matrix: MatrixHandle,
}

#[derive(Debug)]
pub struct NuisanceBlockEntry {
    pub reference: FeatureBlockRef,
    pub feature_names: Vec<String>,
    pub matrix: MatrixHandle,
}

/// A validated corpus. Immutable once loaded; matrices load on first use.
#[derive(Debug)]
pub struct CorpusManifest {
    base_dir: PathBuf,
    pub documents: Vec<DocumentRecord>,
    pub variants: Vec<Variant>,
    pub labels: BTreeMap<String, LabelColumn>,
    pub nuisance_blocks: BTreeMap<String, NuisanceBlockEntry>,
    pub anchors: AnchorSet,
    pub splits: SplitAssignment,
    id_index: HashMap<String, usize>,
}

/// Loads and validates `manifest.json` (or a directory containing one).
pub fn load_manifest(path: impl AsRef<Path>) -> Result<CorpusManifest> {
    let mut path = path.as_ref().to_path_buf();
    if path.is_dir() {
        path.push(MANIFEST_FILE);
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let raw: ManifestFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.clone(),
        message: e.to_string(),
    })?;
    let base_dir = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    CorpusManifest::from_file(raw, base_dir)
}

impl CorpusManifest {
    fn from_file(raw: ManifestFile, base_dir: PathBuf) -> Result<Self> {
        let n = raw.documents.len();
        let mut id_index = HashMap::with_capacity(n);
        for (i, doc) in raw.documents.iter().enumerate() {
            if id_index.insert(doc.doc_id.clone(), i).is_some() {
                return Err(Error::integrity(
                    "documents",
                    format!("duplicate doc_id {:?}", doc.doc_id),
                ));
            }
        }

        let mut variants = Vec::with_capacity(raw.variants.len());
        let mut seen_ids = HashSet::new();
        let mut seen_cells = HashSet::new();
        for desc in raw.variants {
            if !seen_ids.insert(desc.variant_id.clone()) {
                return Err(Error::integrity(
                    format!("variants.{}", desc.variant_id),
                    "duplicate variant_id",
                ));
            }
            if !seen_cells.insert((desc.encoder_name.clone(), desc.pooling, desc.normalization)) {
                return Err(Error::integrity(
                    format!("variants.{}", desc.variant_id),
                    format!(
                        "duplicate (encoder, pooling, normalization) = ({}, {}, {})",
                        desc.encoder_name, desc.pooling, desc.normalization
                    ),
                ));
            }
            let matrix = MatrixHandle::open(base_dir.join(&desc.matrix_path)).map_err(|e| {
                rename_field(e, format!("variants.{}", desc.variant_id))
            })?;
            check_rows(&matrix, n, &format!("variants.{}", desc.variant_id))?;
            variants.push(Variant {
                descriptor: desc,
                matrix,
            });
        }

        let mut labels = BTreeMap::new();
        for (name, file) in raw.labels {
            let col = file.into_column(&name)?;
            col.validate(&name, n)?;
            labels.insert(name, col);
        }

        let mut nuisance_blocks = BTreeMap::new();
        for (name, reference) in raw.nuisance_blocks {
            let field = format!("nuisance_blocks.{name}");
            let names_path = base_dir.join(&reference.names_path);
            let names_text =
                fs::read_to_string(&names_path).map_err(|e| Error::io(&names_path, e))?;
            let feature_names: Vec<String> =
                serde_json::from_str(&names_text).map_err(|e| Error::Parse {
                    path: names_path.clone(),
                    message: e.to_string(),
                })?;
            let matrix = MatrixHandle::open(base_dir.join(&reference.matrix_path))
                .map_err(|e| rename_field(e, field.clone()))?;
            check_rows(&matrix, n, &field)?;
            if feature_names.len() != matrix.header.dims {
                return Err(Error::integrity(
                    field,
                    format!(
                        "{} feature names for {} columns",
                        feature_names.len(),
                        matrix.header.dims
                    ),
                ));
            }
            nuisance_blocks.insert(
                name,
                NuisanceBlockEntry {
                    reference,
                    feature_names,
                    matrix,
                },
            );
        }

        validate_anchors(&raw.anchors, &id_index)?;
        raw.splits.validate(n)?;

        let manifest = Self {
            base_dir,
            documents: raw.documents,
            variants,
            labels,
            nuisance_blocks,
            anchors: raw.anchors,
            splits: raw.splits,
            id_index,
        };
        for v in &manifest.variants {
            scan_payload_finite(v.matrix.path())
                .map_err(|e| rename_field(e, format!("variants.{}", v.descriptor.variant_id)))?;
        }
        for (name, b) in &manifest.nuisance_blocks {
            scan_payload_finite(b.matrix.path())
                .map_err(|e| rename_field(e, format!("nuisance_blocks.{name}")))?;
        }
        Ok(manifest)
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn doc_index(&self, doc_id: &str) -> Option<usize> {
        self.id_index.get(doc_id).copied()
    }

    pub fn variant(&self, variant_id: &str) -> Result<&Variant> {
        self.variants
            .iter()
            .find(|v| v.descriptor.variant_id == variant_id)
            .ok_or_else(|| Error::Missing(format!("variant {variant_id:?}")))
    }

    pub fn matrix(&self, variant_id: &str) -> Result<Arc<EmbeddingMatrix>> {
        self.variant(variant_id)?.matrix.load()
    }

    pub fn label(&self, name: &str) -> Result<&LabelColumn> {
        self.labels
            .get(name)
            .ok_or_else(|| Error::Missing(format!("label {name:?}")))
    }

    pub fn block(&self, name: &str) -> Result<&NuisanceBlockEntry> {
        self.nuisance_blocks
            .get(name)
            .ok_or_else(|| Error::Missing(format!("nuisance block {name:?}")))
    }

    pub fn texts(&self) -> Vec<&str> {
        self.documents.iter().map(|d| d.text.as_str()).collect()
    }

    /// Applies a split policy. `UseManifest` returns the manifest's own
    /// splits unchanged.
    pub fn resolve_splits(&self, policy: &SplitPolicy) -> Result<SplitAssignment> {
        resolve_splits(self, policy)
    }

    /// Writes `manifest.json` into `dir`, referencing matrices by the
    /// relative paths already recorded.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let raw = ManifestFile {
            documents: self.documents.clone(),
            variants: self.variants.iter().map(|v| v.descriptor.clone()).collect(),
            labels: self
                .labels
                .iter()
                .map(|(k, v)| (k.clone(), LabelColumnFile::from_column(v)))
                .collect(),
            nuisance_blocks: self
                .nuisance_blocks
                .iter()
                .map(|(k, v)| (k.clone(), v.reference.clone()))
                .collect(),
            anchors: self.anchors.clone(),
            splits: self.splits.clone(),
        };
        let path = dir.as_ref().join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&raw).expect("manifest serializes");
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

pub fn resolve_splits(manifest: &CorpusManifest, policy: &SplitPolicy) -> Result<SplitAssignment> {
    let n = manifest.len();
    match *policy {
        SplitPolicy::UseManifest => Ok(manifest.splits.clone()),
        SplitPolicy::KFold { k, seed } => SplitAssignment::k_fold(n, k, seed),
        SplitPolicy::Holdout { fraction, seed } => SplitAssignment::holdout(n, fraction, seed),
    }
}

fn check_rows(m: &MatrixHandle, n: usize, field: &str) -> Result<()> {
    if m.header.rows != n {
        return Err(Error::integrity(
            field,
            format!("matrix has {} rows but the corpus has {n} documents", m.header.rows),
        ));
    }
    Ok(())
}

fn rename_field(e: Error, field: String) -> Error {
    match e {
        Error::Integrity { message, .. } => Error::Integrity { field, message },
        other => other,
    }
}

fn validate_anchors(anchors: &AnchorSet, ids: &HashMap<String, usize>) -> Result<()> {
    let tiers = [
        ("anchors.high_ids", &anchors.high_ids),
        ("anchors.low_ids", &anchors.low_ids),
        ("anchors.borderline_ids", &anchors.borderline_ids),
    ];
    let mut seen: HashMap<&str, &str> = HashMap::new();
    for (field, list) in tiers {
        for id in list {
            if !ids.contains_key(id) {
                return Err(Error::integrity(field, format!("unknown doc_id {id:?}")));
            }
            if let Some(prev) = seen.insert(id, field) {
                return Err(Error::integrity(
                    field,
                    format!("doc_id {id:?} also listed in {prev}"),
                ));
            }
        }
    }
    Ok(())
}

/// Assembles a corpus on disk: writes matrices as they are added and the
/// manifest last.
pub struct ManifestBuilder {
    dir: PathBuf,
    documents: Vec<DocumentRecord>,
    variants: Vec<VariantDescriptor>,
    labels: BTreeMap<String, LabelColumnFile>,
    nuisance_blocks: BTreeMap<String, FeatureBlockRef>,
    anchors: AnchorSet,
    splits: SplitAssignment,
}

impl ManifestBuilder {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self {
            dir,
            documents: Vec::new(),
            variants: Vec::new(),
            labels: BTreeMap::new(),
            nuisance_blocks: BTreeMap::new(),
            anchors: AnchorSet::default(),
            splits: SplitAssignment::default(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn documents(&mut self, docs: Vec<DocumentRecord>) -> &mut Self {
        self.documents = docs;
        self
    }

    pub fn variant(
        &mut self,
        encoder_name: &str,
        pooling: Pooling,
        normalization: Normalization,
        matrix: &EmbeddingMatrix,
    ) -> Result<&mut Self> {
        let file = format!("{}.bin", sanitize(matrix.variant_id()));
        write_matrix(matrix, self.dir.join(&file))?;
        self.variants.push(VariantDescriptor {
            variant_id: matrix.variant_id().to_string(),
            encoder_name: encoder_name.to_string(),
            pooling,
            normalization,
            matrix_path: PathBuf::from(file),
        });
        Ok(self)
    }

    pub fn label(&mut self, name: &str, column: &LabelColumn) -> &mut Self {
        self.labels
            .insert(name.to_string(), LabelColumnFile::from_column(column));
        self
    }

    pub fn nuisance_block(
        &mut self,
        name: &str,
        feature_names: &[String],
        matrix: &EmbeddingMatrix,
    ) -> Result<&mut Self> {
        let reference = write_feature_block(&self.dir, name, feature_names, matrix)?;
        self.nuisance_blocks.insert(name.to_string(), reference);
        Ok(self)
    }

    pub fn anchors(&mut self, anchors: AnchorSet) -> &mut Self {
        self.anchors = anchors;
        self
    }

    pub fn splits(&mut self, splits: SplitAssignment) -> &mut Self {
        self.splits = splits;
        self
    }

    /// Writes `manifest.json` and reloads it through full validation.
    pub fn finish(&mut self) -> Result<CorpusManifest> {
        let raw = ManifestFile {
            documents: std::mem::take(&mut self.documents),
            variants: std::mem::take(&mut self.variants),
            labels: std::mem::take(&mut self.labels),
            nuisance_blocks: std::mem::take(&mut self.nuisance_blocks),
            anchors: std::mem::take(&mut self.anchors),
            splits: std::mem::take(&mut self.splits),
        };
        let path = self.dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&raw).expect("manifest serializes");
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        load_manifest(&path)
    }
}

/// Writes `<name>.bin` and `<name>.names.json` under `dir`.
pub fn write_feature_block(
    dir: &Path,
    name: &str,
    feature_names: &[String],
    matrix: &EmbeddingMatrix,
) -> Result<FeatureBlockRef> {
    if feature_names.len() != matrix.dims() {
        return Err(Error::integrity(
            format!("nuisance_blocks.{name}"),
            format!("{} names for {} columns", feature_names.len(), matrix.dims()),
        ));
    }
    let stem = format!("block_{}", sanitize(name));
    let matrix_path = PathBuf::from(format!("{stem}.bin"));
    let names_path = PathBuf::from(format!("{stem}.names.json"));
    write_matrix(matrix, dir.join(&matrix_path))?;
    let names = serde_json::to_string(feature_names).expect("names serialize");
    let full = dir.join(&names_path);
    fs::write(&full, names).map_err(|e| Error::io(&full, e))?;
    Ok(FeatureBlockRef {
        matrix_path,
        names_path,
    })
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}
