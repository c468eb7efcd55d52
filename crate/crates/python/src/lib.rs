//! Python bindings for construct-validity.
//!
//! Results come back as plain dicts and lists (the JSON shape of the Rust
//! types); configuration may be passed as a dict or a JSON string.
//!
//! ```python
//! import construct_validity as cv
//! truth = cv.generate({"n_docs": 500}, seed=1)
//! corpus = cv.Corpus(cv.export_synthetic("out", {"n_docs": 500}, seed=1))
//! suite = corpus.run_suite({"proxy": {"kind": "label", "name": "proxy"}})
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use construct_validity::cards::{run_suite, SuiteConfig};
use construct_validity::corpus::{load_manifest, CorpusManifest, EmbeddingMatrix, SplitAssignment};
use construct_validity::geometry::{
    cosine_decomposition as cosine, euclidean_decomposition as euclidean, neutralize_score as neutralize,
    nullspace_project as inlp, rotation_ambiguity_experiment, LinearProbe, SplitEmbedding,
};
use construct_validity::report::render_markdown as markdown;
use construct_validity::stats::{self, FitOptions, MeasurementLevel, RatingsMatrix};
use construct_validity::synthetic::{export_as_manifest, generate as synth, LabelLink, PerturbationRecipe, Rotation, SyntheticSpec};
use construct_validity::Error;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

create_exception!(construct_validity, ValidityError, PyValueError, "Raised for invalid inputs; the message starts with an error code such as E_MISSING.");

fn err(e: Error) -> PyErr {
    ValidityError::new_err(format!("{}: {e}", e.code()))
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Accepts a dict (or any JSON-serializable object) or a JSON string.
fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>, what: &str) -> PyResult<T> {
    let text: String = match obj.extract::<String>() {
        Ok(s) => s,
        Err(_) => obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?,
    };
    serde_json::from_str(&text).map_err(|e| ValidityError::new_err(format!("E_CONFIG: invalid {what}: {e}")))
}

fn from_py_or_default<T: DeserializeOwned + Default>(obj: Option<&Bound<'_, PyAny>>, what: &str) -> PyResult<T> {
    obj.map_or_else(|| Ok(T::default()), |o| from_py(o, what))
}

fn design(rows: &[Vec<f64>]) -> PyResult<EmbeddingMatrix> {
    EmbeddingMatrix::from_rows(rows, "python").map_err(err)
}

fn row_lists(m: &EmbeddingMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// A validated corpus manifest.
#[pyclass(frozen)]
struct Corpus {
    inner: Arc<CorpusManifest>,
}

#[pymethods]
impl Corpus {
    /// Load a manifest file or a directory containing manifest.json.
    #[new]
    fn new(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: Arc::new(load_manifest(path).map_err(err)?) })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Corpus(documents={}, variants={}, labels={}, blocks={})",
            self.inner.len(),
            self.inner.variants.len(),
            self.inner.labels.len(),
            self.inner.nuisance_blocks.len()
        )
    }

    #[getter]
    fn doc_ids(&self) -> Vec<String> {
        self.inner.documents.iter().map(|d| d.doc_id.clone()).collect()
    }

    #[getter]
    fn variant_ids(&self) -> Vec<String> {
        self.inner.variants.iter().map(|v| v.descriptor.variant_id.clone()).collect()
    }

    #[getter]
    fn label_names(&self) -> Vec<String> {
        self.inner.labels.keys().cloned().collect()
    }

    #[getter]
    fn block_names(&self) -> Vec<String> {
        self.inner.nuisance_blocks.keys().cloned().collect()
    }

    /// Embedding matrix of a variant as a list of rows.
    fn matrix(&self, variant_id: &str) -> PyResult<Vec<Vec<f64>>> {
        Ok(row_lists(&*self.inner.matrix(variant_id).map_err(err)?))
    }

    /// Label values, `None` where missing.
    fn label(&self, name: &str) -> PyResult<Vec<Option<f64>>> {
        let col = self.inner.label(name).map_err(err)?;
        Ok((0..col.len()).map(|i| col.get(i)).collect())
    }

    /// Run the configured cards; `config` follows the suite configuration
    /// schema (a `proxy` entry plus optional `cards`, `run`, `card1`..`card5`).
    fn run_suite<'py>(&self, py: Python<'py>, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let config: SuiteConfig = from_py(config, "suite configuration")?;
        let report = py.detach(|| run_suite(&self.inner, &config)).map_err(err)?;
        to_py(py, &report)
    }

    /// Run a single card (1 to 5) and return its report.
    fn run_card<'py>(&self, py: Python<'py>, number: u8, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let mut config: SuiteConfig = from_py(config, "suite configuration")?;
        config.cards = vec![number];
        let mut suite = py.detach(|| run_suite(&self.inner, &config)).map_err(err)?;
        to_py(py, &suite.reports.remove(0))
    }
}

/// ICC(2,1), ICC(2,k) and ICC(3,1) for a targets x raters table.
#[pyfunction]
fn icc<'py>(py: Python<'py>, ratings: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyAny>> {
    let k = ratings.first().map_or(0, Vec::len);
    let values: Vec<f64> = ratings.iter().flatten().copied().collect();
    if ratings.iter().any(|r| r.len() != k) {
        return Err(err(Error::InvalidInput("ragged ratings table".into())));
    }
    let m = RatingsMatrix::new(ratings.len(), k, values).map_err(err)?;
    to_py(py, &stats::icc_two_way(&m))
}

#[pyfunction]
fn auc(scores: Vec<f64>, labels: Vec<f64>) -> PyResult<f64> {
    stats::auc(&scores, &labels).map_err(err)
}

#[pyfunction]
fn cohens_d<'py>(py: Python<'py>, group_a: Vec<f64>, group_b: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &stats::cohens_d(&group_a, &group_b).map_err(err)?)
}

/// Krippendorff's alpha; one list per rater, `None` for a missing rating.
#[pyfunction]
#[pyo3(signature = (ratings, level="interval"))]
fn krippendorff_alpha<'py>(py: Python<'py>, ratings: Vec<Vec<Option<f64>>>, level: &str) -> PyResult<Bound<'py, PyAny>> {
    let level = match level {
        "interval" => MeasurementLevel::Interval,
        "nominal" => MeasurementLevel::Nominal,
        other => return Err(err(Error::InvalidInput(format!("unknown measurement level {other:?}")))),
    };
    to_py(py, &stats::krippendorff_alpha(&ratings, level).map_err(err)?)
}

/// Least squares of `y` on the rows of `x` (intercept added).
#[pyfunction]
fn ols<'py>(py: Python<'py>, x: Vec<Vec<f64>>, y: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let x = design(&x)?.to_dmatrix();
    to_py(py, &stats::ols_fit(&x, &y, &FitOptions::default()).map_err(err)?)
}

/// Penalized logistic regression of a 0/1 `y` on the rows of `x`.
#[pyfunction]
#[pyo3(signature = (x, y, ridge_fallback=false))]
fn logistic<'py>(py: Python<'py>, x: Vec<Vec<f64>>, y: Vec<f64>, ridge_fallback: bool) -> PyResult<Bound<'py, PyAny>> {
    let x = design(&x)?.to_dmatrix();
    let options = FitOptions { ridge_fallback, ..FitOptions::default() };
    to_py(py, &stats::logistic_fit(&x, &y, &options).map_err(err)?)
}

#[pyfunction]
fn cosine_decomposition<'py>(
    py: Python<'py>,
    a_concept: Vec<f64>,
    a_nuisance: Vec<f64>,
    b_concept: Vec<f64>,
    b_nuisance: Vec<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let a = SplitEmbedding::new(a_concept, a_nuisance).map_err(err)?;
    let b = SplitEmbedding::new(b_concept, b_nuisance).map_err(err)?;
    to_py(py, &cosine(&a, &b).map_err(err)?)
}

#[pyfunction]
fn euclidean_decomposition<'py>(
    py: Python<'py>,
    a_concept: Vec<f64>,
    a_nuisance: Vec<f64>,
    b_concept: Vec<f64>,
    b_nuisance: Vec<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let a = SplitEmbedding::new(a_concept, a_nuisance).map_err(err)?;
    let b = SplitEmbedding::new(b_concept, b_nuisance).map_err(err)?;
    to_py(py, &euclidean(&a, &b).map_err(err)?)
}

/// `score(observed) - score(baseline)` under a linear probe.
#[pyfunction]
#[pyo3(signature = (weights, observed, baseline, bias=0.0))]
fn neutralize_score(weights: Vec<f64>, observed: Vec<f64>, baseline: Vec<f64>, bias: f64) -> PyResult<f64> {
    neutralize(&LinearProbe { weights, bias }, &observed, &baseline).map_err(err)
}

/// Removes linearly decodable information about a binary `z` from `x`.
/// Returns the projected rows and the projection state.
#[pyfunction]
#[pyo3(signature = (x, z, max_iter=10, test_fraction=0.3, seed=0))]
fn nullspace_project<'py>(
    py: Python<'py>,
    x: Vec<Vec<f64>>,
    z: Vec<f64>,
    max_iter: usize,
    test_fraction: f64,
    seed: u64,
) -> PyResult<(Vec<Vec<f64>>, Bound<'py, PyAny>)> {
    let x = design(&x)?.to_dmatrix();
    let split = SplitAssignment::holdout(x.nrows(), test_fraction, seed).map_err(err)?;
    let (projected, state) = py.detach(|| inlp(&x, &z, max_iter, &split)).map_err(err)?;
    let projected = EmbeddingMatrix::from_dmatrix(&projected, "projected").map_err(err)?;
    Ok((row_lists(&projected), to_py(py, &state)?))
}

/// One concept factor among `dims` latent factors, before and after a random
/// rotation.
#[pyfunction]
#[pyo3(signature = (dims=8, seed=0, n_docs=1000, noise_sd=0.1))]
fn rotation_ambiguity<'py>(py: Python<'py>, dims: usize, seed: u64, n_docs: usize, noise_sd: f64) -> PyResult<Bound<'py, PyAny>> {
    if dims < 2 {
        return Err(err(Error::InvalidInput(format!("dims must be at least 2, got {dims}"))));
    }
    let spec = SyntheticSpec {
        n_docs,
        c_dims: 1,
        z_dims: dims - 1,
        embed_dims: dims,
        noise_sd,
        rotation: Rotation::Random { seed },
        label_link: LabelLink::Linear,
        ..SyntheticSpec::default()
    };
    to_py(py, &rotation_ambiguity_experiment(&spec, seed).map_err(err)?)
}

/// Synthetic corpus with planted concept and nuisance factors.
#[pyfunction]
#[pyo3(signature = (spec=None, seed=0))]
fn generate<'py>(py: Python<'py>, spec: Option<&Bound<'py, PyAny>>, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let spec: SyntheticSpec = from_py_or_default(spec, "synthetic spec")?;
    let t = synth(&spec, seed).map_err(err)?;
    let rows = |m, name| EmbeddingMatrix::from_dmatrix(m, name).map(|m| row_lists(&m)).map_err(err);
    let out = serde_json::json!({
        "spec": t.spec,
        "seed": t.seed,
        "embeddings": rows(&t.embeddings, "embeddings")?,
        "c": rows(&t.c_values, "c")?,
        "z": rows(&t.z_values, "z")?,
        "labels": t.labels,
        "proxy": t.proxy,
        "proxy_direction": t.proxy_direction,
        "planted_r2_c": t.planted_r2_c,
        "planted_r2_z": t.planted_r2_z,
        "nuisance_scale": t.nuisance_scale,
    });
    to_py(py, &out)
}

/// Generates a synthetic corpus and writes it as a manifest under `dir`;
/// returns the manifest path.
#[pyfunction]
#[pyo3(signature = (dir, spec=None, recipe=None, seed=0))]
fn export_synthetic(dir: PathBuf, spec: Option<&Bound<'_, PyAny>>, recipe: Option<&Bound<'_, PyAny>>, seed: u64) -> PyResult<String> {
    let spec: SyntheticSpec = from_py_or_default(spec, "synthetic spec")?;
    let recipe: PerturbationRecipe = from_py_or_default(recipe, "perturbation recipe")?;
    let truth = synth(&spec, seed).map_err(err)?;
    std::fs::create_dir_all(&dir).map_err(|e| err(Error::Io { path: dir.clone(), source: e }))?;
    let m = export_as_manifest(&truth, &recipe, &dir).map_err(err)?;
    Ok(m.base_dir().join(construct_validity::corpus::MANIFEST_FILE).display().to_string())
}

/// Markdown rendering of a card report dict.
#[pyfunction]
fn render_markdown(report: &Bound<'_, PyAny>) -> PyResult<String> {
    Ok(markdown(&from_py(report, "card report")?))
}

#[pymodule]
#[pyo3(name = "construct_validity")]
fn construct_validity_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ValidityError", m.py().get_type::<ValidityError>())?;
    m.add("SCHEMA_VERSION", construct_validity::cards::SCHEMA_VERSION)?;
    m.add_class::<Corpus>()?;
    m.add_function(wrap_pyfunction!(icc, m)?)?;
    m.add_function(wrap_pyfunction!(auc, m)?)?;
    m.add_function(wrap_pyfunction!(cohens_d, m)?)?;
    m.add_function(wrap_pyfunction!(krippendorff_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(ols, m)?)?;
    m.add_function(wrap_pyfunction!(logistic, m)?)?;
    m.add_function(wrap_pyfunction!(cosine_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(euclidean_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(neutralize_score, m)?)?;
    m.add_function(wrap_pyfunction!(nullspace_project, m)?)?;
    m.add_function(wrap_pyfunction!(rotation_ambiguity, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(export_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(render_markdown, m)?)?;
    Ok(())
}
