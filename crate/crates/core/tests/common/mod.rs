#![allow(dead_code)]

use std::path::Path;

use construct_validity::corpus::{
    AnchorSet, CorpusManifest, DocumentRecord, EmbeddingMatrix, LabelColumn, LabelKind, ManifestBuilder,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn normal(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn normal_matrix(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
    DMatrix::from_column_slice(n, d, &normal(n * d, seed))
}

pub fn doc_id(i: usize) -> String {
    format!("d{i}")
}

/// A manifest with no embedding variants, only labels, blocks and anchors.
pub struct Table<'a> {
    pub n: usize,
    pub labels: Vec<(&'a str, LabelKind, Vec<f64>)>,
    pub blocks: Vec<(&'a str, DMatrix<f64>)>,
    pub anchors: AnchorSet,
}

impl<'a> Table<'a> {
    pub fn new(n: usize) -> Self {
        Self { n, labels: Vec::new(), blocks: Vec::new(), anchors: AnchorSet::default() }
    }

    pub fn real(mut self, name: &'a str, values: Vec<f64>) -> Self {
        self.labels.push((name, LabelKind::Real, values));
        self
    }

    pub fn binary(mut self, name: &'a str, values: Vec<f64>) -> Self {
        self.labels.push((name, LabelKind::Binary, values));
        self
    }

    pub fn block(mut self, name: &'a str, m: DMatrix<f64>) -> Self {
        self.blocks.push((name, m));
        self
    }

    pub fn anchors(mut self, high: &[usize], low: &[usize]) -> Self {
        self.anchors = AnchorSet {
            high_ids: high.iter().map(|&i| doc_id(i)).collect(),
            low_ids: low.iter().map(|&i| doc_id(i)).collect(),
            borderline_ids: Vec::new(),
        };
        self
    }

    pub fn write(self, dir: &Path) -> CorpusManifest {
        let mut b = ManifestBuilder::new(dir).unwrap();
        b.documents(
            (0..self.n)
                .map(|i| DocumentRecord { doc_id: doc_id(i), text: String::new(), meta: Default::default() })
                .collect(),
        );
        for (name, kind, values) in self.labels {
            b.label(name, &LabelColumn::complete(kind, values));
        }
        for (name, m) in self.blocks {
            let names: Vec<String> = (0..m.ncols()).map(|j| format!("{name}_{j}")).collect();
            b.nuisance_block(name, &names, &EmbeddingMatrix::from_dmatrix(&m, name).unwrap()).unwrap();
        }
        b.anchors(self.anchors);
        b.finish().unwrap()
    }
}
