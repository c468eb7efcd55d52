use std::collections::BTreeMap;

use super::FeatureBlock;
use crate::corpus::EmbeddingMatrix;

pub const STYLE_FEATURES: [&str; 5] = [
    "token_count",
    "char_count",
    "exclam_count",
    "question_count",
    "uppercase_ratio",
];

/// `[token_count, char_count, exclam_count, question_count, uppercase_ratio]`.
///
/// Tokens are maximal non-whitespace runs, characters are Unicode scalar
/// values, and the uppercase ratio is taken over alphabetic characters only
/// (0 when there are none).
pub fn style_features(text: &str) -> [f64; 5] {
    let tokens = text.split_whitespace().count();
    let (mut chars, mut exclam, mut question, mut letters, mut upper) = (0usize, 0, 0, 0usize, 0usize);
    for c in text.chars() {
        chars += 1;
        match c {
            '!' => exclam += 1,
            '?' => question += 1,
            _ => {}
        }
        if c.is_alphabetic() {
            letters += 1;
            if c.is_uppercase() {
                upper += 1;
            }
        }
    }
    let ratio = if letters == 0 { 0.0 } else { upper as f64 / letters as f64 };
    [tokens as f64, chars as f64, f64::from(exclam), f64::from(question), ratio]
}

pub fn style_block<S: AsRef<str>>(texts: &[S]) -> FeatureBlock {
    let values: Vec<f64> = texts.iter().flat_map(|t| style_features(t.as_ref())).collect();
    let matrix = EmbeddingMatrix::new(texts.len(), STYLE_FEATURES.len(), values, "style")
        .expect("style features are finite");
    FeatureBlock {
        block_name: "style".to_string(),
        feature_names: STYLE_FEATURES.iter().map(|s| s.to_string()).collect(),
        matrix,
        provenance: BTreeMap::from([("kind".to_string(), "length_style".to_string())]),
    }
}
