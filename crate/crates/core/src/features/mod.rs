//! Feature extraction: n-gram TF-IDF, syllable counts, readability scores,
//! lexicon sentiment shares, and tweet surface statistics, assembled into one
//! sparse vector per tweet by [`FeaturePipeline`].
//!
//! Everything is fitted on the training split only. Fitted artifacts are
//! immutable and transforms are pure functions of their inputs, so batch
//! transforms run in parallel per document. A "not fitted" state is
//! unrepresentable: the only way to obtain a [`Vocabulary`] or a
//! [`FeaturePipeline`] is through a successful fit (or loading a previously
//! saved fit).

mod pipeline;
mod sentiment;
mod stats;
mod syllable;
mod tfidf;

pub use pipeline::{FeaturePipeline, PipelineConfig, DENSE_SLOTS, DROPPABLE_SLOTS, SENTIMENT_SLOTS};
pub use sentiment::{sentiment_scores, SentimentLexicon};
pub use stats::{readability, surface_stats, SurfaceStats};
pub use syllable::count_syllables;
pub use tfidf::{fit_tfidf, transform_tfidf, Vocabulary};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("cannot fit on an empty corpus")]
    EmptyCorpus,
    #[error("bad n-gram range {0}..={1} (need 1 <= min <= max <= 5)")]
    BadNgramRange(usize, usize),
    #[error("readability is undefined for zero words or zero sentences")]
    DegenerateText,
    #[error("lexicon line {row}: {reason}")]
    BadLexiconLine { row: usize, reason: String },
    #[error("vocabulary file: {0}")]
    BadVocabFile(String),
    #[error("cannot drop dense slot {0:?}; only screening-flagged slots are droppable")]
    BadDropSlot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Sparse feature vector: `(index, value)` pairs with strictly increasing
/// indices. Zeros are dropped at construction, so stored values are always
/// finite and non-zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    pairs: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Sorts `pairs` by index and drops exact zeros. Panics on duplicate
    /// indices or non-finite values — both are programming errors, not data.
    pub fn new(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.retain(|&(_, v)| v != 0.0);
        pairs.sort_unstable_by_key(|&(i, _)| i);
        for w in pairs.windows(2) {
            assert!(w[0].0 < w[1].0, "duplicate feature index {}", w[1].0);
        }
        for &(i, v) in &pairs {
            assert!(v.is_finite(), "non-finite value at feature index {i}");
        }
        SparseVector { pairs }
    }

    pub fn pairs(&self) -> &[(usize, f64)] {
        &self.pairs
    }

    pub fn into_pairs(self) -> Vec<(usize, f64)> {
        self.pairs
    }

    /// Number of stored (non-zero) entries.
    pub fn nnz(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Value at `index`, 0.0 when absent.
    pub fn get(&self, index: usize) -> f64 {
        match self.pairs.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(p) => self.pairs[p].1,
            Err(_) => 0.0,
        }
    }

    /// Dot product against a dense weight slice. Indices past `weights.len()`
    /// contribute nothing, so a truncated weight vector acts zero-padded.
    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.pairs
            .iter()
            .filter(|&&(i, _)| i < weights.len())
            .map(|&(i, v)| v * weights[i])
            .sum()
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for &(i, v) in &self.pairs {
            if i < dim {
                out[i] = v;
            }
        }
        out
    }

    /// Squared Euclidean norm.
    pub fn norm_sq(&self) -> f64 {
        self.pairs.iter().map(|&(_, v)| v * v).sum()
    }
}
