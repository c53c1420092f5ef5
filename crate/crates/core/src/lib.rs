//! Multilingual short-text classification workbench.
//!
//! The crate covers the full experimental stack for tweet-level hate-speech
//! detection in English and Spanish:
//!
//! - **`corpus`**: TSV ingestion, the HS/TR/AG label model, stratified splits.
//! - **`textprep`**: cleaning, tokenization, Snowball stemming (EN + ES).
//! - **`features`**: n-gram TF-IDF, readability, syllables, sentiment shares,
//!   surface statistics, and the assembled feature pipeline.
//! - **`linear`**: logistic / hinge classifiers trained by seeded SGD with
//!   L1/L2 regularization, one-vs-rest, stratified CV and grid search.
//! - **`autodiff`**: a dense-tensor reverse-mode differentiation engine.
//! - **`neural`**: word-level bidirectional GRU and character-level CNN.
//! - **`eval`**: competition metrics (precision/recall/F1, macro-F1, EMR,
//!   averaged subtask-B score) and confusion matrices.
//! - **`explain`**: LIME-style local explanations and global n-gram weights.
//! - **`analysis`**: hashtag concentration and train/test label-rate drift.
//! - **`report`**: deterministic CSV and SVG renderers for all of the above.
//!
//! Batch operations route through [`par`], which runs on rayon when the
//! `parallel` feature is enabled (default) and falls back to plain iterators
//! otherwise. Results are identical either way.

pub mod analysis;
pub mod autodiff;
pub mod corpus;
pub mod eval;
pub mod explain;
pub mod features;
pub mod linear;
pub mod neural;
pub mod par;
pub mod report;
pub mod textprep;

pub use corpus::{Dataset, LabelDim, LabelSet, Lang, Tweet};
