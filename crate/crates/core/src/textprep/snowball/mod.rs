//! Snowball stemming algorithms, implemented from the published definitions.
//!
//! Conformance is pinned by `tests/snowball_conformance.rs` against frozen
//! reference corpora of word/stem pairs.

mod english;
mod spanish;

/// Porter2 stem of a lowercase English word.
pub fn english(word: &str) -> String {
    english::stem(word)
}

/// Snowball stem of a lowercase Spanish word.
pub fn spanish(word: &str) -> String {
    spanish::stem(word)
}
