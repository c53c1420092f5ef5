//! Per-tweet surface statistics and the readability scores built on them.

use std::collections::HashSet;

use crate::corpus::Tweet;
use crate::textprep::TokenSequence;

use super::{count_syllables, FeatureError};

/// Quantitative counts for one tweet. Character-level fields scan the raw
/// text; token-level fields come from the processed (unstemmed) tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceStats {
    /// Total syllables across tokens.
    pub syllable_count: usize,
    /// Number of tokens.
    pub word_count: usize,
    /// Characters in the raw text, separators included.
    pub char_count: usize,
    /// Characters across the processed tokens (no separators).
    pub length: usize,
    /// Uppercase characters in the raw text.
    pub capitals: usize,
    /// Distinct tokens.
    pub unique_words: usize,
    /// word_count / max(1, char_count).
    pub word_density: f64,
    /// Whitespace-delimited chunks of the raw text starting with '#'.
    pub hashtag_count: usize,
    /// Whitespace-delimited chunks of the raw text starting with '@'.
    pub mention_count: usize,
    /// Terminal-punctuation runs in the raw text, floored at 1.
    pub sentence_count: usize,
}

fn terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '…' | '‽')
}

pub fn surface_stats(tweet: &Tweet, tokens: &TokenSequence) -> SurfaceStats {
    let raw = &tweet.text;
    let char_count = raw.chars().count();
    let capitals = raw.chars().filter(|c| c.is_uppercase()).count();
    let hashtag_count = raw.split_whitespace().filter(|w| w.starts_with('#')).count();
    let mention_count = raw.split_whitespace().filter(|w| w.starts_with('@')).count();

    let mut sentence_count = 0;
    let mut in_run = false;
    for c in raw.chars() {
        if terminal(c) {
            if !in_run {
                sentence_count += 1;
            }
            in_run = true;
        } else {
            in_run = false;
        }
    }
    let sentence_count = sentence_count.max(1);

    let words = &tokens.raw_tokens;
    let word_count = words.len();
    let unique_words = words.iter().collect::<HashSet<_>>().len();
    let length = words.iter().map(|w| w.chars().count()).sum();
    let syllable_count = words
        .iter()
        .map(|w| count_syllables(w, tweet.lang))
        .sum();

    SurfaceStats {
        syllable_count,
        word_count,
        char_count,
        length,
        capitals,
        unique_words,
        word_density: word_count as f64 / char_count.max(1) as f64,
        hashtag_count,
        mention_count,
        sentence_count,
    }
}

/// Flesch Reading Ease and Flesch-Kincaid Grade Level, standard constants.
pub fn readability(stats: &SurfaceStats) -> Result<(f64, f64), FeatureError> {
    if stats.word_count == 0 || stats.sentence_count == 0 {
        return Err(FeatureError::DegenerateText);
    }
    let words = stats.word_count as f64;
    let sentences = stats.sentence_count as f64;
    let syllables = stats.syllable_count as f64;
    let fre = 206.835 - 1.015 * (words / sentences) - 84.6 * (syllables / words);
    let fkgl = 0.39 * (words / sentences) + 11.8 * (syllables / words) - 15.59;
    Ok((fre, fkgl))
}
