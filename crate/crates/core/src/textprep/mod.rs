//! Cleaning, tokenization, and stemming applied ahead of every model.
//!
//! The order of operations inside [`clean`] is: drop control/unassigned
//! codepoints, lowercase, remove URL chunks, strip punctuation, truncate
//! character runs, normalize whitespace. The whole pass repeats until the
//! string stops changing, which makes `clean` idempotent by construction
//! even for adversarial inputs (for instance a run-collapse that manufactures
//! an `http://` scheme).

pub mod snowball;

use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::corpus::{Lang, Tweet};

/// Knobs for [`clean`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanConfig {
    pub lowercase: bool,
    /// Drop whitespace-delimited chunks carrying an `http://`/`https://` scheme.
    pub strip_urls: bool,
    /// Strip characters in Unicode category P (except `#`/`@` under the keep flags).
    pub strip_punctuation: bool,
    /// Keep `#` so hashtags survive cleaning and get recorded by [`preprocess`].
    pub keep_hashtag_body: bool,
    /// Keep `@` so mentions survive cleaning and get recorded by [`preprocess`].
    pub keep_mention_body: bool,
    /// Truncate runs of one character to this length (min 2) when set.
    pub collapse_repeats: Option<usize>,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig {
            lowercase: true,
            strip_urls: true,
            strip_punctuation: true,
            keep_hashtag_body: true,
            keep_mention_body: true,
            collapse_repeats: Some(3),
        }
    }
}

/// A tweet after the full preprocessing pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    /// Stemmed tokens, in text order.
    pub tokens: Vec<String>,
    /// The same tokens before stemming; surface-level features (sentiment,
    /// syllables, readability) consume these so lexicon lookups see real words.
    pub raw_tokens: Vec<String>,
    pub source_id: String,
    /// Hashtags that survived cleaning, marker included (e.g. `#buildthatwall`).
    pub kept_hashtags: Vec<String>,
    /// Mentions that survived cleaning, marker included (e.g. `@potus`).
    pub kept_mentions: Vec<String>,
}

/// Normalizes raw tweet text. Total and idempotent for every config.
pub fn clean(text: &str, cfg: &CleanConfig) -> String {
    let mut cur = clean_pass(text, cfg);
    loop {
        let next = clean_pass(&cur, cfg);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn clean_pass(text: &str, cfg: &CleanConfig) -> String {
    // Bad characters first: keep whitespace as separators, drop the rest of
    // category C (controls, format chars, unassigned).
    let mut kept = String::with_capacity(text.len());
    for c in text.chars() {
        if c.is_whitespace() || c.general_category_group() != GeneralCategoryGroup::Other {
            kept.push(c);
        }
    }
    if cfg.lowercase {
        kept = kept.to_lowercase();
    }

    let mut out = String::with_capacity(kept.len());
    for chunk in kept.split_whitespace() {
        if cfg.strip_urls && is_url_chunk(chunk) {
            continue;
        }
        let chunk = strip_chunk(chunk, cfg);
        if !chunk.is_empty() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&chunk);
        }
    }
    out
}

/// True when the chunk carries an http(s) scheme after leading symbols
/// (so `(https://t.co/x)` counts).
fn is_url_chunk(chunk: &str) -> bool {
    let trimmed = chunk.trim_start_matches(|c: char| !c.is_alphanumeric());
    let lower_prefix = |p: &str| {
        trimmed.len() >= p.len()
            && trimmed.is_char_boundary(p.len())
            && trimmed[..p.len()].eq_ignore_ascii_case(p)
    };
    lower_prefix("http://") || lower_prefix("https://")
}

fn strip_chunk(chunk: &str, cfg: &CleanConfig) -> String {
    let mut kept = String::with_capacity(chunk.len());
    for c in chunk.chars() {
        if cfg.strip_punctuation && strippable_punct(c, cfg) {
            continue;
        }
        kept.push(c);
    }
    match cfg.collapse_repeats {
        Some(max_run) => collapse_runs(&kept, max_run.max(2)),
        None => kept,
    }
}

fn strippable_punct(c: char, cfg: &CleanConfig) -> bool {
    if (c == '#' && cfg.keep_hashtag_body) || (c == '@' && cfg.keep_mention_body) {
        return false;
    }
    c.general_category_group() == GeneralCategoryGroup::Punctuation
}

fn collapse_runs(s: &str, max_run: usize) -> String {
    let mut out = String::with_capacity(s.len());
    let mut prev = None;
    let mut run = 0usize;
    for c in s.chars() {
        if prev == Some(c) {
            run += 1;
        } else {
            prev = Some(c);
            run = 1;
        }
        if run <= max_run {
            out.push(c);
        }
    }
    out
}

/// Splits on whitespace runs; never yields empty tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

/// Snowball stem of a single lowercase token.
pub fn stem(token: &str, lang: Lang) -> String {
    match lang {
        Lang::En => snowball::english(token),
        Lang::Es => snowball::spanish(token),
    }
}

/// Full pipeline: clean, tokenize, record hashtags/mentions, stem.
///
/// Hashtag and mention markers that survive cleaning are recorded here and
/// then stripped from the token, so `#WOMENSUCK` yields the token
/// `womensuck` plus a `#womensuck` entry in `kept_hashtags`.
pub fn preprocess(tweet: &Tweet, cfg: &CleanConfig) -> TokenSequence {
    let cleaned = clean(&tweet.text, cfg);
    let mut raw_tokens = Vec::new();
    let mut kept_hashtags = Vec::new();
    let mut kept_mentions = Vec::new();
    for tok in cleaned.split_whitespace() {
        if let Some(body) = tok.strip_prefix('#') {
            if !body.is_empty() {
                kept_hashtags.push(tok.to_string());
                raw_tokens.push(body.to_string());
            }
        } else if let Some(body) = tok.strip_prefix('@') {
            if !body.is_empty() {
                kept_mentions.push(tok.to_string());
                raw_tokens.push(body.to_string());
            }
        } else {
            raw_tokens.push(tok.to_string());
        }
    }
    let tokens = raw_tokens.iter().map(|t| stem(t, tweet.lang)).collect();
    TokenSequence {
        tokens,
        raw_tokens,
        source_id: tweet.id.clone(),
        kept_hashtags,
        kept_mentions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tweet(text: &str, lang: Lang) -> Tweet {
        Tweet {
            id: "1".into(),
            text: text.into(),
            lang,
            labels: None,
        }
    }

    #[test]
    fn clean_leaves_flattened_urls_alone() {
        let cfg = CleanConfig::default();
        assert_eq!(
            clean("bitch https co uyipjkgx", &cfg),
            "bitch https co uyipjkgx"
        );
    }

    #[test]
    fn clean_strips_real_urls() {
        let cfg = CleanConfig::default();
        assert_eq!(clean("go home https://t.co/xyz now", &cfg), "go home now");
        assert_eq!(clean("see (HTTP://EXAMPLE.COM/a?b=1)", &cfg), "see");
        let no_urls = CleanConfig {
            strip_urls: false,
            strip_punctuation: false,
            ..CleanConfig::default()
        };
        assert_eq!(clean("see https://t.co/xyz", &no_urls), "see https://t.co/xyz");
    }

    #[test]
    fn clean_handles_empty_and_controls() {
        let cfg = CleanConfig::default();
        assert_eq!(clean("", &cfg), "");
        assert_eq!(clean("a\u{0}b\tc\u{200b}d", &cfg), "ab cd");
    }

    #[test]
    fn clean_truncates_character_runs() {
        let cfg = CleanConfig {
            collapse_repeats: Some(2),
            ..CleanConfig::default()
        };
        assert_eq!(clean("yaaaayyyyy", &cfg), "yaayy");
        assert_eq!(clean("yaaaayyyyy", &CleanConfig::default()), "yaaayyy");
    }

    #[test]
    fn clean_strips_punctuation_but_keeps_markers_and_emoji() {
        let cfg = CleanConfig::default();
        assert_eq!(
            clean("You're SCUM, @dude!! #GoHome \u{1f621}", &cfg),
            "youre scum @dude #gohome \u{1f621}"
        );
        let no_markers = CleanConfig {
            keep_hashtag_body: false,
            keep_mention_body: false,
            ..CleanConfig::default()
        };
        assert_eq!(
            clean("You're SCUM, @dude!! #GoHome", &no_markers),
            "youre scum dude gohome"
        );
    }

    #[test]
    fn tokenize_splits_on_whitespace_runs() {
        assert_eq!(tokenize("build the wall"), ["build", "the", "wall"]);
        assert_eq!(tokenize("   "), Vec::<String>::new());
        assert_eq!(tokenize("a  b"), ["a", "b"]);
    }

    #[test]
    fn preprocess_records_hashtags_and_mentions() {
        let cfg = CleanConfig::default();
        let seq = preprocess(&tweet("Women are stupid #WOMENSUCK", Lang::En), &cfg);
        assert_eq!(seq.raw_tokens, ["women", "are", "stupid", "womensuck"]);
        assert_eq!(seq.kept_hashtags, ["#womensuck"]);
        assert!(seq.kept_mentions.is_empty());
        assert_eq!(seq.source_id, "1");

        let seq = preprocess(&tweet("#BuildThatWall @Realguy now", Lang::En), &cfg);
        assert_eq!(seq.kept_hashtags, ["#buildthatwall"]);
        assert_eq!(seq.kept_mentions, ["@realguy"]);
        assert_eq!(seq.raw_tokens, ["buildthatwall", "realguy", "now"]);
    }

    #[test]
    fn preprocess_of_vanishing_text_is_empty() {
        let cfg = CleanConfig::default();
        let seq = preprocess(&tweet("... !!! ???", Lang::En), &cfg);
        assert!(seq.tokens.is_empty());
        assert!(seq.raw_tokens.is_empty());
        assert!(seq.kept_hashtags.is_empty());
    }

    proptest! {
        #[test]
        fn clean_is_idempotent(text in "\\PC*", lower: bool, urls: bool, punct: bool,
                               hash: bool, mention: bool, collapse in proptest::option::of(2usize..5)) {
            let cfg = CleanConfig {
                lowercase: lower,
                strip_urls: urls,
                strip_punctuation: punct,
                keep_hashtag_body: hash,
                keep_mention_body: mention,
                collapse_repeats: collapse,
            };
            let once = clean(&text, &cfg);
            prop_assert_eq!(clean(&once, &cfg), once);
        }

        #[test]
        fn tokens_of_cleaned_text_are_nonempty(text in "\\PC*") {
            let toks = tokenize(&clean(&text, &CleanConfig::default()));
            prop_assert!(toks.iter().all(|t| !t.is_empty() && !t.contains(char::is_whitespace)));
        }
    }
}
