//! Lexicon-share sentiment scoring.
//!
//! A deliberate simplification of full VADER: no boosters, no negation
//! handling — each token contributes its lexicon valence independently. The
//! tweet-level shares are
//!
//! ```text
//! pos = P / (P + N + U)    P = sum of positive valences
//! neg = N / (P + N + U)    N = |sum| of negative valences
//! neu = U / (P + N + U)    U = count of out-of-lexicon tokens
//! ```
//!
//! In-lexicon tokens with valence 0 (the bundled function-word anchors) are
//! known-neutral and excluded from the mass entirely, so the neutral share
//! measures genuinely unknown content words. When the mass is empty the
//! shares degenerate to (0, 0, 1).
//!
//! Scores run over the *unstemmed* tokens: lexicon keys are real word forms.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use crate::corpus::Lang;
use crate::textprep::TokenSequence;

use super::FeatureError;

const EN_LEXICON: &str = include_str!("data/sentiment_en.tsv");
const ES_LEXICON: &str = include_str!("data/sentiment_es.tsv");

/// Token → valence map on the VADER scale, valences in [-4, 4], keys
/// lowercase.
#[derive(Debug, Clone, Default)]
pub struct SentimentLexicon {
    valence: HashMap<String, f64>,
}

impl SentimentLexicon {
    /// Parses `token<TAB>valence` lines; '#' comments and blank lines are
    /// skipped. Keys are lowercased on the way in.
    pub fn from_reader(reader: impl BufRead) -> Result<Self, FeatureError> {
        let mut valence = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let row = i + 1;
            let line = line?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (token, value) = line.split_once('\t').ok_or_else(|| {
                FeatureError::BadLexiconLine {
                    row,
                    reason: "expected token<TAB>valence".into(),
                }
            })?;
            if token.is_empty() {
                return Err(FeatureError::BadLexiconLine {
                    row,
                    reason: "empty token".into(),
                });
            }
            let v: f64 = value.trim().parse().map_err(|_| FeatureError::BadLexiconLine {
                row,
                reason: format!("bad valence {value:?}"),
            })?;
            if !v.is_finite() || !(-4.0..=4.0).contains(&v) {
                return Err(FeatureError::BadLexiconLine {
                    row,
                    reason: format!("valence {v} outside [-4, 4]"),
                });
            }
            valence.insert(token.to_lowercase(), v);
        }
        Ok(SentimentLexicon { valence })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, FeatureError> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    /// Bundled seed lexicon for `lang`.
    pub fn default_for(lang: Lang) -> Self {
        let raw = match lang {
            Lang::En => EN_LEXICON,
            Lang::Es => ES_LEXICON,
        };
        Self::from_reader(raw.as_bytes()).expect("bundled lexicon is well-formed")
    }

    pub fn get(&self, token: &str) -> Option<f64> {
        self.valence.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.valence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valence.is_empty()
    }
}

/// Normalized (pos, neg, neu) shares for one tweet. Always sums to 1; each
/// share lies in [0, 1].
pub fn sentiment_scores(tokens: &TokenSequence, lex: &SentimentLexicon) -> (f64, f64, f64) {
    let mut pos = 0.0;
    let mut neg = 0.0;
    let mut neu = 0.0;
    for tok in &tokens.raw_tokens {
        match lex.get(tok) {
            Some(v) if v > 0.0 => pos += v,
            Some(v) if v < 0.0 => neg -= v,
            Some(_) => {} // known-neutral: carries no mass
            None => neu += 1.0,
        }
    }
    let total = pos + neg + neu;
    if total == 0.0 {
        return (0.0, 0.0, 1.0);
    }
    (pos / total, neg / total, neu / total)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;

    fn toks(words: &[&str]) -> TokenSequence {
        TokenSequence {
            tokens: words.iter().map(|w| w.to_string()).collect(),
            raw_tokens: words.iter().map(|w| w.to_string()).collect(),
            source_id: String::new(),
            kept_hashtags: vec![],
            kept_mentions: vec![],
        }
    }

    #[test]
    fn all_unknown_is_fully_neutral() {
        let lex = SentimentLexicon::default();
        assert_eq!(sentiment_scores(&toks(&["qqq", "zzz"]), &lex), (0.0, 0.0, 1.0));
        assert_eq!(sentiment_scores(&toks(&[]), &lex), (0.0, 0.0, 1.0));
    }

    #[test]
    fn symmetric_valences_split_evenly() {
        let lex =
            SentimentLexicon::from_reader("up\t2.0\ndown\t-2.0\n".as_bytes()).unwrap();
        let (p, n, u) = sentiment_scores(&toks(&["up", "down"]), &lex);
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(n, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(u, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sad_example_is_predominantly_negative() {
        let lex = SentimentLexicon::default_for(Lang::En);
        assert_eq!(lex.get("sad"), Some(-2.1));
        let (p, n, u) = sentiment_scores(&toks(&["i", "am", "very", "sad", "today"]), &lex);
        assert!(n > u && n > p, "neg {n} should dominate pos {p} / neu {u}");
        assert_abs_diff_eq!(p + n + u, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn bundled_lexicons_load() {
        let en = SentimentLexicon::default_for(Lang::En);
        let es = SentimentLexicon::default_for(Lang::Es);
        assert!(en.len() > 100);
        assert!(es.len() > 100);
        assert_eq!(es.get("triste"), Some(-2.1));
        assert_eq!(en.get("the"), Some(0.0));
        assert_eq!(en.get("notaword"), None);
    }

    #[test]
    fn parser_rejects_malformed_lines() {
        let err = |s: &str| SentimentLexicon::from_reader(s.as_bytes()).unwrap_err();
        assert!(matches!(err("nocolumn\n"), FeatureError::BadLexiconLine { row: 1, .. }));
        assert!(matches!(err("tok\tx\n"), FeatureError::BadLexiconLine { row: 1, .. }));
        assert!(matches!(
            err("# fine\ntok\t4.5\n"),
            FeatureError::BadLexiconLine { row: 2, .. }
        ));
        assert!(matches!(err("\t1.0\n"), FeatureError::BadLexiconLine { row: 1, .. }));
    }

    #[test]
    fn keys_are_lowercased() {
        let lex = SentimentLexicon::from_reader("LOUD\t1.5\n".as_bytes()).unwrap();
        assert_eq!(lex.get("loud"), Some(1.5));
        assert_eq!(lex.get("LOUD"), None);
    }

    proptest! {
        #[test]
        fn shares_sum_to_one_and_stay_in_range(
            words in prop::collection::vec("[a-z]{1,8}", 0..30)
        ) {
            let lex = SentimentLexicon::default_for(Lang::En);
            let refs: Vec<&str> = words.iter().map(String::as_str).collect();
            let (p, n, u) = sentiment_scores(&toks(&refs), &lex);
            prop_assert!((p + n + u - 1.0).abs() < 1e-9);
            for share in [p, n, u] {
                prop_assert!((0.0..=1.0).contains(&share));
            }
        }
    }
}
