//! The full feature pipeline: sparse TF-IDF block followed by a dense block
//! of engineered features, z-scored with training-split statistics.

use crate::corpus::Tweet;
use crate::par;
use crate::textprep::TokenSequence;

use super::{
    fit_tfidf, readability, sentiment_scores, surface_stats, FeatureError, SentimentLexicon,
    SparseVector, Vocabulary,
};

/// Dense slot names, in vector order after the TF-IDF block.
pub const DENSE_SLOTS: [&str; 13] = [
    "syllable_count",
    "avg_syllable",
    "word_count",
    "character_count",
    "length",
    "capitals",
    "word_vs_unique",
    "word_unique_percentage",
    "word_density",
    "hashtag_count",
    "mention_count",
    "fre",
    "fkgl",
];

/// Slots the importance screening flagged as uncorrelated; only these may be
/// dropped via [`PipelineConfig::drop_slots`].
pub const DROPPABLE_SLOTS: [&str; 5] = [
    "avg_syllable",
    "capitals",
    "word_vs_unique",
    "character_count",
    "word_unique_percentage",
];

/// Optional sentiment-share slots, appended after the 13 quantitative ones
/// when [`PipelineConfig::include_sentiment`] is set.
pub const SENTIMENT_SLOTS: [&str; 3] = ["sentiment_pos", "sentiment_neg", "sentiment_neu"];

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Inclusive n-gram sizes for the TF-IDF block.
    pub n_range: (usize, usize),
    /// Minimum document frequency for a vocabulary entry.
    pub min_df: usize,
    /// Dense slots to drop; must be a subset of [`DROPPABLE_SLOTS`].
    pub drop_slots: Vec<String>,
    /// Append the three sentiment shares to the dense block.
    pub include_sentiment: bool,
    /// Z-score the dense block with train statistics.
    pub standardize: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            n_range: (1, 3),
            min_df: 2,
            drop_slots: Vec::new(),
            include_sentiment: false,
            standardize: true,
        }
    }
}

/// Fitted feature extractor. Obtainable only through [`FeaturePipeline::fit`],
/// so a not-fitted state cannot be observed.
#[derive(Debug, Clone)]
pub struct FeaturePipeline {
    vocab: Vocabulary,
    lexicon: SentimentLexicon,
    /// Indices into the full slot list (13 + optional 3) that remain.
    kept: Vec<usize>,
    names: Vec<&'static str>,
    mean: Vec<f64>,
    std: Vec<f64>,
    include_sentiment: bool,
    standardize: bool,
}

fn all_slots(include_sentiment: bool) -> Vec<&'static str> {
    let mut names = DENSE_SLOTS.to_vec();
    if include_sentiment {
        names.extend(SENTIMENT_SLOTS);
    }
    names
}

/// Raw (pre-standardization) dense values, aligned with `all_slots`.
fn raw_dense(
    tweet: &Tweet,
    tokens: &TokenSequence,
    lexicon: &SentimentLexicon,
    include_sentiment: bool,
) -> Vec<f64> {
    let st = surface_stats(tweet, tokens);
    // Zero-token tweets have no defined readability; score them neutral 0.
    let (fre, fkgl) = readability(&st).unwrap_or((0.0, 0.0));
    let words = (st.word_count as f64).max(1.0);
    let mut out = vec![
        st.syllable_count as f64,
        st.syllable_count as f64 / words,
        st.word_count as f64,
        st.char_count as f64,
        st.length as f64,
        st.capitals as f64,
        st.unique_words as f64,
        st.unique_words as f64 / words,
        st.word_density,
        st.hashtag_count as f64,
        st.mention_count as f64,
        fre,
        fkgl,
    ];
    if include_sentiment {
        let (pos, neg, neu) = sentiment_scores(tokens, lexicon);
        out.extend([pos, neg, neu]);
    }
    out
}

impl FeaturePipeline {
    /// Fits vocabulary and dense statistics on the training split.
    /// `tweets[i]` must be the source of `tokens[i]`.
    pub fn fit(
        tweets: &[Tweet],
        tokens: &[TokenSequence],
        lexicon: SentimentLexicon,
        cfg: &PipelineConfig,
    ) -> Result<Self, FeatureError> {
        assert_eq!(tweets.len(), tokens.len(), "tweets and tokens must align");
        for slot in &cfg.drop_slots {
            if !DROPPABLE_SLOTS.contains(&slot.as_str()) {
                return Err(FeatureError::BadDropSlot(slot.clone()));
            }
        }
        let vocab = fit_tfidf(tokens, cfg.n_range, cfg.min_df)?;

        let slots = all_slots(cfg.include_sentiment);
        let kept: Vec<usize> = (0..slots.len())
            .filter(|&i| !cfg.drop_slots.iter().any(|d| d == slots[i]))
            .collect();
        let names: Vec<&'static str> = kept.iter().map(|&i| slots[i]).collect();

        // Train-split mean and population variance per kept slot.
        let n = tweets.len() as f64;
        let mut mean = vec![0.0; kept.len()];
        let mut var = vec![0.0; kept.len()];
        let rows: Vec<Vec<f64>> = tweets
            .iter()
            .zip(tokens)
            .map(|(tw, tk)| raw_dense(tw, tk, &lexicon, cfg.include_sentiment))
            .collect();
        for row in &rows {
            for (j, &slot) in kept.iter().enumerate() {
                mean[j] += row[slot];
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        for row in &rows {
            for (j, &slot) in kept.iter().enumerate() {
                var[j] += (row[slot] - mean[j]).powi(2);
            }
        }
        let std: Vec<f64> = var.iter().map(|v| (v / n).sqrt()).collect();

        Ok(FeaturePipeline {
            vocab,
            lexicon,
            kept,
            names,
            mean,
            std,
            include_sentiment: cfg.include_sentiment,
            standardize: cfg.standardize,
        })
    }

    /// Total vector dimensionality: |vocab| + kept dense slots.
    pub fn dim(&self) -> usize {
        self.vocab.len() + self.kept.len()
    }

    /// First dense column; TF-IDF occupies `0..dense_offset()`.
    pub fn dense_offset(&self) -> usize {
        self.vocab.len()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn lexicon(&self) -> &SentimentLexicon {
        &self.lexicon
    }

    /// Names of the kept dense slots, in column order.
    pub fn dense_names(&self) -> &[&'static str] {
        &self.names
    }

    pub fn transform(&self, tweet: &Tweet, tokens: &TokenSequence) -> SparseVector {
        let mut pairs = self.vocab.transform(tokens).into_pairs();
        let raw = raw_dense(tweet, tokens, &self.lexicon, self.include_sentiment);
        let offset = self.dense_offset();
        for (j, &slot) in self.kept.iter().enumerate() {
            let value = if self.standardize {
                // Constant slots (std 0) carry no information; z-score to 0.
                if self.std[j] > 0.0 {
                    (raw[slot] - self.mean[j]) / self.std[j]
                } else {
                    0.0
                }
            } else {
                raw[slot]
            };
            if value != 0.0 {
                pairs.push((offset + j, value));
            }
        }
        SparseVector::new(pairs)
    }

    /// Parallel batch transform; output order matches input order.
    pub fn transform_batch(
        &self,
        tweets: &[Tweet],
        tokens: &[TokenSequence],
    ) -> Vec<SparseVector> {
        assert_eq!(tweets.len(), tokens.len(), "tweets and tokens must align");
        par::map_range(tweets.len(), |i| self.transform(&tweets[i], &tokens[i]))
    }

    /// Versioned text serialization: a header with the two flags, one
    /// `name<TAB>mean<TAB>std` row per kept dense slot, then the vocabulary
    /// block verbatim.  The lexicon is *not* embedded; callers pass it back
    /// to [`FeaturePipeline::from_text`].
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "hwk.pipeline.v1\t{}\t{}\t{}",
            u8::from(self.include_sentiment),
            u8::from(self.standardize),
            self.kept.len()
        );
        for (j, name) in self.names.iter().enumerate() {
            let _ = writeln!(out, "{name}\t{}\t{}", self.mean[j], self.std[j]);
        }
        out.push_str(&self.vocab.to_text());
        out
    }

    pub fn from_text(text: &str, lexicon: SentimentLexicon) -> Result<Self, FeatureError> {
        let bad = |msg: String| FeatureError::BadVocabFile(format!("pipeline: {msg}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let fields: Vec<&str> = header.split('\t').collect();
        if fields.len() != 4 || fields[0] != "hwk.pipeline.v1" {
            return Err(bad(format!("unrecognized header {header:?}")));
        }
        let flag = |s: &str, what: &str| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(bad(format!("bad {what} flag {s:?}"))),
        };
        let include_sentiment = flag(fields[1], "include_sentiment")?;
        let standardize = flag(fields[2], "standardize")?;
        let n_kept: usize = fields[3]
            .parse()
            .map_err(|_| bad(format!("bad slot count {:?}", fields[3])))?;

        let slots = all_slots(include_sentiment);
        let mut kept = Vec::with_capacity(n_kept);
        let mut names = Vec::with_capacity(n_kept);
        let mut mean = Vec::with_capacity(n_kept);
        let mut std = Vec::with_capacity(n_kept);
        for row in 0..n_kept {
            let line = lines
                .next()
                .ok_or_else(|| bad(format!("expected {n_kept} slot rows, found {row}")))?;
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(bad(format!("slot row {}: expected 3 columns", row + 2)));
            }
            let slot = slots
                .iter()
                .position(|s| *s == cols[0])
                .ok_or_else(|| bad(format!("slot row {}: unknown slot {:?}", row + 2, cols[0])))?;
            if kept.last().is_some_and(|&prev| slot <= prev) {
                return Err(bad(format!("slot row {}: {:?} out of order", row + 2, cols[0])));
            }
            let num = |s: &str, what: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("slot row {}: bad {what} {s:?}", row + 2)))
            };
            kept.push(slot);
            names.push(slots[slot]);
            mean.push(num(cols[1], "mean")?);
            let sd = num(cols[2], "std")?;
            if sd < 0.0 {
                return Err(bad(format!("slot row {}: negative std", row + 2)));
            }
            std.push(sd);
        }

        let rest: Vec<&str> = lines.collect();
        if rest.is_empty() {
            return Err(bad("missing vocabulary block".into()));
        }
        let vocab = Vocabulary::from_text(&rest.join("\n"))?;
        Ok(FeaturePipeline {
            vocab,
            lexicon,
            kept,
            names,
            mean,
            std,
            include_sentiment,
            standardize,
        })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<(), FeatureError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(
        path: impl AsRef<std::path::Path>,
        lexicon: SentimentLexicon,
    ) -> Result<Self, FeatureError> {
        Self::from_text(&std::fs::read_to_string(path)?, lexicon)
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use crate::corpus::Lang;
    use crate::textprep::{preprocess, CleanConfig};

    use super::*;

    fn corpus(texts: &[&str]) -> (Vec<Tweet>, Vec<TokenSequence>) {
        let tweets: Vec<Tweet> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Tweet {
                id: format!("{i}"),
                text: t.to_string(),
                lang: Lang::En,
                labels: None,
            })
            .collect();
        let tokens = tweets
            .iter()
            .map(|t| preprocess(t, &CleanConfig::default()))
            .collect();
        (tweets, tokens)
    }

    fn sample() -> (Vec<Tweet>, Vec<TokenSequence>) {
        corpus(&[
            "Women are stupid and useless",
            "women are great people",
            "I love my family. Truly!",
            "stupid people everywhere #rant",
            "What a great day to be alive",
        ])
    }

    #[test]
    fn vector_length_is_vocab_plus_13() {
        let (tweets, tokens) = sample();
        let cfg = PipelineConfig::default();
        let pipe =
            FeaturePipeline::fit(&tweets, &tokens, SentimentLexicon::default_for(Lang::En), &cfg)
                .unwrap();
        assert_eq!(pipe.dim(), pipe.vocab().len() + 13);
        assert_eq!(pipe.dense_names().len(), 13);
    }

    #[test]
    fn dropping_slots_shrinks_the_vector_by_that_count() {
        let (tweets, tokens) = sample();
        let lex = SentimentLexicon::default_for(Lang::En);
        let mut cfg = PipelineConfig::default();
        cfg.drop_slots = vec!["capitals".into(), "avg_syllable".into()];
        let dropped = FeaturePipeline::fit(&tweets, &tokens, lex.clone(), &cfg).unwrap();
        let full =
            FeaturePipeline::fit(&tweets, &tokens, lex, &PipelineConfig::default()).unwrap();
        assert_eq!(dropped.dim() + 2, full.dim());
        assert!(!dropped.dense_names().contains(&"capitals"));
    }

    #[test]
    fn only_screened_slots_are_droppable() {
        let (tweets, tokens) = sample();
        let mut cfg = PipelineConfig::default();
        cfg.drop_slots = vec!["fre".into()];
        let err = FeaturePipeline::fit(
            &tweets,
            &tokens,
            SentimentLexicon::default_for(Lang::En),
            &cfg,
        )
        .unwrap_err();
        assert!(matches!(err, FeatureError::BadDropSlot(s) if s == "fre"));
    }

    #[test]
    fn train_dense_block_standardizes_to_mean_zero() {
        let (tweets, tokens) = sample();
        let cfg = PipelineConfig::default();
        let pipe =
            FeaturePipeline::fit(&tweets, &tokens, SentimentLexicon::default_for(Lang::En), &cfg)
                .unwrap();
        let vectors = pipe.transform_batch(&tweets, &tokens);
        let offset = pipe.dense_offset();
        for j in 0..13 {
            let mean: f64 =
                vectors.iter().map(|v| v.get(offset + j)).sum::<f64>() / tweets.len() as f64;
            assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn transform_is_deterministic_and_reuses_train_stats() {
        let (tweets, tokens) = sample();
        let cfg = PipelineConfig::default();
        let pipe =
            FeaturePipeline::fit(&tweets, &tokens, SentimentLexicon::default_for(Lang::En), &cfg)
                .unwrap();
        // A "test" tweet identical to a train tweet maps to the same vector.
        let (test_tweets, test_tokens) = corpus(&["Women are stupid and useless"]);
        let train_vec = pipe.transform(&tweets[0], &tokens[0]);
        let test_vec = pipe.transform(&test_tweets[0], &test_tokens[0]);
        assert_eq!(train_vec, test_vec);
    }

    #[test]
    fn sentiment_slots_are_optional() {
        let (tweets, tokens) = sample();
        let lex = SentimentLexicon::default_for(Lang::En);
        let mut cfg = PipelineConfig::default();
        cfg.include_sentiment = true;
        let pipe = FeaturePipeline::fit(&tweets, &tokens, lex, &cfg).unwrap();
        assert_eq!(pipe.dim(), pipe.vocab().len() + 16);
        assert!(pipe.dense_names().contains(&"sentiment_neg"));
    }

    #[test]
    fn batch_matches_single_transforms() {
        let (tweets, tokens) = sample();
        let cfg = PipelineConfig::default();
        let pipe =
            FeaturePipeline::fit(&tweets, &tokens, SentimentLexicon::default_for(Lang::En), &cfg)
                .unwrap();
        let batch = pipe.transform_batch(&tweets, &tokens);
        for (i, v) in batch.iter().enumerate() {
            assert_eq!(*v, pipe.transform(&tweets[i], &tokens[i]));
        }
    }

    #[test]
    fn pipeline_round_trips_through_text() {
        let (tweets, tokens) = sample();
        let cfg = PipelineConfig {
            include_sentiment: true,
            drop_slots: vec!["capitals".into(), "avg_syllable".into()],
            ..PipelineConfig::default()
        };
        let pipe =
            FeaturePipeline::fit(&tweets, &tokens, SentimentLexicon::default_for(Lang::En), &cfg)
                .unwrap();
        let text = pipe.to_text();
        let back =
            FeaturePipeline::from_text(&text, SentimentLexicon::default_for(Lang::En)).unwrap();
        assert_eq!(back.dim(), pipe.dim());
        assert_eq!(back.dense_names(), pipe.dense_names());
        for (tw, tk) in tweets.iter().zip(&tokens) {
            assert_eq!(back.transform(tw, tk), pipe.transform(tw, tk));
        }
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn pipeline_from_text_rejects_malformed_input() {
        let (tweets, tokens) = sample();
        let pipe = FeaturePipeline::fit(
            &tweets,
            &tokens,
            SentimentLexicon::default_for(Lang::En),
            &PipelineConfig::default(),
        )
        .unwrap();
        let good = pipe.to_text();
        let lex = || SentimentLexicon::default_for(Lang::En);

        let cases = [
            ("", "empty"),
            ("hwk.pipeline.v0\t0\t1\t0\n", "bad header"),
            ("hwk.pipeline.v1\t2\t1\t0\n", "bad flag"),
            ("hwk.pipeline.v1\t0\t1\t1\n", "missing slot row"),
            ("hwk.pipeline.v1\t0\t1\t1\nno_such_slot\t0\t1\nhwk.vocab.v1\t1\t1\t1\n", "unknown slot"),
            ("hwk.pipeline.v1\t0\t1\t1\nfre\t0\tNaN\nhwk.vocab.v1\t1\t1\t1\n", "non-finite std"),
            ("hwk.pipeline.v1\t0\t1\t0\n", "missing vocab"),
        ];
        for (text, label) in cases {
            assert!(
                FeaturePipeline::from_text(text, lex()).is_err(),
                "accepted {label}"
            );
        }
        // swapped slot order violates the ascending-index invariant
        let swapped = "hwk.pipeline.v1\t0\t1\t2\nword_count\t0\t1\nsyllable_count\t0\t1\nhwk.vocab.v1\t1\t1\t1\nthe\t0\t0\n";
        assert!(FeaturePipeline::from_text(swapped, lex()).is_err());
        assert!(FeaturePipeline::from_text(&good, lex()).is_ok());
    }
}
