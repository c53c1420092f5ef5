//! Dataset auditing: hashtag concentration and annotation drift.
//!
//! Hate-speech corpora assembled by keyword search inherit the politics of
//! their keywords, and the train and test splits of such a corpus are not
//! guaranteed to be annotated the same way.  The functions here quantify
//! two symptoms of that:
//!
//! - **Hashtag concentration** ([`hashtag_stats`]): which tags dominate a
//!   split and what share of all tag occurrences the top few hold.
//! - **Conditional-rate drift** ([`conditional_label_rate`],
//!   [`discrepancy_report`]): a pattern like `#buildthewall` can co-occur
//!   with the hate label 98% of the time in training data and 35% of the
//!   time in test data, which caps what any classifier can score.
//!
//! Matching uses a deliberately dumb surface tokenizer (see
//! [`audit_tokens`]): case-folded maximal runs of alphanumerics and `_`,
//! with a `#` or `@` sigil kept when it immediately precedes the run.  The
//! preprocessing pipeline's tokenizer is *not* used because auditing wants
//! the text as annotators saw it -- unstemmed, with hashtags intact.
//!
//! Counting conventions: hashtag shares count every occurrence (two
//! `#maga` in one tweet count twice), while conditional rates count tweets
//! (a tweet matches a pattern once no matter how often the pattern
//! repeats).

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::corpus::{CorpusError, Dataset, LabelDim};
use crate::par;

#[derive(Debug, Error)]
pub enum AnalysisError {
    /// The pattern occurs in no tweet, so its label rate is undefined.
    #[error("pattern {0:?} matches no tweets")]
    NoMatches(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Case-folded surface tokens of one text: maximal runs of alphanumeric
/// characters and `_`, prefixed with `#` or `@` when the sigil immediately
/// precedes the run.  `"Go HOME! #BuildTheWall"` becomes
/// `["go", "home", "#buildthewall"]`.
pub fn audit_tokens(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut out = Vec::new();
    let mut run = String::new();
    let mut sigil: Option<char> = None;
    let mut flush = |run: &mut String, sigil: &mut Option<char>| {
        if !run.is_empty() {
            let mut tok = String::with_capacity(run.len() + 1);
            if let Some(s) = *sigil {
                tok.push(s);
            }
            tok.push_str(run);
            out.push(tok);
            run.clear();
        }
        *sigil = None;
    };
    for ch in lower.chars() {
        if ch.is_alphanumeric() || ch == '_' {
            run.push(ch);
        } else {
            flush(&mut run, &mut sigil);
            if ch == '#' || ch == '@' {
                sigil = Some(ch);
            }
        }
    }
    flush(&mut run, &mut sigil);
    out
}

/// One row of a hashtag concentration table.
#[derive(Debug, Clone, PartialEq)]
pub struct HashtagRow {
    pub hashtag: String,
    pub count: usize,
    /// Fraction of *all* hashtag occurrences in the dataset.
    pub share: f64,
}

/// The `top_k` most frequent hashtags of a dataset with their occurrence
/// counts and shares of the total hashtag occurrences.  Ties rank
/// lexicographically.  A dataset without hashtags yields an empty table.
pub fn hashtag_stats(ds: &Dataset, top_k: usize) -> Vec<HashtagRow> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut total = 0usize;
    for tweet in &ds.tweets {
        for tok in audit_tokens(&tweet.text) {
            if tok.starts_with('#') {
                *counts.entry(tok).or_insert(0) += 1;
                total += 1;
            }
        }
    }
    let mut rows: Vec<(String, usize)> = counts.into_iter().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows.truncate(top_k);
    rows.into_iter()
        .map(|(hashtag, count)| HashtagRow {
            hashtag,
            count,
            share: count as f64 / total as f64,
        })
        .collect()
}

/// Combined share of the `k` most frequent hashtags -- the paper-style
/// "top ten hashtags were 23% of the overall total" statistic.
pub fn top_hashtag_share(ds: &Dataset, k: usize) -> f64 {
    hashtag_stats(ds, k).iter().map(|r| r.share).sum()
}

/// CSV rendering of a hashtag table (`hashtag,count,share`).
pub fn hashtag_csv(rows: &[HashtagRow]) -> String {
    let mut out = String::from("hashtag,count,share\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{:.6}", r.hashtag, r.count, r.share);
    }
    out
}

/// How often `pattern` co-occurs with a positive label along `dim`.
///
/// Returns `(matches, rate)` where `matches` counts tweets containing the
/// pattern (case-insensitive, whole-token; hashtag patterns include the
/// `#`) and `rate` is the fraction of those with the label set.  A pattern
/// matching nothing has no defined rate and errors with
/// [`AnalysisError::NoMatches`] rather than reporting 0.
pub fn conditional_label_rate(
    ds: &Dataset,
    pattern: &str,
    dim: LabelDim,
) -> Result<(usize, f64), AnalysisError> {
    let labels = ds.labels_for(dim)?;
    let needle = pattern.to_lowercase();
    let mut matches = 0usize;
    let mut positive = 0usize;
    for (tweet, &label) in ds.tweets.iter().zip(&labels) {
        if audit_tokens(&tweet.text).iter().any(|t| *t == needle) {
            matches += 1;
            if label {
                positive += 1;
            }
        }
    }
    if matches == 0 {
        return Err(AnalysisError::NoMatches(pattern.to_string()));
    }
    Ok((matches, positive as f64 / matches as f64))
}

/// One drifted pattern in a [`DiscrepancyReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyRow {
    pub pattern: String,
    pub train_rate: f64,
    pub test_rate: f64,
    /// `|train_rate - test_rate|`.
    pub delta: f64,
    pub train_support: usize,
    pub test_support: usize,
}

/// Annotation-drift audit between two labeled splits.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyReport {
    pub train_name: String,
    pub test_name: String,
    pub min_support: usize,
    /// Ranked by `delta` descending; ties break lexicographically.
    pub rows: Vec<DiscrepancyRow>,
    /// Fraction of tweets containing at least one hashtag, per split.
    pub train_tag_rate: f64,
    pub test_tag_rate: f64,
    /// `train_tag_rate / test_tag_rate`; `None` when the test split has no
    /// tagged tweets.  Comparing the English and Spanish training sets this
    /// is the "2.6 times more likely to contain at least one tag" figure.
    pub hashtag_ratio: Option<f64>,
}

impl DiscrepancyReport {
    /// `pattern,train_rate,test_rate,delta,train_support,test_support` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pattern,train_rate,test_rate,delta,train_support,test_support\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{},{}",
                r.pattern, r.train_rate, r.test_rate, r.delta, r.train_support, r.test_support
            );
        }
        out
    }

    /// Human-readable summary for terminal output.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "annotation drift: {:?} vs {:?} (hate-speech label)",
            self.train_name, self.test_name
        );
        let _ = writeln!(
            out,
            "tweets with >=1 hashtag: {:.1}% vs {:.1}%{}",
            100.0 * self.train_tag_rate,
            100.0 * self.test_tag_rate,
            match self.hashtag_ratio {
                Some(r) => format!(" ({r:.1}x as likely)"),
                None => String::new(),
            }
        );
        let _ = writeln!(
            out,
            "{} patterns with support >= {} in both splits",
            self.rows.len(),
            self.min_support
        );
        if !self.rows.is_empty() {
            let width = self
                .rows
                .iter()
                .map(|r| r.pattern.chars().count())
                .max()
                .unwrap()
                .max("pattern".len());
            let _ = writeln!(
                out,
                "{:<width$}  {:>6}  {:>6}  {:>6}  support",
                "pattern", "train", "test", "delta"
            );
            for r in &self.rows {
                let _ = writeln!(
                    out,
                    "{:<width$}  {:>6.3}  {:>6.3}  {:>6.3}  {}/{}",
                    r.pattern, r.train_rate, r.test_rate, r.delta, r.train_support, r.test_support
                );
            }
        }
        out
    }
}

/// Per-pattern hate-rate drift between a train and a test split.
///
/// The pattern universe is every surface token of either split -- plain
/// words and `#`-tagged hashtags alike -- and a pattern is reported when
/// its tweet-level support reaches `min_support` (clamped to at least 1)
/// in *both* splits.  Rates are hate-speech rates, the axis along which
/// the source corpora drift.  Both splits must be fully labeled.
pub fn discrepancy_report(
    train: &Dataset,
    test: &Dataset,
    min_support: usize,
) -> Result<DiscrepancyReport, AnalysisError> {
    let min_support = min_support.max(1);
    let (train_counts, train_tagged) = pattern_counts(train)?;
    let (test_counts, test_tagged) = pattern_counts(test)?;

    let mut universe: Vec<&String> = train_counts
        .keys()
        .filter(|p| {
            train_counts[*p].0 >= min_support
                && test_counts.get(*p).is_some_and(|c| c.0 >= min_support)
        })
        .collect();
    universe.sort();

    let mut rows = par::map_collect(&universe, |pattern| {
        let (train_support, train_pos) = train_counts[*pattern];
        let (test_support, test_pos) = test_counts[*pattern];
        let train_rate = train_pos as f64 / train_support as f64;
        let test_rate = test_pos as f64 / test_support as f64;
        DiscrepancyRow {
            pattern: (*pattern).clone(),
            train_rate,
            test_rate,
            delta: (train_rate - test_rate).abs(),
            train_support,
            test_support,
        }
    });
    rows.sort_by(|a, b| {
        b.delta
            .total_cmp(&a.delta)
            .then_with(|| a.pattern.cmp(&b.pattern))
    });

    let train_tag_rate = train_tagged as f64 / train.len().max(1) as f64;
    let test_tag_rate = test_tagged as f64 / test.len().max(1) as f64;
    Ok(DiscrepancyReport {
        train_name: train.split_name.clone(),
        test_name: test.split_name.clone(),
        min_support,
        rows,
        train_tag_rate,
        test_tag_rate,
        hashtag_ratio: (test_tag_rate > 0.0).then(|| train_tag_rate / test_tag_rate),
    })
}

/// Tweet-level `(support, positives)` per pattern along HS, plus the count
/// of tweets containing at least one hashtag.
fn pattern_counts(
    ds: &Dataset,
) -> Result<(HashMap<String, (usize, usize)>, usize), AnalysisError> {
    let labels = ds.labels_for(LabelDim::Hs)?;
    let mut counts: HashMap<String, (usize, usize)> = HashMap::new();
    let mut tagged = 0usize;
    for (tweet, &label) in ds.tweets.iter().zip(&labels) {
        let distinct: HashSet<String> = audit_tokens(&tweet.text).into_iter().collect();
        if distinct.iter().any(|t| t.starts_with('#')) {
            tagged += 1;
        }
        for tok in distinct {
            let slot = counts.entry(tok).or_insert((0, 0));
            slot.0 += 1;
            if label {
                slot.1 += 1;
            }
        }
    }
    Ok((counts, tagged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LabelSet, Lang, Tweet};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tweet(id: usize, text: &str, hs: bool) -> Tweet {
        Tweet {
            id: id.to_string(),
            text: text.to_string(),
            lang: Lang::En,
            labels: Some(LabelSet::coerced(hs, false, false)),
        }
    }

    fn dataset(name: &str, tweets: Vec<Tweet>) -> Dataset {
        Dataset {
            lang: Lang::En,
            split_name: name.to_string(),
            tweets,
        }
    }

    #[test]
    fn audit_tokens_folds_case_and_keeps_sigils() {
        assert_eq!(
            audit_tokens("Go HOME! #BuildTheWall,#MAGA @User_123 http://t.co/xYz"),
            ["go", "home", "#buildthewall", "#maga", "@user_123", "http", "t", "co", "xyz"]
        );
        assert_eq!(audit_tokens("qué pasa, señor"), ["qué", "pasa", "señor"]);
        assert_eq!(audit_tokens("##double #tag#two a#b"), ["#double", "#tag", "#two", "a", "#b"]);
        assert!(audit_tokens("  ... !!! ").is_empty());
        assert!(audit_tokens("").is_empty());
    }

    #[test]
    fn hashtag_stats_counts_occurrences() {
        // #a appears 9 times (twice in one tweet), #b once -> shares .9/.1
        let mut tweets = vec![tweet(0, "stop it #a #a now", false)];
        for i in 1..8 {
            tweets.push(tweet(i, "more #A talk", false));
        }
        tweets.push(tweet(8, "only #b here", true));
        let ds = dataset("train", tweets);
        let rows = hashtag_stats(&ds, 10);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].hashtag, "#a");
        assert_eq!(rows[0].count, 9);
        assert_eq!(rows[0].share, 0.9);
        assert_eq!(rows[1].hashtag, "#b");
        assert_eq!(rows[1].count, 1);
        assert_eq!(rows[1].share, 0.1);
        assert_eq!(hashtag_stats(&ds, 1).len(), 1);
    }

    #[test]
    fn hashtag_stats_without_hashtags_is_empty() {
        let ds = dataset("train", vec![tweet(0, "no tags at all", false)]);
        assert!(hashtag_stats(&ds, 10).is_empty());
        assert_eq!(top_hashtag_share(&ds, 10), 0.0);
    }

    /// Ten planted head tags hold exactly 23 of 100 occurrences, echoing
    /// the published English top-ten share.
    #[test]
    fn top_ten_share_recovers_a_planted_concentration() {
        let head = [3, 3, 3, 2, 2, 2, 2, 2, 2, 2]; // sums to 23
        let mut tweets = Vec::new();
        let mut id = 0;
        for (i, &n) in head.iter().enumerate() {
            for _ in 0..n {
                tweets.push(tweet(id, &format!("text #head{i}"), false));
                id += 1;
            }
        }
        for i in 0..77 {
            tweets.push(tweet(id + i, &format!("text #tail{i}"), false));
        }
        let ds = dataset("train", tweets);
        let share = top_hashtag_share(&ds, 10);
        assert!((share - 0.23).abs() < 1e-12, "top-10 share {share}");
        let rows = hashtag_stats(&ds, 10);
        assert!(rows.iter().all(|r| r.hashtag.starts_with("#head")));
    }

    #[test]
    fn hashtag_stats_are_permutation_invariant() {
        let mut tweets: Vec<Tweet> = (0..40)
            .map(|i| tweet(i, &format!("x #t{} #shared", i % 7), i % 2 == 0))
            .collect();
        let ds = dataset("a", tweets.clone());
        let before = hashtag_stats(&ds, 5);
        tweets.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
        let shuffled = dataset("a", tweets);
        assert_eq!(before, hashtag_stats(&shuffled, 5));
    }

    /// 98 of 100 `#buildthewall` training tweets are hate, 35 of 100 test
    /// tweets; `bitch` drifts 78% -> 43%.  The planted rates come back
    /// exactly.
    #[test]
    fn conditional_rates_recover_planted_drift() {
        let make = |name: &str, tag_pos: usize, word_pos: usize| {
            let mut tweets = Vec::new();
            for i in 0..100 {
                tweets.push(tweet(i, "go away #BuildTheWall now", i < tag_pos));
            }
            for i in 0..100 {
                tweets.push(tweet(100 + i, "you lying bitch", i < word_pos));
            }
            dataset(name, tweets)
        };
        let train = make("train", 98, 78);
        let test = make("test", 35, 43);

        let (m, r) = conditional_label_rate(&train, "#buildthewall", LabelDim::Hs).unwrap();
        assert_eq!((m, r), (100, 0.98));
        let (m, r) = conditional_label_rate(&test, "#BUILDTHEWALL", LabelDim::Hs).unwrap();
        assert_eq!((m, r), (100, 0.35));
        let (m, r) = conditional_label_rate(&train, "bitch", LabelDim::Hs).unwrap();
        assert_eq!((m, r), (100, 0.78));
        let (m, r) = conditional_label_rate(&test, "bitch", LabelDim::Hs).unwrap();
        assert_eq!((m, r), (100, 0.43));
    }

    #[test]
    fn absent_patterns_are_not_rate_zero() {
        let ds = dataset("train", vec![tweet(0, "nothing here", true)]);
        assert!(matches!(
            conditional_label_rate(&ds, "#buildthewall", LabelDim::Hs),
            Err(AnalysisError::NoMatches(_))
        ));
        // substring occurrences do not count as token matches
        assert!(matches!(
            conditional_label_rate(&ds, "thing", LabelDim::Hs),
            Err(AnalysisError::NoMatches(_))
        ));
    }

    #[test]
    fn conditional_rate_matches_a_naive_counting_oracle() {
        let words = ["bitch", "#maga", "refugee", "home", "love", "the"];
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let tweets: Vec<Tweet> = (0..300)
            .map(|i| {
                let n = rng.gen_range(1..6);
                let text = (0..n)
                    .map(|_| words[rng.gen_range(0..words.len())])
                    .collect::<Vec<_>>()
                    .join(" ");
                tweet(i, &text, rng.gen_bool(0.4))
            })
            .collect();
        let ds = dataset("fuzz", tweets);
        for pattern in words {
            let (matches, rate) = conditional_label_rate(&ds, pattern, LabelDim::Hs).unwrap();
            let mut m = 0;
            let mut pos = 0;
            for t in &ds.tweets {
                if t.text.split(' ').any(|w| w == pattern) {
                    m += 1;
                    if t.labels.unwrap().hs() {
                        pos += 1;
                    }
                }
            }
            assert_eq!(matches, m, "{pattern}");
            assert_eq!(rate, pos as f64 / m as f64, "{pattern}");
            assert!((0.0..=1.0).contains(&rate));
        }
    }

    fn drift_fixture() -> (Dataset, Dataset) {
        let make = |name: &str, drifted_pos: usize| {
            let mut tweets = Vec::new();
            for i in 0..100 {
                tweets.push(tweet(i, "shout #drifted loud", i < drifted_pos));
            }
            // disjoint stable block, planted at 50% in both splits
            for i in 0..100 {
                tweets.push(tweet(100 + i, "just steady words", i % 2 == 0));
            }
            dataset(name, tweets)
        };
        (make("train", 98), make("test", 35))
    }

    #[test]
    fn discrepancy_report_ranks_the_drifted_pattern_first() {
        let (train, test) = drift_fixture();
        let report = discrepancy_report(&train, &test, 20).unwrap();
        assert_eq!(report.rows[0].pattern, "#drifted");
        assert!((report.rows[0].delta - 0.63).abs() < 1e-12);
        assert_eq!(report.rows[0].train_rate, 0.98);
        assert_eq!(report.rows[0].test_rate, 0.35);
        assert_eq!(report.rows[0].train_support, 100);
        assert_eq!(report.rows[0].test_support, 100);

        let steady = report.rows.iter().find(|r| r.pattern == "steady").unwrap();
        assert_eq!(steady.train_support, 100);
        assert_eq!(steady.delta, 0.0);
        for pair in report.rows.windows(2) {
            assert!(pair[0].delta >= pair[1].delta, "not sorted: {pair:?}");
        }
        assert!(report
            .rows
            .iter()
            .all(|r| (0.0..=1.0).contains(&r.delta)
                && (0.0..=1.0).contains(&r.train_rate)
                && (0.0..=1.0).contains(&r.test_rate)));
    }

    #[test]
    fn identical_splits_have_zero_deltas() {
        let (train, _) = drift_fixture();
        let report = discrepancy_report(&train, &train, 5).unwrap();
        assert!(!report.rows.is_empty());
        assert!(report.rows.iter().all(|r| r.delta == 0.0));
        assert_eq!(report.hashtag_ratio, Some(1.0));
    }

    #[test]
    fn min_support_above_all_counts_empties_the_report() {
        let (train, test) = drift_fixture();
        let report = discrepancy_report(&train, &test, 1000).unwrap();
        assert!(report.rows.is_empty());
        // clamped to 1, not 0, so rates stay defined
        let loose = discrepancy_report(&train, &test, 0).unwrap();
        assert_eq!(loose.min_support, 1);
    }

    /// 26 of 40 train tweets carry a tag vs 10 of 40 test tweets: the
    /// likelihood ratio is exactly the published 2.6.
    #[test]
    fn hashtag_likelihood_ratio_recovers_a_planted_ratio() {
        let make = |name: &str, tagged: usize| {
            let tweets = (0..40)
                .map(|i| {
                    let text = if i < tagged { "words #tag" } else { "words" };
                    tweet(i, text, i % 2 == 0)
                })
                .collect();
            dataset(name, tweets)
        };
        let report = discrepancy_report(&make("en", 26), &make("es", 10), 20).unwrap();
        assert_eq!(report.train_tag_rate, 0.65);
        assert_eq!(report.test_tag_rate, 0.25);
        let ratio = report.hashtag_ratio.unwrap();
        assert!((ratio - 2.6).abs() < 1e-12, "ratio {ratio}");

        let untagged = discrepancy_report(&make("en", 26), &make("es", 0), 20).unwrap();
        assert_eq!(untagged.hashtag_ratio, None);
    }

    #[test]
    fn report_emitters_have_stable_shapes() {
        let (train, test) = drift_fixture();
        let report = discrepancy_report(&train, &test, 20).unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "pattern,train_rate,test_rate,delta,train_support,test_support"
        );
        let first = lines.next().unwrap();
        assert_eq!(first, "#drifted,0.980000,0.350000,0.630000,100,100");
        assert_eq!(csv.lines().count(), 1 + report.rows.len());

        let text = report.to_text();
        assert!(text.contains("\"train\" vs \"test\""));
        assert!(text.contains("#drifted"));
        assert!(text.contains("support >= 20"));

        let tags = hashtag_csv(&hashtag_stats(&train, 3));
        assert_eq!(tags.lines().next().unwrap(), "hashtag,count,share");
        assert_eq!(tags.lines().nth(1).unwrap(), "#drifted,100,1.000000");
    }
}
