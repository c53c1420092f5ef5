//! Dataset ingestion, the HS/TR/AG label model, and deterministic splits.
//!
//! The on-disk format is a headered TSV (`id<TAB>text<TAB>HS<TAB>TR<TAB>AG`)
//! mirroring the hatEval release layout. Label columns may be omitted for
//! unlabeled inference input. Text is stored verbatim, so load → save → load
//! round-trips byte-identically.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Corpus language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lang {
    En,
    Es,
}

impl Lang {
    /// Two-letter lowercase code.
    pub fn code(self) -> &'static str {
        match self {
            Lang::En => "en",
            Lang::Es => "es",
        }
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Lang {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "en" | "english" => Ok(Lang::En),
            "es" | "spanish" => Ok(Lang::Es),
            other => Err(CorpusError::UnsupportedLanguage(other.to_string())),
        }
    }
}

/// One of the three annotation dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelDim {
    Hs,
    Tr,
    Ag,
}

impl LabelDim {
    pub const ALL: [LabelDim; 3] = [LabelDim::Hs, LabelDim::Tr, LabelDim::Ag];

    /// Column name as used by the TSV schema.
    pub fn name(self) -> &'static str {
        match self {
            LabelDim::Hs => "HS",
            LabelDim::Tr => "TR",
            LabelDim::Ag => "AG",
        }
    }
}

impl fmt::Display for LabelDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Error raised when TR or AG is set on a tweet that is not hate speech.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("TR/AG set on a non-hateful tweet (hs=0, tr={}, ag={})", *tr as u8, *ag as u8)]
pub struct LabelInvariant {
    pub tr: bool,
    pub ag: bool,
}

/// Per-tweet annotation triple.
///
/// Task semantics: a tweet that is not hate speech carries neither a target
/// nor aggression, so `hs = false` forces `tr = ag = false`. The fields are
/// private to keep that dependency unbreakable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabelSet {
    hs: bool,
    tr: bool,
    ag: bool,
}

impl LabelSet {
    /// Builds a label set, rejecting combinations that violate the scheme.
    pub fn new(hs: bool, tr: bool, ag: bool) -> Result<Self, LabelInvariant> {
        if !hs && (tr || ag) {
            return Err(LabelInvariant { tr, ag });
        }
        Ok(LabelSet { hs, tr, ag })
    }

    /// Builds a label set, silently forcing TR=AG=0 when HS=0.
    pub fn coerced(hs: bool, tr: bool, ag: bool) -> Self {
        LabelSet {
            hs,
            tr: hs && tr,
            ag: hs && ag,
        }
    }

    pub fn hs(self) -> bool {
        self.hs
    }

    pub fn tr(self) -> bool {
        self.tr
    }

    pub fn ag(self) -> bool {
        self.ag
    }

    /// Value along one annotation dimension.
    pub fn get(self, dim: LabelDim) -> bool {
        match dim {
            LabelDim::Hs => self.hs,
            LabelDim::Tr => self.tr,
            LabelDim::Ag => self.ag,
        }
    }

    /// `[hs, tr, ag]` in schema order.
    pub fn as_array(self) -> [bool; 3] {
        [self.hs, self.tr, self.ag]
    }
}

/// A single data point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tweet {
    pub id: String,
    pub text: String,
    pub lang: Lang,
    pub labels: Option<LabelSet>,
}

/// An ordered collection of tweets sharing one language.
///
/// Order is load order and is never silently permuted; splits re-sort their
/// members back into the parent's order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub lang: Lang,
    pub split_name: String,
    pub tweets: Vec<Tweet>,
}

impl Dataset {
    pub fn new(lang: Lang, split_name: impl Into<String>) -> Self {
        Dataset {
            lang,
            split_name: split_name.into(),
            tweets: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    /// Labels of every tweet, or [`CorpusError::Unlabeled`] if any are missing.
    pub fn labels(&self) -> Result<Vec<LabelSet>, CorpusError> {
        self.tweets
            .iter()
            .map(|t| t.labels.ok_or(CorpusError::Unlabeled))
            .collect()
    }

    /// Boolean labels along one dimension for every tweet.
    pub fn labels_for(&self, dim: LabelDim) -> Result<Vec<bool>, CorpusError> {
        Ok(self.labels()?.into_iter().map(|l| l.get(dim)).collect())
    }

    pub fn texts(&self) -> Vec<&str> {
        self.tweets.iter().map(|t| t.text.as_str()).collect()
    }
}

/// Errors from loading, validating, or splitting datasets.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {row}: invalid UTF-8")]
    EncodingError { row: usize },
    #[error("header is missing column {0:?}")]
    MissingColumn(&'static str),
    #[error("line {row}: {reason}")]
    BadRow { row: usize, reason: String },
    #[error("line {row}, column {column}: bad label value {value:?} ({reason})")]
    BadLabelValue {
        row: usize,
        column: &'static str,
        value: String,
        reason: &'static str,
    },
    #[error("line {row}: duplicate id {id:?}")]
    DuplicateId { row: usize, id: String },
    #[error("line {row}: empty text")]
    EmptyText { row: usize },
    #[error("unsupported language {0:?} (expected \"en\" or \"es\")")]
    UnsupportedLanguage(String),
    #[error("split fractions must be non-negative and sum to 1, got ({0}, {1}, {2})")]
    BadFractions(f64, f64, f64),
    #[error("class {dim}={} has {have} tweets; the requested split needs at least {need}", *class as u8)]
    ClassTooSmall {
        dim: &'static str,
        class: bool,
        have: usize,
        need: usize,
    },
    #[error("operation requires labels but the dataset has unlabeled tweets")]
    Unlabeled,
}

/// Options for [`load_dataset_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Repair rows that violate the label invariant by forcing TR=AG=0 when
    /// HS=0, instead of rejecting the row.
    pub coerce_labels: bool,
}

const HEADER: [&str; 5] = ["id", "text", "HS", "TR", "AG"];

/// Loads a headered TSV dataset. See the module docs for the schema.
pub fn load_dataset(path: impl AsRef<Path>, lang: Lang) -> Result<Dataset, CorpusError> {
    load_dataset_with(path, lang, LoadOptions::default())
}

/// [`load_dataset`] with explicit [`LoadOptions`].
pub fn load_dataset_with(
    path: impl AsRef<Path>,
    lang: Lang,
    opts: LoadOptions,
) -> Result<Dataset, CorpusError> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let tweets = parse_tsv(&bytes, lang, opts)?;
    let split_name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(Dataset {
        lang,
        split_name,
        tweets,
    })
}

/// Parses TSV bytes into tweets; exposed for in-memory sources and tests.
pub fn parse_tsv(bytes: &[u8], lang: Lang, opts: LoadOptions) -> Result<Vec<Tweet>, CorpusError> {
    let mut tweets = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    // Number of label columns (0, 1, or 3); None until the header is read.
    let mut label_cols: Option<usize> = None;

    for (i, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let row = i + 1;
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        if raw.is_empty() {
            continue;
        }
        let line =
            std::str::from_utf8(raw).map_err(|_| CorpusError::EncodingError { row })?;
        let fields: Vec<&str> = line.split('\t').collect();

        let n_labels = match label_cols {
            None => {
                label_cols = Some(parse_header(&fields, row)?);
                continue;
            }
            Some(n) => n,
        };

        let expect = 2 + n_labels;
        if fields.len() != expect {
            return Err(CorpusError::BadRow {
                row,
                reason: format!(
                    "expected {expect} tab-separated fields, found {}",
                    fields.len()
                ),
            });
        }

        let id = fields[0];
        if id.is_empty() {
            return Err(CorpusError::BadRow {
                row,
                reason: "empty id".into(),
            });
        }
        if !seen.insert(id.to_string()) {
            return Err(CorpusError::DuplicateId {
                row,
                id: id.to_string(),
            });
        }

        let text = fields[1];
        if text.trim().is_empty() {
            return Err(CorpusError::EmptyText { row });
        }

        let labels = match n_labels {
            0 => None,
            1 => {
                let hs = parse_bit(fields[2], row, "HS")?;
                Some(LabelSet::coerced(hs, false, false))
            }
            _ => {
                let hs = parse_bit(fields[2], row, "HS")?;
                let tr = parse_bit(fields[3], row, "TR")?;
                let ag = parse_bit(fields[4], row, "AG")?;
                if opts.coerce_labels {
                    Some(LabelSet::coerced(hs, tr, ag))
                } else {
                    match LabelSet::new(hs, tr, ag) {
                        Ok(l) => Some(l),
                        Err(_) => {
                            return Err(CorpusError::BadLabelValue {
                                row,
                                column: if tr { "TR" } else { "AG" },
                                value: "1".into(),
                                reason: "TR/AG must be 0 when HS=0",
                            })
                        }
                    }
                }
            }
        };

        tweets.push(Tweet {
            id: id.to_string(),
            text: text.to_string(),
            lang,
            labels,
        });
    }

    if label_cols.is_none() {
        return Err(CorpusError::MissingColumn("id"));
    }
    Ok(tweets)
}

/// Validates the header as a 2-, 3-, or 5-column prefix of the full schema
/// and returns the number of label columns.
fn parse_header(fields: &[&str], row: usize) -> Result<usize, CorpusError> {
    for (k, expected) in HEADER.iter().enumerate() {
        match fields.get(k) {
            Some(got) if got == expected => {}
            Some(_) | None => {
                // A well-formed prefix may stop before HS (unlabeled input)
                // or after it (subtask-A-only input), never mid-pair.
                if fields.len() == k && (k == 2 || k == 3) {
                    return Ok(k - 2);
                }
                return Err(CorpusError::MissingColumn(expected));
            }
        }
    }
    if fields.len() > HEADER.len() {
        return Err(CorpusError::BadRow {
            row,
            reason: format!("unexpected extra column {:?}", fields[HEADER.len()]),
        });
    }
    Ok(3)
}

fn parse_bit(s: &str, row: usize, column: &'static str) -> Result<bool, CorpusError> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(CorpusError::BadLabelValue {
            row,
            column,
            value: other.to_string(),
            reason: "expected 0 or 1",
        }),
    }
}

/// Serializes a dataset back to the TSV layout accepted by [`load_dataset`].
///
/// Fully labeled datasets get the 5-column layout, fully unlabeled ones the
/// 2-column layout; mixed labeling is rejected rather than silently dropped.
pub fn save_dataset(path: impl AsRef<Path>, ds: &Dataset) -> Result<(), CorpusError> {
    let labeled = ds.tweets.iter().filter(|t| t.labels.is_some()).count();
    if labeled != 0 && labeled != ds.tweets.len() {
        return Err(CorpusError::Unlabeled);
    }
    let mut out = String::new();
    if labeled == 0 {
        out.push_str("id\ttext\n");
    } else {
        out.push_str("id\ttext\tHS\tTR\tAG\n");
    }
    for (i, t) in ds.tweets.iter().enumerate() {
        if t.text.contains(['\t', '\n', '\r']) || t.id.contains(['\t', '\n', '\r']) {
            return Err(CorpusError::BadRow {
                row: i + 2,
                reason: "tabs and line breaks are not representable in TSV".into(),
            });
        }
        out.push_str(&t.id);
        out.push('\t');
        out.push_str(&t.text);
        if let Some(l) = t.labels {
            for v in l.as_array() {
                out.push('\t');
                out.push(if v { '1' } else { '0' });
            }
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Splits a labeled dataset into train/val/test, preserving per-class
/// proportions to within one tweet.
///
/// Within each class of `key`, indices are shuffled with a ChaCha stream
/// seeded from `seed` and cut at cumulative round-to-nearest boundaries.
/// Every output keeps the parent's tweet order.
pub fn stratified_split(
    ds: &Dataset,
    fractions: (f64, f64, f64),
    key: LabelDim,
    seed: u64,
) -> Result<(Dataset, Dataset, Dataset), CorpusError> {
    let (ftr, fva, fte) = fractions;
    let fracs = [ftr, fva, fte];
    if fracs.iter().any(|f| !(0.0..=1.0).contains(f)) || (ftr + fva + fte - 1.0).abs() > 1e-9 {
        return Err(CorpusError::BadFractions(ftr, fva, fte));
    }

    let labels = ds.labels_for(key)?;
    let mut groups: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        groups[l as usize].push(i);
    }

    let requested = fracs.iter().filter(|&&f| f > 0.0).count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts: [Vec<usize>; 3] = Default::default();
    for (class, idxs) in groups.iter_mut().enumerate() {
        if idxs.is_empty() {
            continue;
        }
        idxs.shuffle(&mut rng);
        let n = idxs.len();
        let nf = n as f64;
        let c1 = ((ftr * nf + 0.5).floor() as usize).min(n);
        let c2 = (((ftr + fva) * nf + 0.5).floor() as usize).clamp(c1, n);
        let counts = [c1, c2 - c1, n - c2];
        for (count, f) in counts.iter().zip(fracs) {
            if f > 0.0 && *count == 0 {
                return Err(CorpusError::ClassTooSmall {
                    dim: key.name(),
                    class: class == 1,
                    have: n,
                    need: requested,
                });
            }
        }
        parts[0].extend_from_slice(&idxs[..c1]);
        parts[1].extend_from_slice(&idxs[c1..c2]);
        parts[2].extend_from_slice(&idxs[c2..]);
    }

    let mut out = Vec::with_capacity(3);
    for (part, name) in parts.iter_mut().zip(["train", "val", "test"]) {
        part.sort_unstable();
        out.push(Dataset {
            lang: ds.lang,
            split_name: name.to_string(),
            tweets: part.iter().map(|&i| ds.tweets[i].clone()).collect(),
        });
    }
    let test = out.pop().unwrap();
    let val = out.pop().unwrap();
    let train = out.pop().unwrap();
    Ok((train, val, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled(n_pos: usize, n_neg: usize) -> Dataset {
        let mut ds = Dataset::new(Lang::En, "full");
        for i in 0..n_pos + n_neg {
            let hs = i < n_pos;
            ds.tweets.push(Tweet {
                id: format!("t{i}"),
                text: format!("tweet number {i}"),
                lang: Lang::En,
                labels: Some(LabelSet::new(hs, false, false).unwrap()),
            });
        }
        ds
    }

    #[test]
    fn parses_well_formed_tsv() {
        let tsv = b"id\ttext\tHS\tTR\tAG\n1\thello there\t0\t0\t0\n2\tyou people disgust me\t1\t0\t1\n3\tnice day\t0\t0\t0\n";
        let tweets = parse_tsv(tsv, Lang::En, LoadOptions::default()).unwrap();
        assert_eq!(tweets.len(), 3);
        assert_eq!(tweets[1].id, "2");
        assert_eq!(tweets[1].text, "you people disgust me");
        let l = tweets[1].labels.unwrap();
        assert_eq!(l.as_array(), [true, false, true]);
        assert_eq!(tweets[0].labels.unwrap().as_array(), [false; 3]);
    }

    #[test]
    fn rejects_label_invariant_violation() {
        let tsv = b"id\ttext\tHS\tTR\tAG\n1\tx y\t0\t1\t0\n";
        let err = parse_tsv(tsv, Lang::En, LoadOptions::default()).unwrap_err();
        assert!(
            matches!(err, CorpusError::BadLabelValue { row: 2, column: "TR", .. }),
            "got {err:?}"
        );
    }

    #[test]
    fn coerce_labels_repairs_invariant_violation() {
        let tsv = b"id\ttext\tHS\tTR\tAG\n1\tx y\t0\t1\t1\n";
        let opts = LoadOptions {
            coerce_labels: true,
        };
        let tweets = parse_tsv(tsv, Lang::En, opts).unwrap();
        assert_eq!(tweets[0].labels.unwrap().as_array(), [false; 3]);
    }

    #[test]
    fn rejects_non_binary_label() {
        let tsv = b"id\ttext\tHS\tTR\tAG\n1\tx\t2\t0\t0\n";
        let err = parse_tsv(tsv, Lang::En, LoadOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            CorpusError::BadLabelValue {
                row: 2,
                column: "HS",
                ..
            }
        ));
    }

    #[test]
    fn rejects_truncated_header() {
        let tsv = b"id\ttext\tHS\tTR\n1\tx\t0\t0\n";
        let err = parse_tsv(tsv, Lang::En, LoadOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::MissingColumn("AG")));
    }

    #[test]
    fn accepts_unlabeled_and_hs_only_headers() {
        let two = parse_tsv(b"id\ttext\n1\thi all\n", Lang::En, LoadOptions::default()).unwrap();
        assert_eq!(two[0].labels, None);

        let three =
            parse_tsv(b"id\ttext\tHS\n1\thi all\t1\n", Lang::En, LoadOptions::default()).unwrap();
        assert_eq!(three[0].labels.unwrap().as_array(), [true, false, false]);
    }

    #[test]
    fn rejects_duplicate_ids_and_empty_text() {
        let dup = b"id\ttext\tHS\tTR\tAG\n1\ta b\t0\t0\t0\n1\tc d\t0\t0\t0\n";
        let err = parse_tsv(dup, Lang::En, LoadOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId { row: 3, .. }));

        let blank = b"id\ttext\tHS\tTR\tAG\n1\t   \t0\t0\t0\n";
        let err = parse_tsv(blank, Lang::En, LoadOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::EmptyText { row: 2 }));
    }

    #[test]
    fn rejects_wrong_field_count_and_bad_utf8() {
        let short = b"id\ttext\tHS\tTR\tAG\n1\tonly text\n";
        let err = parse_tsv(short, Lang::En, LoadOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::BadRow { row: 2, .. }));

        let bad = b"id\ttext\n1\thi \xff there\n";
        let err = parse_tsv(bad, Lang::En, LoadOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::EncodingError { row: 2 }));
    }

    #[test]
    fn save_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.tsv");
        let tsv = b"id\ttext\tHS\tTR\tAG\n10\t@user you're all vermin \xf0\x9f\x98\xa1\t1\t1\t1\n11\tlovely weather innit\t0\t0\t0\n";
        let orig = parse_tsv(tsv, Lang::En, LoadOptions::default()).unwrap();
        let ds = Dataset {
            lang: Lang::En,
            split_name: "ds".into(),
            tweets: orig,
        };
        save_dataset(&path, &ds).unwrap();
        let reloaded = load_dataset(&path, Lang::En).unwrap();
        assert_eq!(reloaded, ds);
        // And the bytes themselves stabilize after one round trip.
        let bytes = fs::read(&path).unwrap();
        assert_eq!(bytes, tsv);
    }

    #[test]
    fn save_rejects_mixed_labeling() {
        let mut ds = labeled(1, 1);
        ds.tweets[1].labels = None;
        let dir = tempfile::tempdir().unwrap();
        let err = save_dataset(dir.path().join("x.tsv"), &ds).unwrap_err();
        assert!(matches!(err, CorpusError::Unlabeled));
    }

    #[test]
    fn split_is_stratified_and_deterministic() {
        let ds = labeled(50, 50);
        let (tr, va, te) = stratified_split(&ds, (0.8, 0.1, 0.1), LabelDim::Hs, 7).unwrap();
        assert_eq!((tr.len(), va.len(), te.len()), (80, 10, 10));
        let pos = |d: &Dataset| d.tweets.iter().filter(|t| t.labels.unwrap().hs()).count();
        assert!((39..=41).contains(&pos(&tr)), "train pos = {}", pos(&tr));
        assert_eq!(pos(&va), 5);
        assert_eq!(pos(&te), 5);

        let again = stratified_split(&ds, (0.8, 0.1, 0.1), LabelDim::Hs, 7).unwrap();
        assert_eq!((tr, va, te), again);
    }

    #[test]
    fn identity_split_keeps_everything_in_train() {
        let ds = labeled(3, 2);
        let (tr, va, te) = stratified_split(&ds, (1.0, 0.0, 0.0), LabelDim::Hs, 0).unwrap();
        assert_eq!(tr.len(), 5);
        assert!(va.is_empty() && te.is_empty());
        // Order restored to the parent's order.
        let ids: Vec<&str> = tr.tweets.iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, ["t0", "t1", "t2", "t3", "t4"]);
    }

    #[test]
    fn split_rejects_bad_fractions_and_tiny_classes() {
        let ds = labeled(10, 10);
        assert!(matches!(
            stratified_split(&ds, (0.5, 0.2, 0.2), LabelDim::Hs, 0),
            Err(CorpusError::BadFractions(..))
        ));
        assert!(matches!(
            stratified_split(&ds, (-0.5, 1.5, 0.0), LabelDim::Hs, 0),
            Err(CorpusError::BadFractions(..))
        ));

        let tiny = labeled(8, 1);
        assert!(matches!(
            stratified_split(&tiny, (0.4, 0.3, 0.3), LabelDim::Hs, 0),
            Err(CorpusError::ClassTooSmall { class: false, .. })
        ));
    }

    #[test]
    fn splits_partition_the_input() {
        for seed in 0..5u64 {
            let ds = labeled(37, 63);
            let (tr, va, te) = stratified_split(&ds, (0.7, 0.2, 0.1), LabelDim::Hs, seed).unwrap();
            let mut ids: Vec<&str> = tr
                .tweets
                .iter()
                .chain(&va.tweets)
                .chain(&te.tweets)
                .map(|t| t.id.as_str())
                .collect();
            assert_eq!(ids.len(), 100);
            ids.sort_unstable();
            ids.dedup();
            assert_eq!(ids.len(), 100, "splits overlap for seed {seed}");
        }
    }

    #[test]
    fn split_class_rates_stay_close_to_full_rate() {
        let ds = labeled(42, 158);
        let full_rate = 0.21;
        let (tr, va, te) = stratified_split(&ds, (0.6, 0.2, 0.2), LabelDim::Hs, 3).unwrap();
        for d in [&tr, &va, &te] {
            let pos = d.tweets.iter().filter(|t| t.labels.unwrap().hs()).count();
            let rate = pos as f64 / d.len() as f64;
            assert!(
                (rate - full_rate).abs() <= 1.0 / d.len() as f64 + 1e-12,
                "{}: rate {rate} vs {full_rate}",
                d.split_name
            );
        }
    }
}
