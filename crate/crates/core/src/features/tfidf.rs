//! N-gram TF-IDF, taken literally from the usual formulas:
//! `TF(t) = count(t, doc) / total n-grams in doc` and `IDF(t) = ln(N / df(t))`
//! with no smoothing. `min_df` (default 2 upstream) keeps the vocabulary from
//! filling up with hapax n-grams.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::textprep::TokenSequence;

use super::{FeatureError, SparseVector};

/// Fitted n-gram vocabulary with one IDF weight per column. Columns are
/// assigned in lexicographic n-gram order, so a refit on the same corpus is
/// bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    idf: Vec<f64>,
    n_range: (usize, usize),
    doc_count: usize,
}

impl Vocabulary {
    /// Number of columns.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_range(&self) -> (usize, usize) {
        self.n_range
    }

    /// Documents seen at fit time.
    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn index_of(&self, ngram: &str) -> Option<usize> {
        self.index.get(ngram).copied()
    }

    /// N-gram text for a column.
    pub fn term(&self, column: usize) -> &str {
        &self.terms[column]
    }

    pub fn idf(&self, column: usize) -> f64 {
        self.idf[column]
    }

    /// `(term, column, idf)` rows in column order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, usize, f64)> {
        self.terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i, self.idf[i]))
    }

    /// TF-IDF transform of one document. Out-of-vocabulary n-grams still
    /// count toward the TF denominator but produce no column.
    pub fn transform(&self, doc: &TokenSequence) -> SparseVector {
        let mut total = 0usize;
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for_each_ngram(&doc.tokens, self.n_range, |gram| {
            total += 1;
            if let Some(&col) = self.index.get(gram) {
                *counts.entry(col).or_insert(0) += 1;
            }
        });
        if total == 0 {
            return SparseVector::default();
        }
        let pairs = counts
            .into_iter()
            .map(|(col, count)| (col, count as f64 / total as f64 * self.idf[col]))
            .collect();
        SparseVector::new(pairs)
    }

    /// Versioned text serialization: a header line followed by
    /// `ngram<TAB>index<TAB>idf` rows in column order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "hwk.vocab.v1\t{}\t{}\t{}",
            self.n_range.0, self.n_range.1, self.doc_count
        );
        for (term, col, idf) in self.iter() {
            let _ = writeln!(out, "{term}\t{col}\t{idf}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, FeatureError> {
        let bad = |msg: String| FeatureError::BadVocabFile(msg);
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let fields: Vec<&str> = header.split('\t').collect();
        if fields.len() != 4 || fields[0] != "hwk.vocab.v1" {
            return Err(bad(format!("unrecognized header {header:?}")));
        }
        let parse = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|_| bad(format!("bad {what} {s:?} in header")))
        };
        let n_range = (parse(fields[1], "min_n")?, parse(fields[2], "max_n")?);
        let doc_count = parse(fields[3], "doc_count")?;

        let mut terms = Vec::new();
        let mut index = HashMap::new();
        let mut idf = Vec::new();
        for (row, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(bad(format!("row {}: expected 3 columns", row + 2)));
            }
            let col: usize = cols[1]
                .parse()
                .map_err(|_| bad(format!("row {}: bad index {:?}", row + 2, cols[1])))?;
            if col != terms.len() {
                return Err(bad(format!(
                    "row {}: index {} out of order (expected {})",
                    row + 2,
                    col,
                    terms.len()
                )));
            }
            let weight: f64 = cols[2]
                .parse()
                .map_err(|_| bad(format!("row {}: bad idf {:?}", row + 2, cols[2])))?;
            if !weight.is_finite() || weight < 0.0 {
                return Err(bad(format!("row {}: idf {} out of range", row + 2, weight)));
            }
            if index.insert(cols[0].to_string(), col).is_some() {
                return Err(bad(format!("row {}: duplicate term {:?}", row + 2, cols[0])));
            }
            terms.push(cols[0].to_string());
            idf.push(weight);
        }
        Ok(Vocabulary { terms, index, idf, n_range, doc_count })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), FeatureError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FeatureError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Visits every n-gram of `tokens` for n in `n_range`, as a space-joined key.
fn for_each_ngram(tokens: &[String], n_range: (usize, usize), mut f: impl FnMut(&str)) {
    let mut buf = String::new();
    for n in n_range.0..=n_range.1 {
        if n == 0 || n > tokens.len() {
            continue;
        }
        for window in tokens.windows(n) {
            buf.clear();
            for (k, tok) in window.iter().enumerate() {
                if k > 0 {
                    buf.push(' ');
                }
                buf.push_str(tok);
            }
            f(&buf);
        }
    }
}

/// Fits a vocabulary over every n-gram (n in `n_range`) that appears in at
/// least `min_df` documents.
pub fn fit_tfidf(
    corpus: &[TokenSequence],
    n_range: (usize, usize),
    min_df: usize,
) -> Result<Vocabulary, FeatureError> {
    if corpus.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    if n_range.0 < 1 || n_range.0 > n_range.1 || n_range.1 > 5 {
        return Err(FeatureError::BadNgramRange(n_range.0, n_range.1));
    }
    let min_df = min_df.max(1);

    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in corpus {
        let mut grams: Vec<String> = Vec::new();
        for_each_ngram(&doc.tokens, n_range, |gram| grams.push(gram.to_string()));
        grams.sort_unstable();
        grams.dedup();
        for gram in grams {
            *df.entry(gram).or_insert(0) += 1;
        }
    }

    let n_docs = corpus.len() as f64;
    let mut terms = Vec::new();
    let mut index = HashMap::new();
    let mut idf = Vec::new();
    for (gram, count) in df {
        if count >= min_df {
            index.insert(gram.clone(), terms.len());
            terms.push(gram);
            idf.push((n_docs / count as f64).ln());
        }
    }
    Ok(Vocabulary { terms, index, idf, n_range, doc_count: corpus.len() })
}

/// Free-function form of [`Vocabulary::transform`].
pub fn transform_tfidf(doc: &TokenSequence, vocab: &Vocabulary) -> SparseVector {
    vocab.transform(doc)
}
