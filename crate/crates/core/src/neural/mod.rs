//! The two neural classifiers at desk scale: a word-level bidirectional GRU
//! and a character-level CNN, together with their input encoders (frequency
//! vocabulary, 1-of-m character quantizer), parameter checkpoints and the
//! batched Adam training loop.
//!
//! Both networks are built on the [`crate::autodiff`] tape. A forward pass
//! exists in two forms: a graph builder (`*_graph`) that appends onto a
//! caller-supplied tape — used by training and gradient checking — and a
//! plain inference wrapper (`*_forward`) that owns its tape and returns the
//! class probabilities.
//!
//! Paper-scale hyper-parameters (embedding 400, hidden 100 per direction,
//! 256 filters of width 7) are available via `paper()` constructors; the
//! `desk()` presets shrink every width so the full suite, including
//! finite-difference checks of both models, runs in seconds.

mod bigru;
mod charcnn;
mod train;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use thiserror::Error;

pub use bigru::{bigru_forward, bigru_graph, gru_params};
pub use charcnn::{charcnn_forward, charcnn_graph, cnn_params};
pub use train::{
    evaluate_over_seeds, train_bigru, train_charcnn, train_classifier, EpochStats, Net,
    RunSummary, TrainOptions, TrainResult,
};

use crate::autodiff::{AutodiffError, Tape, Var};
use crate::par::derive_seed;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("parameter `{0}` missing from the parameter set")]
    MissingParam(String),
    #[error("empty {0} set")]
    EmptyData(&'static str),
    #[error("{inputs} inputs vs {labels} labels")]
    LengthMismatch { inputs: usize, labels: usize },
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Whether a forward pass applies dropout. Training passes carry a
/// per-sample seed; every dropout site derives its own stream from it.
#[derive(Debug, Clone, Copy)]
pub enum Phase {
    Train { seed: u64 },
    Eval,
}

impl Phase {
    /// (seed, active) pair for the dropout call at `layer`.
    pub(crate) fn dropout_args(self, layer: u64) -> (u64, bool) {
        match self {
            Phase::Train { seed } => (derive_seed(seed, layer), true),
            Phase::Eval => (0, false),
        }
    }
}

/// The 33 symbol characters of the default alphabet, in row order. The
/// published list repeats `-`, leaving 32 distinct ASCII symbols; the curly
/// apostrophe (U+2019), ubiquitous in tweets, fills the 33rd slot.
const SYMBOLS: &str = "-,;.!?:'\"/\\|_@#$%^&*~`+=<>()[]{}\u{2019}";

fn default_alphabet() -> Vec<char> {
    let mut chars: Vec<char> = ('a'..='z').collect();
    chars.extend('0'..='9');
    chars.extend(SYMBOLS.chars());
    chars.push('\n');
    chars
}

/// 1-of-m character encoder: 70 rows (26 lowercase letters, 10 digits, 33
/// symbols, newline) by `max_len` columns. Quantization order is backward —
/// the last character of the text lands in column 0, so the latest reading
/// always sits near the beginning of the output. No case folding is applied;
/// uppercase letters fall outside the alphabet and encode as zero columns.
#[derive(Debug, Clone)]
pub struct CharQuantizer {
    alphabet: Vec<char>,
    index: HashMap<char, usize>,
    max_len: usize,
}

impl Default for CharQuantizer {
    fn default() -> Self {
        Self::with_len(140).expect("default alphabet is duplicate-free")
    }
}

impl CharQuantizer {
    /// Default 70-character alphabet with a custom window length.
    pub fn with_len(max_len: usize) -> Result<Self, NeuralError> {
        Self::with_alphabet(default_alphabet(), max_len)
    }

    pub fn with_alphabet(
        alphabet: impl IntoIterator<Item = char>,
        max_len: usize,
    ) -> Result<Self, NeuralError> {
        if max_len == 0 {
            return Err(NeuralError::BadConfig("quantizer window must be non-empty".into()));
        }
        let alphabet: Vec<char> = alphabet.into_iter().collect();
        if alphabet.is_empty() {
            return Err(NeuralError::BadConfig("empty alphabet".into()));
        }
        let mut index = HashMap::with_capacity(alphabet.len());
        for (i, &c) in alphabet.iter().enumerate() {
            if index.insert(c, i).is_some() {
                return Err(NeuralError::BadConfig(format!("duplicate alphabet character {c:?}")));
            }
        }
        Ok(CharQuantizer { alphabet, index, max_len })
    }

    /// Alphabet size m (the number of rows).
    pub fn m(&self) -> usize {
        self.alphabet.len()
    }

    /// Window length L (the number of columns).
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    /// Row index of `c`, or `None` when it is outside the alphabet.
    pub fn row(&self, c: char) -> Option<usize> {
        self.index.get(&c).copied()
    }

    /// Encode `text` as an m × L one-hot matrix (row-major). The last
    /// character occupies column 0; characters earlier than the final L are
    /// dropped; out-of-alphabet characters (blanks included) leave their
    /// column all zero.
    pub fn quantize(&self, text: &str) -> Vec<f64> {
        let l = self.max_len;
        let mut out = vec![0.0; self.alphabet.len() * l];
        for (col, ch) in text.chars().rev().take(l).enumerate() {
            if let Some(row) = self.row(ch) {
                out[row * l + col] = 1.0;
            }
        }
        out
    }
}

/// Frequency-ranked word index for the GRU: id 0 is reserved for padding,
/// id 1 for unknown tokens, and vocabulary words get ids from 2 in order of
/// descending training-split count (ties broken lexicographically).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordVocab {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl WordVocab {
    pub const PAD: usize = 0;
    pub const UNK: usize = 1;

    /// Build from tokenized documents, optionally keeping only the `cap`
    /// most frequent words.
    pub fn build<'a, I>(docs: I, cap: Option<usize>) -> Self
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        let mut order: Vec<&str> = Vec::new();
        for doc in docs {
            for token in doc {
                let slot = counts.entry(token.as_str()).or_insert(0);
                if *slot == 0 {
                    order.push(token.as_str());
                }
                *slot += 1;
            }
        }
        order.sort_unstable_by(|a, b| counts[b].cmp(&counts[a]).then(a.cmp(b)));
        if let Some(cap) = cap {
            order.truncate(cap);
        }
        let words: Vec<String> = order.into_iter().map(str::to_owned).collect();
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i + 2)).collect();
        WordVocab { words, index }
    }

    /// Total id count, padding and unknown included — the embedding row
    /// count a [`GruHyper`] should use.
    pub fn size(&self) -> usize {
        self.words.len() + 2
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(Self::UNK)
    }

    /// Fixed-length id sequence: the first `seq_len` tokens, right-padded
    /// with [`Self::PAD`].
    pub fn encode(&self, tokens: &[String], seq_len: usize) -> Vec<usize> {
        let mut ids: Vec<usize> =
            tokens.iter().take(seq_len).map(|t| self.id(t)).collect();
        ids.resize(seq_len, Self::PAD);
        ids
    }
}

/// Bidirectional-GRU hyper-parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GruHyper {
    pub vocab_size: usize,
    pub seq_len: usize,
    pub embed_dim: usize,
    /// Hidden units per direction.
    pub hidden: usize,
    /// Widths of the two dense layers between the GRU and the softmax head.
    pub dense: [usize; 2],
    pub dropout: f64,
    pub batch: usize,
    pub classes: usize,
}

impl GruHyper {
    /// Published configuration: embedding 400, 100 hidden units per
    /// direction, dense 64 → 32, dropout 0.2, batches of 32.
    pub fn paper(vocab_size: usize) -> Self {
        GruHyper {
            vocab_size,
            seq_len: 140,
            embed_dim: 400,
            hidden: 100,
            dense: [64, 32],
            dropout: 0.2,
            batch: 32,
            classes: 2,
        }
    }

    /// Shrunk widths for tests and finite-difference checks.
    pub fn desk(vocab_size: usize) -> Self {
        GruHyper {
            vocab_size,
            seq_len: 12,
            embed_dim: 8,
            hidden: 4,
            dense: [8, 4],
            dropout: 0.2,
            batch: 8,
            classes: 2,
        }
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        let bad = |what: &str| Err(NeuralError::BadConfig(what.into()));
        if self.vocab_size < 2 {
            return bad("vocab_size must cover padding and unknown ids");
        }
        if self.seq_len == 0 || self.embed_dim == 0 || self.hidden == 0 {
            return bad("seq_len, embed_dim and hidden must be positive");
        }
        if self.dense.iter().any(|&d| d == 0) {
            return bad("dense widths must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if self.batch == 0 {
            return bad("batch must be positive");
        }
        if self.classes < 2 {
            return bad("classes must be at least 2");
        }
        Ok(())
    }
}

/// Character-CNN hyper-parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnHyper {
    /// Alphabet size (input channels).
    pub m: usize,
    /// Window length (input sequence length).
    pub l: usize,
    pub conv_layers: usize,
    pub filters: usize,
    pub kernel: usize,
    pub pool: usize,
    /// Widths of the two dense layers between the flatten and the softmax
    /// head.
    pub dense: [usize; 2],
    pub dropout: f64,
    pub batch: usize,
    pub classes: usize,
}

impl CnnHyper {
    /// Published configuration: three conv layers of 256 width-7 filters,
    /// each followed by a width-3 max-pool; dense 512 → 256.
    pub fn paper() -> Self {
        CnnHyper {
            m: 70,
            l: 140,
            conv_layers: 3,
            filters: 256,
            kernel: 7,
            pool: 3,
            dense: [512, 256],
            dropout: 0.2,
            batch: 32,
            classes: 2,
        }
    }

    /// Shrunk configuration over a 20-character window (two width-3 conv
    /// layers of 8 filters, width-2 pools).
    pub fn desk() -> Self {
        CnnHyper {
            m: 70,
            l: 20,
            conv_layers: 2,
            filters: 8,
            kernel: 3,
            pool: 2,
            dense: [8, 4],
            dropout: 0.2,
            batch: 8,
            classes: 2,
        }
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        let bad = |what: &str| Err(NeuralError::BadConfig(what.into()));
        if self.m == 0 || self.l == 0 {
            return bad("alphabet size and window length must be positive");
        }
        if self.conv_layers == 0 || self.filters == 0 || self.kernel == 0 || self.pool == 0 {
            return bad("conv_layers, filters, kernel and pool must be positive");
        }
        if self.dense.iter().any(|&d| d == 0) {
            return bad("dense widths must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if self.batch == 0 {
            return bad("batch must be positive");
        }
        if self.classes < 2 {
            return bad("classes must be at least 2");
        }
        cnn_length_trace(self)?;
        Ok(())
    }
}

/// Sequence lengths after each conv (valid, stride 1) and pool (floor)
/// stage: `2 · conv_layers` entries. Errs when any stage would produce an
/// empty sequence; the paper geometry gives `[134, 44, 38, 12, 6, 2]`.
pub fn cnn_length_trace(h: &CnnHyper) -> Result<Vec<usize>, NeuralError> {
    let mut len = h.l;
    let mut trace = Vec::with_capacity(2 * h.conv_layers);
    for layer in 0..h.conv_layers {
        if len < h.kernel {
            return Err(NeuralError::BadConfig(format!(
                "conv layer {layer}: length {len} shorter than kernel {}",
                h.kernel
            )));
        }
        len = len - h.kernel + 1;
        trace.push(len);
        len /= h.pool;
        if len == 0 {
            return Err(NeuralError::BadConfig(format!(
                "pool after conv layer {layer} empties the sequence"
            )));
        }
        trace.push(len);
    }
    Ok(trace)
}

/// Named, shape-tagged parameter buffers in a fixed order. The order is the
/// binding order on a tape and the checkpoint line order, so gradients,
/// optimizer state and serialized form all line up positionally.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet {
    entries: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
}

const PARAMS_HEADER: &str = "hwk.params.v1";

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(
        &mut self,
        name: &str,
        shape: &[usize],
        data: Vec<f64>,
    ) -> Result<(), NeuralError> {
        if name.is_empty() || name.contains(['\t', '\n']) {
            return Err(NeuralError::BadConfig(format!("bad parameter name {name:?}")));
        }
        if self.entries.iter().any(|e| e.name == name) {
            return Err(NeuralError::BadConfig(format!("duplicate parameter name `{name}`")));
        }
        if shape.is_empty() || shape.contains(&0) {
            return Err(NeuralError::BadConfig(format!("bad shape {shape:?} for `{name}`")));
        }
        if shape.iter().product::<usize>() != data.len() {
            return Err(NeuralError::BadConfig(format!(
                "shape {shape:?} does not match {} values for `{name}`",
                data.len()
            )));
        }
        self.entries.push(Entry { name: name.to_owned(), shape: shape.to_vec(), data });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<(&[usize], &[f64])> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .map(|e| (e.shape.as_slice(), e.data.as_slice()))
    }

    /// Mutable view of one buffer's values; the shape stays fixed.
    pub fn data_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        self.entries
            .iter_mut()
            .find(|e| e.name == name)
            .map(|e| e.data.as_mut_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[usize], &[f64])> {
        self.entries.iter().map(|e| (e.name.as_str(), e.shape.as_slice(), e.data.as_slice()))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &[usize], &mut [f64])> {
        self.entries
            .iter_mut()
            .map(|e| (e.name.as_str(), e.shape.as_slice(), e.data.as_mut_slice()))
    }

    /// Set every value to zero (keeps names and shapes).
    pub fn zero(&mut self) {
        for e in &mut self.entries {
            e.data.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    /// Push every buffer onto `tape` as a trainable parameter, in order.
    pub fn bind(&self, tape: &Tape) -> Result<Bound, NeuralError> {
        let mut map = HashMap::with_capacity(self.entries.len());
        for e in &self.entries {
            let var = tape.param(&e.shape, e.data.clone())?;
            map.insert(e.name.clone(), var);
        }
        Ok(Bound { map })
    }

    /// Pair already-created tape variables (in this set's order) with the
    /// parameter names — the bridge into [`crate::autodiff::gradcheck`],
    /// which owns variable creation.
    pub fn bind_vars(&self, vars: &[Var]) -> Result<Bound, NeuralError> {
        if vars.len() != self.entries.len() {
            return Err(NeuralError::BadConfig(format!(
                "{} variables for {} parameters",
                vars.len(),
                self.entries.len()
            )));
        }
        let map =
            self.entries.iter().zip(vars).map(|(e, &v)| (e.name.clone(), v)).collect();
        Ok(Bound { map })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{PARAMS_HEADER}\n{}\n", self.entries.len());
        for e in &self.entries {
            out.push_str(&e.name);
            out.push('\t');
            for (i, d) in e.shape.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{d}");
            }
            out.push('\t');
            for (i, v) in e.data.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, NeuralError> {
        let bad = |what: String| NeuralError::BadCheckpoint(what);
        let mut lines = text.lines();
        match lines.next() {
            Some(PARAMS_HEADER) => {}
            other => return Err(bad(format!("expected `{PARAMS_HEADER}`, found {other:?}"))),
        }
        let count: usize = lines
            .next()
            .ok_or_else(|| bad("missing buffer count".into()))?
            .trim()
            .parse()
            .map_err(|e| bad(format!("bad buffer count: {e}")))?;
        let mut set = ParamSet::new();
        for i in 0..count {
            let line = lines.next().ok_or_else(|| bad(format!("missing buffer {i}")))?;
            let mut fields = line.split('\t');
            let (name, shape, values) = match (fields.next(), fields.next(), fields.next(), fields.next())
            {
                (Some(n), Some(s), Some(v), None) => (n, s, v),
                _ => return Err(bad(format!("buffer {i}: expected name\\tshape\\tvalues"))),
            };
            let shape: Vec<usize> = shape
                .split(' ')
                .map(|d| d.parse().map_err(|e| bad(format!("buffer `{name}`: bad dim: {e}"))))
                .collect::<Result<_, _>>()?;
            let data: Vec<f64> = values
                .split(' ')
                .map(|v| v.parse().map_err(|e| bad(format!("buffer `{name}`: bad value: {e}"))))
                .collect::<Result<_, _>>()?;
            if data.iter().any(|v: &f64| !v.is_finite()) {
                return Err(bad(format!("buffer `{name}`: non-finite value")));
            }
            set.push(name, &shape, data)
                .map_err(|e| bad(format!("buffer `{name}`: {e}")))?;
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(bad("trailing content after final buffer".into()));
        }
        Ok(set)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NeuralError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NeuralError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Parameter buffers bound onto one tape, addressed by name.
#[derive(Debug, Clone)]
pub struct Bound {
    map: HashMap<String, Var>,
}

impl Bound {
    pub fn get(&self, name: &str) -> Result<Var, NeuralError> {
        self.map
            .get(name)
            .copied()
            .ok_or_else(|| NeuralError::MissingParam(name.to_owned()))
    }
}

/// Glorot-uniform draw: U(−a, a) with `a = √(6 / (fan_in + fan_out))`.
pub(crate) fn glorot(
    rng: &mut impl Rng,
    fan_in: usize,
    fan_out: usize,
    n: usize,
) -> Vec<f64> {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| rng.gen_range(-a..a)).collect()
}

/// `x · W + b` for the parameter pair `{name}.w`, `{name}.b`.
pub(crate) fn dense_layer(
    tape: &Tape,
    p: &Bound,
    name: &str,
    x: Var,
) -> Result<Var, NeuralError> {
    let w = p.get(&format!("{name}.w"))?;
    let b = p.get(&format!("{name}.b"))?;
    Ok(tape.add_rowwise(tape.matmul(x, w)?, b)?)
}
