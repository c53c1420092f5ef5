//! Linear classifiers: logistic regression and linear SVM (hinge loss) with
//! L1/L2 regularization, trained by seeded stochastic subgradient descent on
//! the objective
//!
//! ```text
//! J(w, b) = (1/n) Σ loss(yᵢ, w·xᵢ + b) + (1/C) R(w)
//! ```
//!
//! with `R = ½‖w‖²` (L2) or `‖w‖₁` (L1). The bias is never regularized.
//! L2 models return the Polyak-averaged iterate; L1 models return the last
//! proximal iterate, whose thresholded steps produce exact zeros. One-vs-rest
//! stacking, stratified k-fold cross-validation and grid search sit on top.
//!
//! Probabilities: logistic models apply the sigmoid to the margin directly;
//! hinge models apply a calibrated link `σ(a·m)` whose scale `a > 0` is
//! fitted on a held-out tenth of the training data, so argmax decisions
//! always agree with the sign of the raw margin.

mod cv;
mod sgd;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

pub use cv::{default_grid, grid_search_cv, stratified_kfold, CVResult, GridPoint, GridSearchResult};

use crate::features::{SparseVector, Vocabulary};
use crate::par::{self, derive_seed};

#[derive(Debug, Error)]
pub enum LinearError {
    #[error("training data contains a single class")]
    SingleClass,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("L1 selection zeroed every feature; widen the C grid")]
    AllZero,
    #[error("class {class} has {have} samples, need at least {need} for stratification")]
    ClassTooSmall { class: usize, have: usize, need: usize },
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("empty parameter grid")]
    EmptyGrid,
    #[error("model file: {0}")]
    BadModelFile(String),
    #[error("model was fitted against a different vocabulary (checksum {expected:016x}, current {got:016x})")]
    VocabMismatch { expected: u64, got: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Loss {
    Logistic,
    Hinge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Penalty {
    L1,
    L2,
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Loss::Logistic => "logistic",
            Loss::Hinge => "hinge",
        })
    }
}

impl FromStr for Loss {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "logistic" => Ok(Loss::Logistic),
            "hinge" => Ok(Loss::Hinge),
            other => Err(format!("unknown loss {other:?}")),
        }
    }
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Penalty::L1 => "l1",
            Penalty::L2 => "l2",
        })
    }
}

impl FromStr for Penalty {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "l1" => Ok(Penalty::L1),
            "l2" => Ok(Penalty::L2),
            other => Err(format!("unknown penalty {other:?}")),
        }
    }
}

/// Training hyper-parameters. The learning rate follows
/// `η_t = η₀ / (1 + η₀·t/C)`; `η₀` is clamped to `C/2` so the L2 shrink
/// factor `1 − η·λ` stays positive.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub loss: Loss,
    pub penalty: Penalty,
    pub c: f64,
    pub seed: u64,
    pub epochs: usize,
    pub eta0: f64,
    /// Feature dimensionality; inferred from the data when `None`.
    pub dim: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            loss: Loss::Logistic,
            penalty: Penalty::L2,
            c: 0.1,
            seed: 42,
            epochs: 30,
            eta0: 0.5,
            dim: None,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), LinearError> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(LinearError::BadConfig(format!("C must be positive, got {}", self.c)));
        }
        if self.epochs == 0 {
            return Err(LinearError::BadConfig("epochs must be at least 1".into()));
        }
        if !(self.eta0 > 0.0 && self.eta0.is_finite()) {
            return Err(LinearError::BadConfig(format!("eta0 must be positive, got {}", self.eta0)));
        }
        Ok(())
    }
}

/// A fitted binary linear classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub loss: Loss,
    pub penalty: Penalty,
    pub c: f64,
    /// Class names, negative first. Purely descriptive.
    pub classes: [String; 2],
    /// Sigmoid scale for hinge margins; `None` for logistic models.
    pub calibration: Option<f64>,
    /// FNV-1a checksum of the vocabulary this model was fitted against.
    pub vocab_checksum: Option<u64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    fn check_dim(&self, x: &SparseVector) -> Result<(), LinearError> {
        if let Some(&(i, _)) = x.pairs().last() {
            if i >= self.weights.len() {
                return Err(LinearError::DimensionMismatch {
                    expected: self.weights.len(),
                    got: i + 1,
                });
            }
        }
        Ok(())
    }

    /// Raw margin `w·x + b`.
    pub fn decision(&self, x: &SparseVector) -> Result<f64, LinearError> {
        self.check_dim(x)?;
        Ok(x.dot(&self.weights) + self.bias)
    }

    /// `[p(class 0), p(class 1)]`, summing to 1. The argmax always agrees
    /// with the sign of the margin; an exact 0.5/0.5 tie resolves to class 0.
    pub fn predict_proba(&self, x: &SparseVector) -> Result<[f64; 2], LinearError> {
        let m = self.decision(x)?;
        let p = match self.loss {
            Loss::Logistic => sigmoid(m),
            Loss::Hinge => sigmoid(self.calibration.unwrap_or(1.0) * m),
        };
        Ok([1.0 - p, p])
    }

    pub fn predict(&self, x: &SparseVector) -> Result<bool, LinearError> {
        let p = self.predict_proba(x)?;
        Ok(p[1] > p[0])
    }

    /// Records the vocabulary this model belongs to.
    pub fn bind_vocab(&mut self, vocab: &Vocabulary) {
        self.vocab_checksum = Some(vocab_checksum(vocab));
    }

    /// Errs when the model was bound to a different vocabulary.
    pub fn verify_vocab(&self, vocab: &Vocabulary) -> Result<(), LinearError> {
        if let Some(expected) = self.vocab_checksum {
            let got = vocab_checksum(vocab);
            if expected != got {
                return Err(LinearError::VocabMismatch { expected, got });
            }
        }
        Ok(())
    }

    /// Versioned text serialization.
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        out.push_str("hwk.linear.v1\n");
        let _ = writeln!(out, "loss\t{}", self.loss);
        let _ = writeln!(out, "penalty\t{}", self.penalty);
        let _ = writeln!(out, "c\t{}", self.c);
        let _ = writeln!(out, "classes\t{} {}", self.classes[0], self.classes[1]);
        let _ = writeln!(out, "bias\t{}", self.bias);
        match self.calibration {
            Some(a) => { let _ = writeln!(out, "calibration\t{a}"); }
            None => out.push_str("calibration\tnone\n"),
        }
        match self.vocab_checksum {
            Some(cs) => { let _ = writeln!(out, "vocab_checksum\t{cs:016x}"); }
            None => out.push_str("vocab_checksum\tnone\n"),
        }
        let _ = writeln!(out, "dim\t{}", self.weights.len());
        out.push_str("weights\t");
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{w}");
        }
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<Self, LinearError> {
        let bad = |msg: String| LinearError::BadModelFile(msg);
        let mut lines = text.lines();
        match lines.next() {
            Some("hwk.linear.v1") => {}
            other => return Err(bad(format!("unrecognized header {other:?}"))),
        }
        let mut field = |name: &str| -> Result<String, LinearError> {
            let line = lines.next().ok_or_else(|| bad(format!("missing field {name}")))?;
            let (key, value) = line
                .split_once('\t')
                .ok_or_else(|| bad(format!("malformed line {line:?}")))?;
            if key != name {
                return Err(bad(format!("expected field {name}, found {key}")));
            }
            Ok(value.to_string())
        };

        let loss: Loss = field("loss")?.parse().map_err(bad)?;
        let penalty: Penalty = field("penalty")?.parse().map_err(bad)?;
        let c: f64 = field("c")?.parse().map_err(|_| bad("bad C".into()))?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(bad(format!("C {c} out of range")));
        }
        let classes_raw = field("classes")?;
        let mut names = classes_raw.split(' ');
        let classes = [
            names.next().unwrap_or_default().to_string(),
            names.next().ok_or_else(|| bad("expected two class names".into()))?.to_string(),
        ];
        if names.next().is_some() {
            return Err(bad("expected exactly two class names".into()));
        }
        let bias: f64 = field("bias")?.parse().map_err(|_| bad("bad bias".into()))?;
        let calibration = match field("calibration")?.as_str() {
            "none" => None,
            s => {
                let a: f64 = s.parse().map_err(|_| bad("bad calibration".into()))?;
                if !(a > 0.0 && a.is_finite()) {
                    return Err(bad(format!("calibration {a} out of range")));
                }
                Some(a)
            }
        };
        let vocab_checksum = match field("vocab_checksum")?.as_str() {
            "none" => None,
            s => Some(u64::from_str_radix(s, 16).map_err(|_| bad("bad checksum".into()))?),
        };
        let dim: usize = field("dim")?.parse().map_err(|_| bad("bad dim".into()))?;
        let weights_raw = field("weights")?;
        let weights: Vec<f64> = if weights_raw.is_empty() {
            Vec::new()
        } else {
            weights_raw
                .split(' ')
                .map(|s| s.parse::<f64>().map_err(|_| bad(format!("bad weight {s:?}"))))
                .collect::<Result<_, _>>()?
        };
        if weights.len() != dim {
            return Err(bad(format!("dim says {dim} but {} weights follow", weights.len())));
        }
        if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
            return Err(bad("non-finite parameter".into()));
        }
        if lines.next().is_some() {
            return Err(bad("trailing content after weights".into()));
        }
        Ok(LinearModel { weights, bias, loss, penalty, c, classes, calibration, vocab_checksum })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LinearError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LinearError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// FNV-1a over the vocabulary's serialized form.
pub fn vocab_checksum(vocab: &Vocabulary) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in vocab.to_text().bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Full objective `J(w, b)` for reporting and tests.
pub fn objective(
    x: &[SparseVector],
    y: &[bool],
    weights: &[f64],
    bias: f64,
    loss: Loss,
    penalty: Penalty,
    c: f64,
) -> f64 {
    let n = x.len() as f64;
    let mut total = 0.0;
    for (xi, &yi) in x.iter().zip(y) {
        let m = xi.dot(weights) + bias;
        let ym = if yi { m } else { -m };
        total += match loss {
            // ln(1 + e^{-ym}) computed stably.
            Loss::Logistic => {
                if ym > 0.0 {
                    (-ym).exp().ln_1p()
                } else {
                    -ym + ym.exp().ln_1p()
                }
            }
            Loss::Hinge => (1.0 - ym).max(0.0),
        };
    }
    let reg: f64 = match penalty {
        Penalty::L1 => weights.iter().map(|w| w.abs()).sum(),
        Penalty::L2 => 0.5 * weights.iter().map(|w| w * w).sum::<f64>(),
    };
    total / n + reg / c
}

/// Trains a binary model. `y[i]` is the positive-class indicator for `x[i]`.
pub fn train(x: &[SparseVector], y: &[bool], cfg: &TrainConfig) -> Result<LinearModel, LinearError> {
    Ok(train_with_history(x, y, cfg)?.0)
}

/// Like [`train`], also returning the per-epoch objective of the averaged
/// iterate (the checkpoint sequence).
pub fn train_with_history(
    x: &[SparseVector],
    y: &[bool],
    cfg: &TrainConfig,
) -> Result<(LinearModel, Vec<f64>), LinearError> {
    cfg.validate()?;
    if x.len() != y.len() {
        return Err(LinearError::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let pos = y.iter().filter(|&&b| b).count();
    if pos == 0 || pos == y.len() {
        return Err(LinearError::SingleClass);
    }
    sgd::fit(x, y, cfg)
}

/// L1-based dimensionality reduction: trains L1 logistic regression and
/// returns the indices that kept non-zero weight, ascending.
pub fn l1_reduce(
    x: &[SparseVector],
    y: &[bool],
    c: f64,
    seed: u64,
) -> Result<Vec<usize>, LinearError> {
    let cfg = TrainConfig {
        loss: Loss::Logistic,
        penalty: Penalty::L1,
        c,
        seed,
        ..TrainConfig::default()
    };
    let model = train(x, y, &cfg)?;
    let kept: Vec<usize> = model
        .weights
        .iter()
        .enumerate()
        .filter(|&(_, w)| *w != 0.0)
        .map(|(i, _)| i)
        .collect();
    if kept.is_empty() {
        return Err(LinearError::AllZero);
    }
    Ok(kept)
}

/// One binary model per class.
#[derive(Debug, Clone, PartialEq)]
pub struct OvRModel {
    pub models: Vec<LinearModel>,
}

impl OvRModel {
    pub fn n_classes(&self) -> usize {
        self.models.len()
    }

    /// Per-class positive probabilities (not normalized across classes).
    pub fn scores(&self, x: &SparseVector) -> Result<Vec<f64>, LinearError> {
        self.models.iter().map(|m| Ok(m.predict_proba(x)?[1])).collect()
    }

    /// Argmax class; ties resolve to the lowest class index.
    pub fn predict(&self, x: &SparseVector) -> Result<usize, LinearError> {
        let scores = self.scores(x)?;
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        Ok(best)
    }
}

/// Trains one-vs-rest models for classes `0..n_classes`, in parallel with
/// per-class derived seeds.
pub fn one_vs_rest_train(
    x: &[SparseVector],
    y: &[usize],
    n_classes: usize,
    cfg: &TrainConfig,
) -> Result<OvRModel, LinearError> {
    if n_classes < 2 {
        return Err(LinearError::SingleClass);
    }
    if x.len() != y.len() {
        return Err(LinearError::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(LinearError::BadConfig(format!(
            "label {bad} out of range for {n_classes} classes"
        )));
    }
    // Fix the dimensionality once so every per-class model agrees.
    let dim = cfg.dim.unwrap_or_else(|| {
        x.iter().filter_map(|v| v.pairs().last()).map(|&(i, _)| i + 1).max().unwrap_or(0)
    });
    let results = par::map_range(n_classes, |class| {
        let targets: Vec<bool> = y.iter().map(|&c| c == class).collect();
        let sub = TrainConfig {
            seed: derive_seed(cfg.seed, class as u64),
            dim: Some(dim),
            ..cfg.clone()
        };
        let mut model = train(x, &targets, &sub)?;
        model.classes = [format!("not-{class}"), format!("{class}")];
        Ok(model)
    });
    let models = results.into_iter().collect::<Result<Vec<_>, LinearError>>()?;
    Ok(OvRModel { models })
}

/// Convenience free-function form of [`OvRModel::predict`].
pub fn one_vs_rest_predict(model: &OvRModel, x: &SparseVector) -> Result<usize, LinearError> {
    model.predict(x)
}
