//! Local (LIME-style) and global explanations for binary classifiers.
//!
//! The local explainer treats the model as a black box `text -> class
//! probabilities` and asks which tokens of one specific input drove its
//! prediction.  It samples perturbed copies of the input with random token
//! subsets removed, scores each copy with the model, and fits a weighted
//! ridge regression from token presence/absence to the predicted
//! probability.  The ridge coefficients are the per-token importances;
//! perturbations are weighted by an exponential kernel over cosine distance
//! so that copies close to the original text dominate the fit.
//!
//! Tokens are represented by *presence*: the interpretable input space is a
//! binary vector with one slot per token of the original sequence, and a
//! perturbed text is the subsequence of tokens whose slot is `true`, joined
//! by single spaces.  Duplicated tokens get independent slots.
//!
//! The global explainer ([`linear_importance`]) skips sampling entirely and
//! reads importances straight out of a fitted linear model's weight vector,
//! which is exact for linear models but says nothing about any single
//! prediction.
//!
//! Perturbation sampling, the kernel, and the ridge fit are all
//! deterministic given [`LimeConfig::seed`], so explanations are
//! reproducible run to run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::features::Vocabulary;
use crate::linear::LinearModel;
use crate::par;
use crate::textprep::TokenSequence;

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("cannot explain an empty token sequence")]
    EmptyTokens,
    #[error("bad explainer configuration: {0}")]
    BadConfig(String),
    #[error("bad prediction from model: {0}")]
    BadPrediction(String),
    #[error("model is not fitted for this vocabulary: {0}")]
    NotFitted(String),
}

/// Knobs for [`lime_explain`].
#[derive(Debug, Clone)]
pub struct LimeConfig {
    /// Number of perturbed samples, including the unperturbed original.
    pub n_samples: usize,
    /// Keep at most this many tokens in the ranked output.
    pub top_k: usize,
    /// Kernel width for the proximity weights; `None` picks
    /// `0.75 * sqrt(token count)`.
    pub kernel_width: Option<f64>,
    /// Ridge penalty on the token coefficients (the intercept is free).
    pub ridge: f64,
    pub seed: u64,
}

impl Default for LimeConfig {
    fn default() -> Self {
        LimeConfig {
            n_samples: 1000,
            top_k: 10,
            kernel_width: None,
            ridge: 1e-3,
            seed: 42,
        }
    }
}

impl LimeConfig {
    fn validate(&self) -> Result<(), ExplainError> {
        if self.n_samples < 2 {
            return Err(ExplainError::BadConfig(format!(
                "n_samples must be at least 2, got {}",
                self.n_samples
            )));
        }
        if self.ridge <= 0.0 || !self.ridge.is_finite() {
            return Err(ExplainError::BadConfig(format!(
                "ridge penalty must be positive and finite, got {}",
                self.ridge
            )));
        }
        if let Some(w) = self.kernel_width {
            if w <= 0.0 || !w.is_finite() {
                return Err(ExplainError::BadConfig(format!(
                    "kernel width must be positive and finite, got {w}"
                )));
            }
        }
        Ok(())
    }
}

/// One explained prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub source_id: String,
    /// Class index the model assigned to the unperturbed input.
    pub predicted_class: usize,
    /// Model probability for that class on the unperturbed input.
    pub probability: f64,
    /// `(token, local weight)` ranked by descending `|weight|`, at most
    /// `top_k` entries.  Positive weights push toward `predicted_class`.
    pub weights: Vec<(String, f64)>,
    /// Weighted R-squared of the local ridge fit; 0 when the model never
    /// changed its output across perturbations.
    pub fit_score: f64,
}

/// Draws `n_samples` token-presence masks over `tokens.raw_tokens` and
/// renders each mask as a space-joined text.
///
/// Sample 0 is always the all-ones mask (the original text); the rest keep
/// each token independently with probability 1/2.  Raw (unstemmed) tokens
/// are used so the rendered text can go back through the caller's full
/// preprocessing pipeline.
pub fn perturb(
    tokens: &TokenSequence,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<(Vec<bool>, String)>, ExplainError> {
    let words = &tokens.raw_tokens;
    if words.is_empty() {
        return Err(ExplainError::EmptyTokens);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let mask: Vec<bool> = if i == 0 {
            vec![true; words.len()]
        } else {
            (0..words.len()).map(|_| rng.gen::<bool>()).collect()
        };
        let text = words
            .iter()
            .zip(&mask)
            .filter(|(_, &keep)| keep)
            .map(|(w, _)| w.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        out.push((mask, text));
    }
    Ok(out)
}

/// Exponential-kernel weight of a perturbation mask relative to the
/// all-ones mask: `exp(-d^2 / width^2)` with `d` the cosine distance.  For a
/// binary mask with `k` of `n` tokens kept, `d = 1 - sqrt(k / n)`; the empty
/// mask gets the maximal distance 1.
pub fn proximity_weight(mask: &[bool], kernel_width: f64) -> f64 {
    let n = mask.len();
    if n == 0 {
        return 0.0;
    }
    let k = mask.iter().filter(|&&b| b).count();
    let cos = (k as f64 / n as f64).sqrt();
    let d = 1.0 - cos;
    (-d * d / (kernel_width * kernel_width)).exp()
}

/// Explains one prediction of a black-box classifier.
///
/// `predict_fn` maps a raw text to class probabilities and is called once
/// per perturbed sample (in parallel when the `parallel` feature is on, so
/// it must be `Sync`).  The explained class is the argmax on the
/// unperturbed input.  If the model returns bitwise-identical probabilities
/// for every sample there is nothing local to fit; the explanation comes
/// back with empty `weights` and `fit_score` 0 rather than an error.
pub fn lime_explain<F>(
    predict_fn: F,
    tokens: &TokenSequence,
    cfg: &LimeConfig,
) -> Result<Explanation, ExplainError>
where
    F: Fn(&str) -> Vec<f64> + Sync,
{
    cfg.validate()?;
    let samples = perturb(tokens, cfg.n_samples, cfg.seed)?;
    let preds: Vec<Vec<f64>> = par::map_collect(&samples, |(_, text)| predict_fn(text));

    let classes = preds[0].len();
    if classes == 0 {
        return Err(ExplainError::BadPrediction(
            "model returned an empty probability vector".into(),
        ));
    }
    for p in &preds {
        if p.len() != classes {
            return Err(ExplainError::BadPrediction(format!(
                "inconsistent probability vector lengths ({} vs {classes})",
                p.len()
            )));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(ExplainError::BadPrediction(
                "model returned a non-finite probability".into(),
            ));
        }
    }

    let mut predicted_class = 0;
    for (c, &p) in preds[0].iter().enumerate() {
        if p > preds[0][predicted_class] {
            predicted_class = c;
        }
    }
    let probability = preds[0][predicted_class];

    let mut out = Explanation {
        source_id: tokens.source_id.clone(),
        predicted_class,
        probability,
        weights: vec![],
        fit_score: 0.0,
    };

    let targets: Vec<f64> = preds.iter().map(|p| p[predicted_class]).collect();
    if targets.iter().all(|&y| y == targets[0]) {
        return Ok(out); // constant model: nothing local to explain
    }

    let n = tokens.raw_tokens.len();
    let width = cfg
        .kernel_width
        .unwrap_or_else(|| 0.75 * (n as f64).sqrt());
    let sample_w: Vec<f64> = samples
        .iter()
        .map(|(mask, _)| proximity_weight(mask, width))
        .collect();

    let beta = ridge_fit(&samples, &targets, &sample_w, cfg.ridge, n);
    out.fit_score = weighted_r2(&samples, &targets, &sample_w, &beta);

    let mut ranked: Vec<(usize, f64)> = (0..n).map(|j| (j, beta[1 + j])).collect();
    ranked.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
    ranked.truncate(cfg.top_k);
    out.weights = ranked
        .into_iter()
        .map(|(j, w)| (tokens.raw_tokens[j].clone(), w))
        .collect();
    Ok(out)
}

/// Weighted ridge regression of `y` on `[1 | mask]` via the normal
/// equations; the intercept column is not penalized.  Returns `n + 1`
/// coefficients, intercept first.
fn ridge_fit(
    samples: &[(Vec<bool>, String)],
    y: &[f64],
    w: &[f64],
    ridge: f64,
    n: usize,
) -> Vec<f64> {
    let d = n + 1;
    let mut a = vec![0.0; d * d];
    let mut b = vec![0.0; d];
    let mut z = vec![0.0; d];
    for (i, (mask, _)) in samples.iter().enumerate() {
        z[0] = 1.0;
        for (j, &keep) in mask.iter().enumerate() {
            z[1 + j] = if keep { 1.0 } else { 0.0 };
        }
        for r in 0..d {
            if z[r] == 0.0 {
                continue;
            }
            let zr = w[i] * z[r];
            b[r] += zr * y[i];
            for c in r..d {
                if z[c] != 0.0 {
                    a[r * d + c] += zr * z[c];
                }
            }
        }
    }
    // mirror the upper triangle, then add the penalty to token rows only
    for r in 0..d {
        for c in 0..r {
            a[r * d + c] = a[c * d + r];
        }
    }
    for j in 1..d {
        a[j * d + j] += ridge;
    }
    solve_dense(a, b, d)
}

/// Gauss-Jordan elimination with partial pivoting.  The ridge system is
/// symmetric positive definite, so pivots only vanish in degenerate inputs;
/// those directions get coefficient 0 instead of a panic.
fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, d: usize) -> Vec<f64> {
    for col in 0..d {
        let mut piv = col;
        for r in col + 1..d {
            if a[r * d + col].abs() > a[piv * d + col].abs() {
                piv = r;
            }
        }
        if a[piv * d + col] == 0.0 {
            continue;
        }
        if piv != col {
            for c in 0..d {
                a.swap(col * d + c, piv * d + c);
            }
            b.swap(col, piv);
        }
        let diag = a[col * d + col];
        for r in 0..d {
            if r == col {
                continue;
            }
            let f = a[r * d + col] / diag;
            if f == 0.0 {
                continue;
            }
            for c in col..d {
                a[r * d + c] -= f * a[col * d + c];
            }
            b[r] -= f * b[col];
        }
    }
    (0..d)
        .map(|j| {
            let diag = a[j * d + j];
            if diag == 0.0 {
                0.0
            } else {
                b[j] / diag
            }
        })
        .collect()
}

fn weighted_r2(
    samples: &[(Vec<bool>, String)],
    y: &[f64],
    w: &[f64],
    beta: &[f64],
) -> f64 {
    let sw: f64 = w.iter().sum();
    if sw == 0.0 {
        return 0.0;
    }
    let ybar = y.iter().zip(w).map(|(yi, wi)| yi * wi).sum::<f64>() / sw;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (i, (mask, _)) in samples.iter().enumerate() {
        let fitted = beta[0]
            + mask
                .iter()
                .enumerate()
                .filter(|(_, &keep)| keep)
                .map(|(j, _)| beta[1 + j])
                .sum::<f64>();
        ss_res += w[i] * (y[i] - fitted) * (y[i] - fitted);
        ss_tot += w[i] * (y[i] - ybar) * (y[i] - ybar);
    }
    if ss_tot == 0.0 {
        0.0
    } else {
        1.0 - ss_res / ss_tot
    }
}

/// Global token importances of a fitted linear model: the nonzero n-gram
/// weights, ranked by descending signed weight (most hate-indicative
/// first), truncated to `top_k`.
///
/// Only the leading `vocab.len()` columns are reported; any trailing dense
/// feature slots have no n-gram name and are skipped.  Errors if the model
/// has no weights, covers fewer columns than the vocabulary, or carries a
/// checksum for a different vocabulary.
pub fn linear_importance(
    model: &LinearModel,
    vocab: &Vocabulary,
    top_k: usize,
) -> Result<Vec<(String, f64)>, ExplainError> {
    if model.weights.is_empty() {
        return Err(ExplainError::NotFitted("model has no weights".into()));
    }
    if model.dim() < vocab.len() {
        return Err(ExplainError::NotFitted(format!(
            "model has {} weights but the vocabulary has {} terms",
            model.dim(),
            vocab.len()
        )));
    }
    model
        .verify_vocab(vocab)
        .map_err(|e| ExplainError::NotFitted(e.to_string()))?;
    let mut rows: Vec<(String, f64)> = vocab
        .iter()
        .filter(|(_, col, _)| model.weights[*col] != 0.0)
        .map(|(term, col, _)| (term.to_string(), model.weights[col]))
        .collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows.truncate(top_k);
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::fit_tfidf;
    use crate::linear::{Loss, Penalty};
    use crate::par::derive_seed;

    fn seq(words: &[&str]) -> TokenSequence {
        TokenSequence {
            tokens: words.iter().map(|w| w.to_string()).collect(),
            raw_tokens: words.iter().map(|w| w.to_string()).collect(),
            source_id: "t0".into(),
            kept_hashtags: vec![],
            kept_mentions: vec![],
        }
    }

    fn has(text: &str, word: &str) -> bool {
        text.split(' ').any(|t| t == word)
    }

    #[test]
    fn perturb_anchors_the_original_and_renders_subsequences() {
        let toks = seq(&["you", "are", "so", "ugly"]);
        let samples = perturb(&toks, 50, 7).unwrap();
        assert_eq!(samples.len(), 50);
        assert_eq!(samples[0].0, vec![true; 4]);
        assert_eq!(samples[0].1, "you are so ugly");
        for (mask, text) in &samples {
            assert_eq!(mask.len(), 4);
            let expect: Vec<&str> = toks
                .raw_tokens
                .iter()
                .zip(mask)
                .filter(|(_, &keep)| keep)
                .map(|(w, _)| w.as_str())
                .collect();
            assert_eq!(text, &expect.join(" "));
        }
    }

    #[test]
    fn perturb_keeps_tokens_at_rate_one_half() {
        let toks = seq(&["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]);
        let samples = perturb(&toks, 10_000, 3).unwrap();
        let kept: usize = samples[1..]
            .iter()
            .map(|(m, _)| m.iter().filter(|&&b| b).count())
            .sum();
        let rate = kept as f64 / (9999.0 * 10.0);
        assert!((rate - 0.5).abs() < 0.02, "keep rate {rate}");
    }

    #[test]
    fn perturb_rejects_empty_sequences() {
        let toks = seq(&[]);
        assert!(matches!(
            perturb(&toks, 10, 1),
            Err(ExplainError::EmptyTokens)
        ));
    }

    #[test]
    fn proximity_weight_peaks_at_the_full_mask() {
        let full = proximity_weight(&[true; 8], 0.75);
        assert!((full - 1.0).abs() < 1e-15);
        for k in 0..8 {
            let mut mask = vec![false; 8];
            mask.iter_mut().take(k).for_each(|b| *b = true);
            assert!(proximity_weight(&mask, 0.75) < full);
        }
        // hand value: k=2 of 8 -> d = 1 - 0.5, w = exp(-0.25 / 0.5625)
        let mask = [true, true, false, false, false, false, false, false];
        let expect = (-0.25f64 / 0.5625).exp();
        assert!((proximity_weight(&mask, 0.75) - expect).abs() < 1e-12);
        assert_eq!(proximity_weight(&[false; 4], 0.75), (-1.0f64 / 0.5625).exp());
    }

    /// A planted scorer: p(hate) rises with "bitch", falls a little with
    /// "flowers".  LIME must put the planted token on top with the right
    /// sign, across 100 seeds.
    #[test]
    fn recovers_a_planted_keyword_across_seeds() {
        let toks = seq(&["you", "lying", "bitch", "with", "flowers"]);
        let predict = |text: &str| {
            let mut p = 0.35;
            if has(text, "bitch") {
                p += 0.45;
            }
            if has(text, "flowers") {
                p -= 0.10;
            }
            vec![1.0 - p, p]
        };
        let mut hits = 0;
        for s in 0..100 {
            let cfg = LimeConfig {
                n_samples: 200,
                seed: derive_seed(900, s),
                ..LimeConfig::default()
            };
            let ex = lime_explain(predict, &toks, &cfg).unwrap();
            assert_eq!(ex.predicted_class, 1);
            assert!((ex.probability - 0.70).abs() < 1e-12);
            let (top, w) = &ex.weights[0];
            if top == "bitch" && *w > 0.0 {
                hits += 1;
            }
        }
        assert!(hits >= 95, "planted token ranked first in {hits}/100 runs");
    }

    #[test]
    fn signs_agree_with_planted_directions() {
        let toks = seq(&["good", "bad", "pad1", "pad2", "pad3", "pad4"]);
        let predict = |text: &str| {
            let mut score: f64 = 0.2;
            if has(text, "good") {
                score += 2.0;
            }
            if has(text, "bad") {
                score -= 1.5;
            }
            let p = 1.0 / (1.0 + (-score).exp());
            vec![1.0 - p, p]
        };
        let mut agree = 0;
        for s in 0..20 {
            let cfg = LimeConfig {
                n_samples: 300,
                top_k: 6,
                seed: derive_seed(41, s),
                ..LimeConfig::default()
            };
            let ex = lime_explain(predict, &toks, &cfg).unwrap();
            assert_eq!(ex.predicted_class, 1); // full text scores 0.7 -> p ~ 0.67
            let w_good = ex.weights.iter().find(|(t, _)| t == "good").unwrap().1;
            let w_bad = ex.weights.iter().find(|(t, _)| t == "bad").unwrap().1;
            if w_good > 0.0 && w_bad < 0.0 && w_good > w_bad.abs() {
                agree += 1;
            }
        }
        assert!(agree >= 19, "signs agreed in {agree}/20 runs");
    }

    #[test]
    fn removing_the_top_positive_token_lowers_the_probability() {
        let toks = seq(&["she", "is", "a", "stupid", "cow"]);
        let predict = |text: &str| {
            let mut p: f64 = 0.30;
            if has(text, "stupid") {
                p += 0.30;
            }
            if has(text, "cow") {
                p += 0.15;
            }
            if has(text, "she") {
                p -= 0.05;
            }
            vec![1.0 - p, p]
        };
        let ex = lime_explain(predict, &toks, &LimeConfig::default()).unwrap();
        let (top, w) = &ex.weights[0];
        assert!(*w > 0.0);
        let stripped: Vec<&str> = toks
            .raw_tokens
            .iter()
            .map(String::as_str)
            .filter(|t| t != top)
            .collect();
        let before = predict(&toks.raw_tokens.join(" "))[ex.predicted_class];
        let after = predict(&stripped.join(" "))[ex.predicted_class];
        assert!(
            after < before,
            "dropping {top:?} moved p from {before} to {after}"
        );
    }

    /// With a model that is exactly linear in token presence and a flat
    /// kernel, the ridge fit should reproduce the generating coefficients
    /// almost perfectly.
    #[test]
    fn recovers_exact_coefficients_of_a_linear_model() {
        let toks = seq(&["aa", "bb", "cc", "dd"]);
        let predict = |text: &str| {
            let p = 0.5 + if has(text, "aa") { 0.3 } else { 0.0 }
                - if has(text, "bb") { 0.2 } else { 0.0 };
            vec![1.0 - p, p]
        };
        let cfg = LimeConfig {
            n_samples: 4000,
            top_k: 4,
            kernel_width: Some(1e6), // effectively uniform weights
            ridge: 1e-9,
            seed: 5,
        };
        let ex = lime_explain(predict, &toks, &cfg).unwrap();
        assert_eq!(ex.predicted_class, 1);
        assert!(ex.fit_score > 0.999, "fit {}", ex.fit_score);
        let coef = |name: &str| ex.weights.iter().find(|(t, _)| t == name).unwrap().1;
        assert!((coef("aa") - 0.3).abs() < 0.01);
        assert!((coef("bb") + 0.2).abs() < 0.01);
        assert!(coef("cc").abs() < 0.01);
        assert!(coef("dd").abs() < 0.01);
        // ranking by |weight|: aa first, bb second
        assert_eq!(ex.weights[0].0, "aa");
        assert_eq!(ex.weights[1].0, "bb");
        // top_k truncation drops the weakest token
        let cut = LimeConfig { top_k: 2, ..cfg };
        let ex2 = lime_explain(predict, &toks, &cut).unwrap();
        assert_eq!(ex2.weights.len(), 2);
        assert_eq!(ex2.weights[0].0, "aa");
        assert_eq!(ex2.weights[1].0, "bb");
    }

    #[test]
    fn constant_models_yield_an_empty_explanation() {
        let toks = seq(&["whatever", "text"]);
        let ex = lime_explain(|_| vec![0.8, 0.2], &toks, &LimeConfig::default()).unwrap();
        assert_eq!(ex.predicted_class, 0);
        assert_eq!(ex.probability, 0.8);
        assert!(ex.weights.is_empty());
        assert_eq!(ex.fit_score, 0.0);
        assert_eq!(ex.source_id, "t0");
    }

    #[test]
    fn explanations_are_deterministic_per_seed() {
        let toks = seq(&["one", "two", "three", "four"]);
        let predict = |text: &str| {
            let p = 0.4 + 0.002 * text.len() as f64;
            vec![1.0 - p, p]
        };
        let cfg = LimeConfig::default();
        let a = lime_explain(predict, &toks, &cfg).unwrap();
        let b = lime_explain(predict, &toks, &cfg).unwrap();
        assert_eq!(a, b);
        let other = LimeConfig { seed: 43, ..cfg };
        let c = lime_explain(predict, &toks, &other).unwrap();
        assert_ne!(a, c);
        assert!(a.weights.iter().all(|(_, w)| w.is_finite()));
    }

    #[test]
    fn rejects_bad_configs_and_bad_predictions() {
        let toks = seq(&["a", "b"]);
        let p_ok = |_: &str| vec![0.5, 0.5];
        let few = LimeConfig { n_samples: 1, ..LimeConfig::default() };
        assert!(matches!(
            lime_explain(p_ok, &toks, &few),
            Err(ExplainError::BadConfig(_))
        ));
        let flat = LimeConfig { ridge: 0.0, ..LimeConfig::default() };
        assert!(matches!(
            lime_explain(p_ok, &toks, &flat),
            Err(ExplainError::BadConfig(_))
        ));
        let wide = LimeConfig { kernel_width: Some(0.0), ..LimeConfig::default() };
        assert!(matches!(
            lime_explain(p_ok, &toks, &wide),
            Err(ExplainError::BadConfig(_))
        ));
        assert!(matches!(
            lime_explain(|_| vec![], &toks, &LimeConfig::default()),
            Err(ExplainError::BadPrediction(_))
        ));
        let ragged = |text: &str| if text.len() > 2 { vec![0.5, 0.5] } else { vec![1.0] };
        assert!(matches!(
            lime_explain(ragged, &toks, &LimeConfig::default()),
            Err(ExplainError::BadPrediction(_))
        ));
        let nan = |text: &str| vec![0.5, if text.is_empty() { f64::NAN } else { 0.5 }];
        assert!(matches!(
            lime_explain(nan, &toks, &LimeConfig::default()),
            Err(ExplainError::BadPrediction(_))
        ));
    }

    fn fitted_model(dim: usize, vocab: &Vocabulary) -> LinearModel {
        let mut m = LinearModel {
            weights: vec![0.0; dim],
            bias: 0.0,
            loss: Loss::Logistic,
            penalty: Penalty::L2,
            c: 1.0,
            classes: ["not_hate".into(), "hate".into()],
            calibration: None,
            vocab_checksum: None,
        };
        m.bind_vocab(vocab);
        m
    }

    #[test]
    fn linear_importance_ranks_by_signed_weight() {
        let corpus = [
            seq(&["bitch", "ugly", "hello", "flowers"]),
            seq(&["bitch", "kind"]),
        ];
        let vocab = fit_tfidf(&corpus, (1, 1), 1).unwrap();
        let mut model = fitted_model(vocab.len() + 2, &vocab);
        let col = |t: &str| {
            vocab
                .iter()
                .find(|(term, _, _)| *term == t)
                .map(|(_, c, _)| c)
                .unwrap()
        };
        model.weights[col("bitch")] = 2.5;
        model.weights[col("ugly")] = 1.0;
        model.weights[col("flowers")] = -1.8;
        model.weights[col("kind")] = -0.2;
        // "hello" stays exactly zero; dense slots past the vocab are ignored
        model.weights[vocab.len()] = 99.0;
        model.weights[vocab.len() + 1] = -99.0;

        let rows = linear_importance(&model, &vocab, 10).unwrap();
        let names: Vec<&str> = rows.iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(names, ["bitch", "ugly", "kind", "flowers"]);
        assert_eq!(rows[0].1, 2.5);
        assert_eq!(rows[3].1, -1.8);

        let top1 = linear_importance(&model, &vocab, 1).unwrap();
        assert_eq!(top1, vec![("bitch".to_string(), 2.5)]);
        assert!(linear_importance(&model, &vocab, 0).unwrap().is_empty());
    }

    #[test]
    fn linear_importance_rejects_unfitted_or_mismatched_models() {
        let corpus = [seq(&["alpha", "beta", "gamma"])];
        let vocab = fit_tfidf(&corpus, (1, 1), 1).unwrap();

        let empty = LinearModel {
            weights: vec![],
            bias: 0.0,
            loss: Loss::Logistic,
            penalty: Penalty::L2,
            c: 1.0,
            classes: ["a".into(), "b".into()],
            calibration: None,
            vocab_checksum: None,
        };
        assert!(matches!(
            linear_importance(&empty, &vocab, 5),
            Err(ExplainError::NotFitted(_))
        ));

        let short = fitted_model(vocab.len() - 1, &vocab);
        let short = LinearModel {
            weights: short.weights[..vocab.len() - 1].to_vec(),
            vocab_checksum: None,
            ..short
        };
        assert!(matches!(
            linear_importance(&short, &vocab, 5),
            Err(ExplainError::NotFitted(_))
        ));

        let other_vocab = fit_tfidf(&[seq(&["delta", "epsilon", "zeta"])], (1, 1), 1).unwrap();
        let stale = fitted_model(other_vocab.len(), &other_vocab);
        assert!(matches!(
            linear_importance(&stale, &vocab, 5),
            Err(ExplainError::NotFitted(_))
        ));
    }
}
