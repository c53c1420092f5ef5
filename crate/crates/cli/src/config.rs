//! Flat `key = value` configuration with flag overrides.
//!
//! The format is one assignment per line, UTF-8, `#`-prefixed comment lines
//! and blank lines ignored.  Keys are sectioned with dots
//! (`features.n_min = 1`) and every key has a default, so an empty config
//! is valid.  Values run to the end of the line verbatim -- there are no
//! trailing comments or quotes.  Unknown or duplicate keys are errors, and
//! every config error carries `file:line` provenance.
//!
//! Precedence, highest first: command-line flag, config file,
//! `HWK_SEED` (seed only), built-in default.  [`Settings::resolved_text`]
//! renders the fully resolved state back in config syntax; writing it into
//! the run directory makes any run replayable from its own snapshot.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use hwk_core::corpus::{LabelDim, Lang};
use hwk_core::features::PipelineConfig;
use hwk_core::linear::{GridPoint, Loss, Penalty};
use hwk_core::textprep::CleanConfig;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Logreg,
    Linsvc,
    Bigru,
    Charcnn,
}

impl ModelKind {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "logreg" => Ok(ModelKind::Logreg),
            "linsvc" => Ok(ModelKind::Linsvc),
            "bigru" => Ok(ModelKind::Bigru),
            "charcnn" => Ok(ModelKind::Charcnn),
            other => Err(format!(
                "unknown model {other:?} (expected logreg, linsvc, bigru, or charcnn)"
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Logreg => "logreg",
            ModelKind::Linsvc => "linsvc",
            ModelKind::Bigru => "bigru",
            ModelKind::Charcnn => "charcnn",
        }
    }

    pub fn is_linear(self) -> bool {
        matches!(self, ModelKind::Logreg | ModelKind::Linsvc)
    }

    /// Loss of the linear variants.
    pub fn loss(self) -> Option<Loss> {
        match self {
            ModelKind::Logreg => Some(Loss::Logistic),
            ModelKind::Linsvc => Some(Loss::Hinge),
            _ => None,
        }
    }
}

/// Every accepted key, kept sorted for the resolved snapshot.
const KNOWN_KEYS: &[&str] = &[
    "audit.min_support",
    "clean.collapse_repeats",
    "clean.keep_hashtag_body",
    "clean.keep_mention_body",
    "clean.lowercase",
    "clean.strip_punctuation",
    "clean.strip_urls",
    "cnn.batch",
    "cnn.dense1",
    "cnn.dense2",
    "cnn.dropout",
    "cnn.filters",
    "cnn.kernel",
    "cnn.layers",
    "cnn.len",
    "cnn.pool",
    "data.dim",
    "data.lang",
    "features.drop_slots",
    "features.min_df",
    "features.n_max",
    "features.n_min",
    "features.sentiment",
    "features.standardize",
    "grid.c",
    "grid.folds",
    "grid.loss",
    "grid.penalty",
    "gru.batch",
    "gru.dense1",
    "gru.dense2",
    "gru.dropout",
    "gru.embed_dim",
    "gru.hidden",
    "gru.seq_len",
    "gru.vocab_cap",
    "lime.kernel_width",
    "lime.ridge",
    "lime.samples",
    "lime.top_k",
    "linear.c",
    "linear.epochs",
    "linear.eta0",
    "linear.penalty",
    "model.kind",
    "train.epochs",
    "train.lr",
    "train.seed",
];

/// A parsed config file: raw values with their line numbers.
#[derive(Debug, Default)]
pub struct RawConfig {
    path: String,
    entries: HashMap<String, (String, usize)>,
}

impl RawConfig {
    /// No file given: every key falls through to defaults.
    pub fn empty() -> Self {
        RawConfig::default()
    }

    fn get(&self, key: &str) -> Option<&(String, usize)> {
        self.entries.get(key)
    }

    fn provenance(&self, line: usize) -> String {
        format!("{}:{}", self.path, line)
    }
}

pub fn load_config(path: &Path) -> Result<RawConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    let display = path.display().to_string();
    let mut entries: HashMap<String, (String, usize)> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| {
            CliError::Config(format!("{display}:{line}: expected `key = value`, got {trimmed:?}"))
        })?;
        let key = key.trim();
        let value = value.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Config(format!("{display}:{line}: unknown key {key:?}")));
        }
        if let Some((_, first)) = entries.insert(key.to_string(), (value.to_string(), line)) {
            return Err(CliError::Config(format!(
                "{display}:{line}: duplicate key {key:?} (first set on line {first})"
            )));
        }
    }
    Ok(RawConfig { path: display, entries })
}

/// Flag-level overrides; each maps to one config key.
#[derive(Debug, Default)]
pub struct Overrides {
    pub model: Option<String>,
    pub lang: Option<String>,
    pub dim: Option<String>,
    pub seed: Option<u64>,
}

/// The fully resolved configuration every command runs from.
#[derive(Debug, Clone)]
pub struct Settings {
    pub model: ModelKind,
    pub lang: Lang,
    pub dim: LabelDim,
    pub seed: u64,
    pub clean: CleanConfig,
    pub features: PipelineConfig,
    // linear training
    pub linear_c: f64,
    pub linear_penalty: Penalty,
    pub linear_epochs: usize,
    pub linear_eta0: f64,
    // neural training
    pub epochs: usize,
    pub lr: f64,
    pub gru_vocab_cap: usize,
    pub gru_seq_len: usize,
    pub gru_embed_dim: usize,
    pub gru_hidden: usize,
    pub gru_dense: [usize; 2],
    pub gru_dropout: f64,
    pub gru_batch: usize,
    pub cnn_len: usize,
    pub cnn_layers: usize,
    pub cnn_filters: usize,
    pub cnn_kernel: usize,
    pub cnn_pool: usize,
    pub cnn_dense: [usize; 2],
    pub cnn_dropout: f64,
    pub cnn_batch: usize,
    // grid search
    pub grid_loss: Vec<Loss>,
    pub grid_penalty: Vec<Penalty>,
    pub grid_c: Vec<f64>,
    pub grid_folds: usize,
    // lime
    pub lime_samples: usize,
    pub lime_top_k: usize,
    pub lime_ridge: f64,
    pub lime_kernel_width: Option<f64>,
    // audit
    pub min_support: usize,
}

fn parse_lang(s: &str) -> Result<Lang, String> {
    match s {
        "en" => Ok(Lang::En),
        "es" => Ok(Lang::Es),
        other => Err(format!("unknown language {other:?} (expected en or es)")),
    }
}

fn parse_dim(s: &str) -> Result<LabelDim, String> {
    match s {
        "hs" => Ok(LabelDim::Hs),
        "tr" => Ok(LabelDim::Tr),
        "ag" => Ok(LabelDim::Ag),
        other => Err(format!("unknown label dimension {other:?} (expected hs, tr, or ag)")),
    }
}

fn parse_loss(s: &str) -> Result<Loss, String> {
    match s {
        "logistic" => Ok(Loss::Logistic),
        "hinge" => Ok(Loss::Hinge),
        other => Err(format!("unknown loss {other:?} (expected logistic or hinge)")),
    }
}

fn parse_penalty(s: &str) -> Result<Penalty, String> {
    match s {
        "l1" => Ok(Penalty::L1),
        "l2" => Ok(Penalty::L2),
        other => Err(format!("unknown penalty {other:?} (expected l1 or l2)")),
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("expected true or false, got {other:?}")),
    }
}

pub fn loss_name(l: Loss) -> &'static str {
    match l {
        Loss::Logistic => "logistic",
        Loss::Hinge => "hinge",
    }
}

pub fn penalty_name(p: Penalty) -> &'static str {
    match p {
        Penalty::L1 => "l1",
        Penalty::L2 => "l2",
    }
}

impl Settings {
    pub fn resolve(cfg: &RawConfig, ov: &Overrides) -> Result<Self, CliError> {
        // `key` reads one config value with provenance-tagged errors.
        let key = |name: &str| cfg.get(name);
        fn parsed<T>(
            cfg: &RawConfig,
            name: &str,
            default: T,
            parse: impl Fn(&str) -> Result<T, String>,
        ) -> Result<T, CliError> {
            match cfg.get(name) {
                None => Ok(default),
                Some((value, line)) => parse(value).map_err(|msg| {
                    CliError::Config(format!("{}: key {name}: {msg}", cfg.provenance(*line)))
                }),
            }
        }
        fn num<T: std::str::FromStr>(what: &'static str) -> impl Fn(&str) -> Result<T, String> {
            move |s| s.parse::<T>().map_err(|_| format!("expected {what}, got {s:?}"))
        }
        fn list<T>(
            parse: impl Fn(&str) -> Result<T, String>,
        ) -> impl Fn(&str) -> Result<Vec<T>, String> {
            move |s| {
                s.split(',')
                    .map(str::trim)
                    .filter(|p| !p.is_empty())
                    .map(&parse)
                    .collect()
            }
        }

        // flag > config > default (seed additionally falls back to HWK_SEED)
        let model = match &ov.model {
            Some(flag) => ModelKind::parse(flag).map_err(CliError::Config)?,
            None => parsed(cfg, "model.kind", ModelKind::Logreg, ModelKind::parse)?,
        };
        let lang = match &ov.lang {
            Some(flag) => parse_lang(flag).map_err(CliError::Config)?,
            None => parsed(cfg, "data.lang", Lang::En, parse_lang)?,
        };
        let dim = match &ov.dim {
            Some(flag) => parse_dim(flag).map_err(CliError::Config)?,
            None => parsed(cfg, "data.dim", LabelDim::Hs, parse_dim)?,
        };
        let seed = match ov.seed {
            Some(flag) => flag,
            None if key("train.seed").is_some() => {
                parsed(cfg, "train.seed", 0, num::<u64>("an unsigned integer"))?
            }
            None => match std::env::var("HWK_SEED") {
                Ok(v) => v.parse::<u64>().map_err(|_| {
                    CliError::Config(format!("HWK_SEED: expected an unsigned integer, got {v:?}"))
                })?,
                Err(_) => 42,
            },
        };

        let collapse = parsed(cfg, "clean.collapse_repeats", 3, num::<usize>("an integer"))?;
        let clean = CleanConfig {
            lowercase: parsed(cfg, "clean.lowercase", true, parse_bool)?,
            strip_urls: parsed(cfg, "clean.strip_urls", true, parse_bool)?,
            strip_punctuation: parsed(cfg, "clean.strip_punctuation", true, parse_bool)?,
            keep_hashtag_body: parsed(cfg, "clean.keep_hashtag_body", true, parse_bool)?,
            keep_mention_body: parsed(cfg, "clean.keep_mention_body", true, parse_bool)?,
            collapse_repeats: (collapse > 0).then_some(collapse),
        };

        let features = PipelineConfig {
            n_range: (
                parsed(cfg, "features.n_min", 1, num::<usize>("an integer"))?,
                parsed(cfg, "features.n_max", 3, num::<usize>("an integer"))?,
            ),
            min_df: parsed(cfg, "features.min_df", 2, num::<usize>("an integer"))?,
            drop_slots: parsed(cfg, "features.drop_slots", Vec::new(), list(|s| Ok(s.to_string())))?,
            include_sentiment: parsed(cfg, "features.sentiment", false, parse_bool)?,
            standardize: parsed(cfg, "features.standardize", true, parse_bool)?,
        };

        Ok(Settings {
            model,
            lang,
            dim,
            seed,
            clean,
            features,
            linear_c: parsed(cfg, "linear.c", 0.1, num::<f64>("a number"))?,
            linear_penalty: parsed(cfg, "linear.penalty", Penalty::L2, parse_penalty)?,
            linear_epochs: parsed(cfg, "linear.epochs", 30, num::<usize>("an integer"))?,
            linear_eta0: parsed(cfg, "linear.eta0", 0.5, num::<f64>("a number"))?,
            epochs: parsed(cfg, "train.epochs", 20, num::<usize>("an integer"))?,
            lr: parsed(cfg, "train.lr", 1e-3, num::<f64>("a number"))?,
            gru_vocab_cap: parsed(cfg, "gru.vocab_cap", 10_000, num::<usize>("an integer"))?,
            gru_seq_len: parsed(cfg, "gru.seq_len", 30, num::<usize>("an integer"))?,
            gru_embed_dim: parsed(cfg, "gru.embed_dim", 32, num::<usize>("an integer"))?,
            gru_hidden: parsed(cfg, "gru.hidden", 32, num::<usize>("an integer"))?,
            gru_dense: [
                parsed(cfg, "gru.dense1", 64, num::<usize>("an integer"))?,
                parsed(cfg, "gru.dense2", 32, num::<usize>("an integer"))?,
            ],
            gru_dropout: parsed(cfg, "gru.dropout", 0.2, num::<f64>("a number"))?,
            gru_batch: parsed(cfg, "gru.batch", 32, num::<usize>("an integer"))?,
            cnn_len: parsed(cfg, "cnn.len", 140, num::<usize>("an integer"))?,
            cnn_layers: parsed(cfg, "cnn.layers", 3, num::<usize>("an integer"))?,
            cnn_filters: parsed(cfg, "cnn.filters", 32, num::<usize>("an integer"))?,
            cnn_kernel: parsed(cfg, "cnn.kernel", 7, num::<usize>("an integer"))?,
            cnn_pool: parsed(cfg, "cnn.pool", 3, num::<usize>("an integer"))?,
            cnn_dense: [
                parsed(cfg, "cnn.dense1", 64, num::<usize>("an integer"))?,
                parsed(cfg, "cnn.dense2", 32, num::<usize>("an integer"))?,
            ],
            cnn_dropout: parsed(cfg, "cnn.dropout", 0.2, num::<f64>("a number"))?,
            cnn_batch: parsed(cfg, "cnn.batch", 32, num::<usize>("an integer"))?,
            grid_loss: parsed(cfg, "grid.loss", vec![Loss::Logistic, Loss::Hinge], list(parse_loss))?,
            grid_penalty: parsed(cfg, "grid.penalty", vec![Penalty::L1, Penalty::L2], list(parse_penalty))?,
            grid_c: parsed(cfg, "grid.c", vec![0.01, 0.1, 1.0, 10.0], list(num::<f64>("a number")))?,
            grid_folds: parsed(cfg, "grid.folds", 10, num::<usize>("an integer"))?,
            lime_samples: parsed(cfg, "lime.samples", 1000, num::<usize>("an integer"))?,
            lime_top_k: parsed(cfg, "lime.top_k", 10, num::<usize>("an integer"))?,
            lime_ridge: parsed(cfg, "lime.ridge", 1e-3, num::<f64>("a number"))?,
            lime_kernel_width: parsed(cfg, "lime.kernel_width", None, |s| {
                if s == "auto" {
                    Ok(None)
                } else {
                    s.parse::<f64>()
                        .map(Some)
                        .map_err(|_| format!("expected a number or `auto`, got {s:?}"))
                }
            })?,
            min_support: parsed(cfg, "audit.min_support", 20, num::<usize>("an integer"))?,
        })
    }

    /// The grid as the cross product of the configured axes, in
    /// loss-major, penalty-then-C order.
    pub fn grid(&self) -> Vec<GridPoint> {
        let mut grid = Vec::new();
        for &loss in &self.grid_loss {
            for &penalty in &self.grid_penalty {
                for &c in &self.grid_c {
                    grid.push(GridPoint { loss, penalty, c });
                }
            }
        }
        grid
    }

    /// Every key with its effective value, sorted, in config syntax.
    /// Feeding this back through `--config` reproduces the run.
    pub fn resolved_text(&self) -> String {
        let join = |parts: Vec<String>| parts.join(",");
        let pairs: Vec<(&str, String)> = vec![
            ("audit.min_support", self.min_support.to_string()),
            ("clean.collapse_repeats", self.clean.collapse_repeats.unwrap_or(0).to_string()),
            ("clean.keep_hashtag_body", self.clean.keep_hashtag_body.to_string()),
            ("clean.keep_mention_body", self.clean.keep_mention_body.to_string()),
            ("clean.lowercase", self.clean.lowercase.to_string()),
            ("clean.strip_punctuation", self.clean.strip_punctuation.to_string()),
            ("clean.strip_urls", self.clean.strip_urls.to_string()),
            ("cnn.batch", self.cnn_batch.to_string()),
            ("cnn.dense1", self.cnn_dense[0].to_string()),
            ("cnn.dense2", self.cnn_dense[1].to_string()),
            ("cnn.dropout", self.cnn_dropout.to_string()),
            ("cnn.filters", self.cnn_filters.to_string()),
            ("cnn.kernel", self.cnn_kernel.to_string()),
            ("cnn.layers", self.cnn_layers.to_string()),
            ("cnn.len", self.cnn_len.to_string()),
            ("cnn.pool", self.cnn_pool.to_string()),
            ("data.dim", self.dim.name().to_lowercase()),
            ("data.lang", self.lang.code().to_string()),
            ("features.drop_slots", self.features.drop_slots.join(",")),
            ("features.min_df", self.features.min_df.to_string()),
            ("features.n_max", self.features.n_range.1.to_string()),
            ("features.n_min", self.features.n_range.0.to_string()),
            ("features.sentiment", self.features.include_sentiment.to_string()),
            ("features.standardize", self.features.standardize.to_string()),
            ("grid.c", join(self.grid_c.iter().map(f64::to_string).collect())),
            ("grid.folds", self.grid_folds.to_string()),
            ("grid.loss", join(self.grid_loss.iter().map(|l| loss_name(*l).to_string()).collect())),
            ("grid.penalty", join(self.grid_penalty.iter().map(|p| penalty_name(*p).to_string()).collect())),
            ("gru.batch", self.gru_batch.to_string()),
            ("gru.dense1", self.gru_dense[0].to_string()),
            ("gru.dense2", self.gru_dense[1].to_string()),
            ("gru.dropout", self.gru_dropout.to_string()),
            ("gru.embed_dim", self.gru_embed_dim.to_string()),
            ("gru.hidden", self.gru_hidden.to_string()),
            ("gru.seq_len", self.gru_seq_len.to_string()),
            ("gru.vocab_cap", self.gru_vocab_cap.to_string()),
            (
                "lime.kernel_width",
                self.lime_kernel_width.map_or_else(|| "auto".to_string(), |w| w.to_string()),
            ),
            ("lime.ridge", self.lime_ridge.to_string()),
            ("lime.samples", self.lime_samples.to_string()),
            ("lime.top_k", self.lime_top_k.to_string()),
            ("linear.c", self.linear_c.to_string()),
            ("linear.epochs", self.linear_epochs.to_string()),
            ("linear.eta0", self.linear_eta0.to_string()),
            ("linear.penalty", penalty_name(self.linear_penalty).to_string()),
            ("model.kind", self.model.name().to_string()),
            ("train.epochs", self.epochs.to_string()),
            ("train.lr", self.lr.to_string()),
            ("train.seed", self.seed.to_string()),
        ];
        debug_assert_eq!(pairs.len(), KNOWN_KEYS.len());
        let mut out = String::new();
        for (key, value) in pairs {
            debug_assert!(KNOWN_KEYS.contains(&key));
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_cfg(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    fn resolve(text: &str, ov: &Overrides) -> Result<Settings, CliError> {
        let f = write_cfg(text);
        let cfg = load_config(f.path())?;
        Settings::resolve(&cfg, ov)
    }

    #[test]
    fn defaults_need_no_config() {
        let s = Settings::resolve(&RawConfig::empty(), &Overrides::default()).unwrap();
        assert_eq!(s.model, ModelKind::Logreg);
        assert_eq!(s.linear_c, 0.1);
        assert_eq!(s.linear_penalty, Penalty::L2);
        assert_eq!(s.features.n_range, (1, 3));
        assert_eq!(s.grid().len(), 16);
        assert_eq!(s.grid_folds, 10);
        assert_eq!(s.clean.collapse_repeats, Some(3));
    }

    #[test]
    fn config_values_and_flag_overrides_stack() {
        let text = "# comment\n\nmodel.kind = linsvc\nlinear.c = 1.5\nclean.collapse_repeats = 0\n\
                    features.drop_slots = capitals, avg_syllable\ndata.lang = es\ntrain.seed = 7\n";
        let s = resolve(text, &Overrides::default()).unwrap();
        assert_eq!(s.model, ModelKind::Linsvc);
        assert_eq!(s.linear_c, 1.5);
        assert_eq!(s.clean.collapse_repeats, None);
        assert_eq!(s.features.drop_slots, ["capitals", "avg_syllable"]);
        assert_eq!(s.lang, Lang::Es);
        assert_eq!(s.seed, 7);

        let ov = Overrides {
            model: Some("bigru".into()),
            lang: Some("en".into()),
            dim: Some("tr".into()),
            seed: Some(99),
        };
        let s = resolve(text, &ov).unwrap();
        assert_eq!(s.model, ModelKind::Bigru);
        assert_eq!(s.lang, Lang::En);
        assert_eq!(s.dim, LabelDim::Tr);
        assert_eq!(s.seed, 99);
    }

    #[test]
    fn errors_carry_file_and_line() {
        let cases = [
            ("linear.c = abc\n", 1, "key linear.c"),
            ("\n\nno_such.key = 1\n", 3, "unknown key"),
            ("model.kind = logreg\nmodel.kind = linsvc\n", 2, "duplicate key"),
            ("just words\n", 1, "expected `key = value`"),
            ("data.lang = fr\n", 1, "unknown language"),
            ("grid.penalty = l1,l3\n", 1, "unknown penalty"),
        ];
        for (text, line, needle) in cases {
            let err = resolve(text, &Overrides::default()).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text:?}");
            let msg = err.to_string();
            assert!(msg.contains(&format!(":{line}")), "{msg} missing line {line}");
            assert!(msg.contains(needle), "{msg} missing {needle:?}");
        }
    }

    #[test]
    fn resolved_text_round_trips() {
        let text = "model.kind = charcnn\ncnn.filters = 8\nlime.kernel_width = 1.25\ntrain.seed = 5\n";
        let s = resolve(text, &Overrides::default()).unwrap();
        let snapshot = s.resolved_text();
        assert!(snapshot.contains("model.kind = charcnn\n"));
        assert!(snapshot.contains("cnn.filters = 8\n"));
        assert!(snapshot.contains("lime.kernel_width = 1.25\n"));

        let again = resolve(&snapshot, &Overrides::default()).unwrap();
        assert_eq!(again.resolved_text(), snapshot);
        // flags beat even the snapshot
        let replay = resolve(&snapshot, &Overrides { seed: Some(6), ..Overrides::default() }).unwrap();
        assert_eq!(replay.seed, 6);
    }

    #[test]
    fn every_known_key_appears_in_the_snapshot() {
        let s = Settings::resolve(&RawConfig::empty(), &Overrides::default()).unwrap();
        let snapshot = s.resolved_text();
        for key in KNOWN_KEYS {
            assert!(
                snapshot.contains(&format!("{key} = ")),
                "{key} missing from resolved snapshot"
            );
        }
        assert_eq!(snapshot.lines().count(), KNOWN_KEYS.len());
    }
}
