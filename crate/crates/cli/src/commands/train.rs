//! `hwk train`: fit one model and leave a self-contained run directory.
//!
//! Artifacts, all deterministic for a fixed config + seed:
//! - `resolved.cfg` -- every effective setting; replaying it reproduces
//!   the run byte for byte.
//! - `metrics.csv`, `confusion.svg` -- dev-set scores on the trained
//!   dimension.
//! - `predictions.tsv` -- dev predictions in the shared label layout
//!   (untrained dimensions stay 0).
//! - `log.txt` -- corpus/model shape and headline scores, no timestamps.
//! - model weights: `model.linear` + `pipeline.txt` for the linear kinds,
//!   `model.params` + `history.csv` for the neural ones.

use std::fmt::Write as _;
use std::path::Path;

use hwk_core::autodiff::AdamConfig;
use hwk_core::corpus::Dataset;
use hwk_core::eval::{binary_metrics, confusion};
use hwk_core::features::{FeaturePipeline, SentimentLexicon};
use hwk_core::linear::{train_with_history, TrainConfig};
use hwk_core::neural::{
    bigru_forward, charcnn_forward, train_bigru, train_charcnn, CharQuantizer, CnnHyper,
    GruHyper, TrainOptions, WordVocab,
};
use hwk_core::report::{confusion_svg, metrics_csv};
use hwk_core::textprep::TokenSequence;

use crate::config::{ModelKind, Settings};
use crate::error::CliError;
use crate::runs::{create_run_dir, predictions_tsv, write_artifact, LabelRow};

pub fn run(
    settings: &Settings,
    train_path: &Path,
    dev_path: &Path,
    out_dir: &Path,
) -> Result<(), CliError> {
    create_run_dir(out_dir)?;
    write_artifact(out_dir, "resolved.cfg", &settings.resolved_text())?;

    let (train_ds, train_tokens) = super::load_and_clean(train_path, settings.lang, &settings.clean)?;
    let (dev_ds, dev_tokens) = super::load_and_clean(dev_path, settings.lang, &settings.clean)?;
    let y_train = train_ds.labels_for(settings.dim)?;
    let y_dev = dev_ds.labels_for(settings.dim)?;

    let mut log = String::new();
    let _ = writeln!(log, "command = train");
    let _ = writeln!(log, "model = {}", settings.model.name());
    let _ = writeln!(log, "lang = {}", settings.lang.code());
    let _ = writeln!(log, "dim = {}", settings.dim.name());
    let _ = writeln!(log, "seed = {}", settings.seed);
    let _ = writeln!(log, "train_rows = {}", train_ds.tweets.len());
    let _ = writeln!(log, "dev_rows = {}", dev_ds.tweets.len());

    let dev_pred = match settings.model {
        ModelKind::Logreg | ModelKind::Linsvc => {
            fit_linear(settings, &train_ds, &train_tokens, &y_train, &dev_ds, &dev_tokens, out_dir, &mut log)?
        }
        ModelKind::Bigru => {
            fit_bigru(settings, &train_tokens, &y_train, &dev_tokens, &y_dev, out_dir, &mut log)?
        }
        ModelKind::Charcnn => {
            fit_charcnn(settings, &train_ds, &y_train, &dev_ds, &y_dev, out_dir, &mut log)?
        }
    };

    let report = binary_metrics(&y_dev, &dev_pred)?;
    let cm = confusion(&y_dev, &dev_pred)?;
    let title = format!("{} dev ({})", settings.dim.name(), settings.lang.code());
    write_artifact(out_dir, "metrics.csv", &metrics_csv(&[(settings.dim.name(), report.clone())]))?;
    write_artifact(out_dir, "confusion.svg", &confusion_svg(&cm, &title))?;

    let col = super::dim_col(settings.dim);
    let rows: Vec<LabelRow> = dev_ds
        .tweets
        .iter()
        .zip(&dev_pred)
        .map(|(tweet, &p)| {
            let mut bits = [false; 3];
            bits[col] = p;
            (tweet.id.clone(), bits)
        })
        .collect();
    write_artifact(out_dir, "predictions.tsv", &predictions_tsv(&rows))?;

    let _ = writeln!(log, "dev_macro_f1 = {:.6}", report.macro_f1);
    let _ = writeln!(log, "dev_accuracy = {:.6}", report.accuracy);
    write_artifact(out_dir, "log.txt", &log)?;

    println!("macro_f1\t{:.6}", report.macro_f1);
    println!("accuracy\t{:.6}", report.accuracy);
    println!("run_dir\t{}", out_dir.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn fit_linear(
    settings: &Settings,
    train_ds: &Dataset,
    train_tokens: &[TokenSequence],
    y_train: &[bool],
    dev_ds: &Dataset,
    dev_tokens: &[TokenSequence],
    out_dir: &Path,
    log: &mut String,
) -> Result<Vec<bool>, CliError> {
    let lexicon = SentimentLexicon::default_for(settings.lang);
    let pipeline =
        FeaturePipeline::fit(&train_ds.tweets, train_tokens, lexicon, &settings.features)?;
    let x_train = pipeline.transform_batch(&train_ds.tweets, train_tokens);
    let x_dev = pipeline.transform_batch(&dev_ds.tweets, dev_tokens);

    let cfg = TrainConfig {
        loss: settings.model.loss().expect("linear kinds have a loss"),
        penalty: settings.linear_penalty,
        c: settings.linear_c,
        seed: settings.seed,
        epochs: settings.linear_epochs,
        eta0: settings.linear_eta0,
        dim: None,
    };
    let (mut model, history) = train_with_history(&x_train, y_train, &cfg)?;
    model.bind_vocab(pipeline.vocab());

    let _ = writeln!(log, "vocab_terms = {}", pipeline.vocab().len());
    let _ = writeln!(log, "feature_dim = {}", model.dim());
    if let Some(last) = history.last() {
        let _ = writeln!(log, "final_objective = {last:.6}");
    }

    let preds: Result<Vec<bool>, _> = x_dev.iter().map(|x| model.predict(x)).collect();
    model.save(out_dir.join("model.linear"))?;
    pipeline.save(out_dir.join("pipeline.txt"))?;
    Ok(preds?)
}

fn fit_bigru(
    settings: &Settings,
    train_tokens: &[TokenSequence],
    y_train: &[bool],
    dev_tokens: &[TokenSequence],
    y_dev: &[bool],
    out_dir: &Path,
    log: &mut String,
) -> Result<Vec<bool>, CliError> {
    let vocab = WordVocab::build(
        train_tokens.iter().map(|s| s.tokens.as_slice()),
        Some(settings.gru_vocab_cap),
    );
    let encode = |seqs: &[TokenSequence]| -> Vec<Vec<usize>> {
        seqs.iter().map(|s| vocab.encode(&s.tokens, settings.gru_seq_len)).collect()
    };
    let x_train = encode(train_tokens);
    let x_dev = encode(dev_tokens);
    let hyper = GruHyper {
        vocab_size: vocab.size(),
        seq_len: settings.gru_seq_len,
        embed_dim: settings.gru_embed_dim,
        hidden: settings.gru_hidden,
        dense: settings.gru_dense,
        dropout: settings.gru_dropout,
        batch: settings.gru_batch,
        classes: 2,
    };
    let result = train_neural(settings, log, |opts| {
        train_bigru(&hyper, &x_train, y_train, &x_dev, y_dev, opts)
    })?;
    let _ = writeln!(log, "vocab_size = {}", vocab.size());

    let preds: Result<Vec<bool>, _> = x_dev
        .iter()
        .map(|ids| bigru_forward(&hyper, &result.params, ids).map(|p| p[1] > p[0]))
        .collect();
    result.params.save(out_dir.join("model.params"))?;
    write_artifact(out_dir, "history.csv", &result.history_csv())?;
    Ok(preds?)
}

fn fit_charcnn(
    settings: &Settings,
    train_ds: &Dataset,
    y_train: &[bool],
    dev_ds: &Dataset,
    y_dev: &[bool],
    out_dir: &Path,
    log: &mut String,
) -> Result<Vec<bool>, CliError> {
    let quantizer = CharQuantizer::with_len(settings.cnn_len)?;
    // The quantizer's alphabet is lowercase; honor the cleaning config's
    // case choice on the raw character stream.
    let encode = |ds: &Dataset| -> Vec<Vec<f64>> {
        ds.tweets
            .iter()
            .map(|t| {
                if settings.clean.lowercase {
                    quantizer.quantize(&t.text.to_lowercase())
                } else {
                    quantizer.quantize(&t.text)
                }
            })
            .collect()
    };
    let x_train = encode(train_ds);
    let x_dev = encode(dev_ds);
    let hyper = CnnHyper {
        m: quantizer.m(),
        l: settings.cnn_len,
        conv_layers: settings.cnn_layers,
        filters: settings.cnn_filters,
        kernel: settings.cnn_kernel,
        pool: settings.cnn_pool,
        dense: settings.cnn_dense,
        dropout: settings.cnn_dropout,
        batch: settings.cnn_batch,
        classes: 2,
    };
    let result = train_neural(settings, log, |opts| {
        train_charcnn(&hyper, &x_train, y_train, &x_dev, y_dev, opts)
    })?;
    let _ = writeln!(log, "alphabet = {}", quantizer.m());

    let preds: Result<Vec<bool>, _> = x_dev
        .iter()
        .map(|x| charcnn_forward(&hyper, &result.params, x).map(|p| p[1] > p[0]))
        .collect();
    result.params.save(out_dir.join("model.params"))?;
    write_artifact(out_dir, "history.csv", &result.history_csv())?;
    Ok(preds?)
}

fn train_neural<E>(
    settings: &Settings,
    log: &mut String,
    train: impl FnOnce(&TrainOptions) -> Result<hwk_core::neural::TrainResult, E>,
) -> Result<hwk_core::neural::TrainResult, E> {
    let opts = TrainOptions {
        epochs: settings.epochs,
        seed: settings.seed,
        adam: AdamConfig { lr: settings.lr, ..AdamConfig::default() },
    };
    let result = train(&opts)?;
    let _ = writeln!(log, "best_epoch = {}", result.best_epoch);
    Ok(result)
}
