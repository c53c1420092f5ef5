//! `hwk explain`: model interpretation for a finished linear run.
//!
//! With `--text`, fits a local LIME surrogate around one tweet, re-running
//! the run's full cleaning + feature pipeline on every perturbation.
//! Without it, ranks the global TF-IDF weights of the stored model.
//! Neural run directories are rejected: they do not persist their word
//! vocabulary or quantizer, so their inputs cannot be re-encoded here.

use std::path::Path;

use hwk_core::corpus::Tweet;
use hwk_core::explain::{lime_explain, linear_importance, LimeConfig};
use hwk_core::features::{FeaturePipeline, SentimentLexicon};
use hwk_core::linear::LinearModel;
use hwk_core::report::{explanation_svg, explanation_text, importance_csv};
use hwk_core::textprep::preprocess;

use crate::config::{load_config, Overrides, Settings};
use crate::error::CliError;
use crate::runs::{create_run_dir, write_artifact};

pub fn run(run_dir: &Path, text: Option<&str>, out_dir: Option<&Path>) -> Result<(), CliError> {
    let cfg_path = run_dir.join("resolved.cfg");
    if !cfg_path.is_file() {
        return Err(CliError::Data(format!(
            "{} is not a run directory (no resolved.cfg)",
            run_dir.display()
        )));
    }
    let settings = Settings::resolve(&load_config(&cfg_path)?, &Overrides::default())?;
    if !settings.model.is_linear() {
        return Err(CliError::Data(format!(
            "run was trained with model {}; explain needs a linear run (logreg or linsvc)",
            settings.model.name()
        )));
    }

    let lexicon = SentimentLexicon::default_for(settings.lang);
    let pipeline = FeaturePipeline::load(run_dir.join("pipeline.txt"), lexicon)?;
    let model = LinearModel::load(run_dir.join("model.linear"))?;
    model.verify_vocab(pipeline.vocab())?;

    match text {
        Some(text) => local_explanation(&settings, &pipeline, &model, text, out_dir),
        None => global_importance(&settings, &pipeline, &model, out_dir),
    }
}

fn local_explanation(
    settings: &Settings,
    pipeline: &FeaturePipeline,
    model: &LinearModel,
    text: &str,
    out_dir: Option<&Path>,
) -> Result<(), CliError> {
    let probe = |text: &str| -> Result<[f64; 2], CliError> {
        let tweet = Tweet {
            id: "query".to_string(),
            text: text.to_string(),
            lang: settings.lang,
            labels: None,
        };
        let tokens = preprocess(&tweet, &settings.clean);
        Ok(model.predict_proba(&pipeline.transform(&tweet, &tokens))?)
    };
    // Surface dimension/vocab problems as a real error before lime starts.
    probe(text)?;

    let query = Tweet {
        id: "query".to_string(),
        text: text.to_string(),
        lang: settings.lang,
        labels: None,
    };
    let tokens = preprocess(&query, &settings.clean);
    let cfg = LimeConfig {
        n_samples: settings.lime_samples,
        top_k: settings.lime_top_k,
        kernel_width: settings.lime_kernel_width,
        ridge: settings.lime_ridge,
        seed: settings.seed,
    };
    let explanation = lime_explain(
        |perturbed| probe(perturbed).expect("probe succeeded on the original text").to_vec(),
        &tokens,
        &cfg,
    )?;

    let json = explanation_text(&explanation);
    match out_dir {
        Some(dir) => {
            create_run_dir(dir)?;
            write_artifact(dir, "explanation.json", &json)?;
            write_artifact(dir, "explanation.svg", &explanation_svg(&explanation))?;
            println!("explanation\t{}", dir.join("explanation.json").display());
        }
        None => print!("{json}"),
    }
    Ok(())
}

fn global_importance(
    settings: &Settings,
    pipeline: &FeaturePipeline,
    model: &LinearModel,
    out_dir: Option<&Path>,
) -> Result<(), CliError> {
    let ranked = linear_importance(model, pipeline.vocab(), settings.lime_top_k)?;
    let csv = importance_csv(&ranked);
    match out_dir {
        Some(dir) => {
            create_run_dir(dir)?;
            write_artifact(dir, "importance.csv", &csv)?;
            println!("importance\t{}", dir.join("importance.csv").display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
