//! `hwk gridsearch`: stratified k-fold CV over the configured linear grid.
//!
//! Writes every grid point's fold scores (`cv_results.csv`, grid order)
//! and a `best.cfg` -- the run's full resolved settings with the winning
//! loss/penalty/C substituted -- which feeds straight back into
//! `hwk train --config best.cfg`.

use std::fmt::Write as _;
use std::path::Path;

use hwk_core::features::{FeaturePipeline, SentimentLexicon};
use hwk_core::linear::{grid_search_cv, Loss, TrainConfig};

use crate::config::{loss_name, penalty_name, ModelKind, Settings};
use crate::error::CliError;
use crate::runs::{create_run_dir, write_artifact};

pub fn run(settings: &Settings, train_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    create_run_dir(out_dir)?;
    write_artifact(out_dir, "resolved.cfg", &settings.resolved_text())?;

    let (ds, tokens) = super::load_and_clean(train_path, settings.lang, &settings.clean)?;
    let y = ds.labels_for(settings.dim)?;
    let lexicon = SentimentLexicon::default_for(settings.lang);
    let pipeline = FeaturePipeline::fit(&ds.tweets, &tokens, lexicon, &settings.features)?;
    let x = pipeline.transform_batch(&ds.tweets, &tokens);

    let grid = settings.grid();
    let base = TrainConfig {
        seed: settings.seed,
        epochs: settings.linear_epochs,
        eta0: settings.linear_eta0,
        dim: None,
        ..TrainConfig::default()
    };
    let search = grid_search_cv(&x, &y, &grid, settings.grid_folds, &base)?;

    let mut csv = String::from("loss,penalty,c,mean_macro_f1,std_macro_f1,fold_scores\n");
    for r in &search.results {
        let folds: Vec<String> = r.fold_scores.iter().map(|s| format!("{s:.6}")).collect();
        let _ = writeln!(
            csv,
            "{},{},{},{:.6},{:.6},{}",
            loss_name(r.params.loss),
            penalty_name(r.params.penalty),
            r.params.c,
            r.mean,
            r.std,
            folds.join(";"),
        );
    }
    write_artifact(out_dir, "cv_results.csv", &csv)?;

    let mut winner = settings.clone();
    winner.model = match search.best.loss {
        Loss::Logistic => ModelKind::Logreg,
        Loss::Hinge => ModelKind::Linsvc,
    };
    winner.linear_penalty = search.best.penalty;
    winner.linear_c = search.best.c;
    write_artifact(out_dir, "best.cfg", &winner.resolved_text())?;

    let best_mean = search
        .results
        .iter()
        .find(|r| r.params == search.best)
        .map(|r| r.mean)
        .unwrap_or(f64::NAN);
    let mut log = String::new();
    let _ = writeln!(log, "command = gridsearch");
    let _ = writeln!(log, "rows = {}", ds.tweets.len());
    let _ = writeln!(log, "vocab_terms = {}", pipeline.vocab().len());
    let _ = writeln!(log, "folds = {}", settings.grid_folds);
    let _ = writeln!(log, "grid_points = {}", grid.len());
    let _ = writeln!(
        log,
        "best = loss={} penalty={} c={}",
        loss_name(search.best.loss),
        penalty_name(search.best.penalty),
        search.best.c
    );
    let _ = writeln!(log, "best_mean_macro_f1 = {best_mean:.6}");
    write_artifact(out_dir, "log.txt", &log)?;

    println!(
        "best\tloss={} penalty={} c={}",
        loss_name(search.best.loss),
        penalty_name(search.best.penalty),
        search.best.c
    );
    println!("best_mean_macro_f1\t{best_mean:.6}");
    println!("run_dir\t{}", out_dir.display());
    Ok(())
}
