//! `hwk audit`: annotation-drift report between two labeled splits.
//!
//! Prints the human-readable discrepancy table; with `--out-dir` also
//! writes `discrepancy.csv` and the top-10 hashtag tables of both splits.

use std::path::Path;

use hwk_core::analysis::{discrepancy_report, hashtag_csv, hashtag_stats, top_hashtag_share};
use hwk_core::corpus::{load_dataset, Lang};

use crate::error::CliError;
use crate::runs::{create_run_dir, write_artifact};

pub fn run(
    lang: Lang,
    min_support: usize,
    train_path: &Path,
    test_path: &Path,
    out_dir: Option<&Path>,
) -> Result<(), CliError> {
    let train = load_dataset(train_path, lang)?;
    let test = load_dataset(test_path, lang)?;
    let report = discrepancy_report(&train, &test, min_support)?;

    if let Some(dir) = out_dir {
        create_run_dir(dir)?;
        write_artifact(dir, "discrepancy.csv", &report.to_csv())?;
        write_artifact(dir, "hashtags_train.csv", &hashtag_csv(&hashtag_stats(&train, 10)))?;
        write_artifact(dir, "hashtags_test.csv", &hashtag_csv(&hashtag_stats(&test, 10)))?;
    }

    print!("{}", report.to_text());
    println!("top10_hashtag_share_train\t{:.6}", top_hashtag_share(&train, 10));
    println!("top10_hashtag_share_test\t{:.6}", top_hashtag_share(&test, 10));
    Ok(())
}
