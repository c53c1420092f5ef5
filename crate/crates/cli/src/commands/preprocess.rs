//! `hwk preprocess`: run the cleaning pipeline and dump the token view.
//!
//! Output TSV, one row per tweet:
//! `id\ttokens\traw_tokens\thashtags\tmentions`, each list space-joined.
//! A short summary goes to stdout so batch logs show corpus shape.

use std::path::Path;

use crate::config::Settings;
use crate::error::CliError;

pub fn run(settings: &Settings, data: &Path, out: &Path) -> Result<(), CliError> {
    let (ds, tokens) = super::load_and_clean(data, settings.lang, &settings.clean)?;

    let mut tsv = String::from("id\ttokens\traw_tokens\thashtags\tmentions\n");
    let mut token_total = 0usize;
    let mut tagged = 0usize;
    for seq in &tokens {
        token_total += seq.tokens.len();
        tagged += usize::from(!seq.kept_hashtags.is_empty());
        tsv.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            seq.source_id,
            seq.tokens.join(" "),
            seq.raw_tokens.join(" "),
            seq.kept_hashtags.join(" "),
            seq.kept_mentions.join(" "),
        ));
    }
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(CliError::Io)?;
    }
    std::fs::write(out, &tsv).map_err(CliError::Io)?;

    let n = ds.tweets.len();
    println!("split\t{}", ds.split_name);
    println!("tweets\t{n}");
    println!("tokens_per_tweet\t{:.6}", token_total as f64 / n.max(1) as f64);
    println!("tweets_with_hashtags\t{tagged}");
    Ok(())
}
