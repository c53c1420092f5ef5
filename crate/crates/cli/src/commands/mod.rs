//! One module per subcommand, plus the loading helpers they share.

pub mod audit;
pub mod evaluate;
pub mod explain;
pub mod gridsearch;
pub mod preprocess;
pub mod train;

use std::path::Path;

use hwk_core::corpus::{load_dataset, Dataset, LabelDim, Lang};
use hwk_core::par;
use hwk_core::textprep::{preprocess as clean_tweet, CleanConfig, TokenSequence};

use crate::error::CliError;

/// Load a dataset TSV and run the cleaning pipeline over every tweet.
pub(crate) fn load_and_clean(
    path: &Path,
    lang: Lang,
    clean: &CleanConfig,
) -> Result<(Dataset, Vec<TokenSequence>), CliError> {
    let ds = load_dataset(path, lang)?;
    let tokens = par::map_collect(&ds.tweets, |t| clean_tweet(t, clean));
    Ok((ds, tokens))
}

/// Column of `dim` in the `[HS, TR, AG]` bit layout.
pub(crate) fn dim_col(dim: LabelDim) -> usize {
    match dim {
        LabelDim::Hs => 0,
        LabelDim::Tr => 1,
        LabelDim::Ag => 2,
    }
}
