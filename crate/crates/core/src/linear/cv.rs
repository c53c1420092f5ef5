//! Stratified k-fold cross-validation and hyper-parameter grid search.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{train, LinearError, Loss, Penalty, TrainConfig};
use crate::eval::macro_f1;
use crate::features::SparseVector;
use crate::par::{self, derive_seed};

/// One point of the hyper-parameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub loss: Loss,
    pub penalty: Penalty,
    pub c: f64,
}

/// The grid used when nothing else is configured:
/// {logistic, hinge} × {l1, l2} × {0.01, 0.1, 1, 10}.
pub fn default_grid() -> Vec<GridPoint> {
    let mut grid = Vec::with_capacity(16);
    for loss in [Loss::Logistic, Loss::Hinge] {
        for penalty in [Penalty::L1, Penalty::L2] {
            for c in [0.01, 0.1, 1.0, 10.0] {
                grid.push(GridPoint { loss, penalty, c });
            }
        }
    }
    grid
}

/// Cross-validation outcome for a single grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct CVResult {
    pub params: GridPoint,
    /// Held-out macro-F1 per fold, fold order.
    pub fold_scores: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation of the fold scores.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub best: GridPoint,
    /// One entry per grid point, grid order.
    pub results: Vec<CVResult>,
}

/// Splits `0..y.len()` into `k` disjoint folds whose class rates stay within
/// one sample of the global rate: each class's indices are shuffled with the
/// seed and dealt round-robin. Errs unless every class has at least `k`
/// samples, which also guarantees every fold contains both classes.
pub fn stratified_kfold(y: &[bool], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, LinearError> {
    if k < 2 {
        return Err(LinearError::BadConfig(format!("k must be at least 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    for class in [false, true] {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if members.len() < k {
            return Err(LinearError::ClassTooSmall {
                class: usize::from(class),
                have: members.len(),
                need: k,
            });
        }
        members.shuffle(&mut rng);
        for (pos, idx) in members.into_iter().enumerate() {
            folds[pos % k].push(idx);
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

/// Exhaustive grid search scored by mean held-out macro-F1 over stratified
/// k-fold splits. Folds are built once from `base.seed`; each (grid point,
/// fold) run trains with its own derived seed, and runs may execute in
/// parallel. Ties on the mean resolve to the earliest grid point. Every
/// grid point's result is reported alongside the winner.
pub fn grid_search_cv(
    x: &[SparseVector],
    y: &[bool],
    grid: &[GridPoint],
    k: usize,
    base: &TrainConfig,
) -> Result<GridSearchResult, LinearError> {
    if grid.is_empty() {
        return Err(LinearError::EmptyGrid);
    }
    if x.len() != y.len() {
        return Err(LinearError::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let folds = stratified_kfold(y, k, base.seed)?;
    let dim = base.dim.unwrap_or_else(|| {
        x.iter().filter_map(|v| v.pairs().last()).map(|&(i, _)| i + 1).max().unwrap_or(0)
    });

    let runs = par::map_range(grid.len() * k, |run| -> Result<f64, LinearError> {
        let (gi, fold) = (run / k, run % k);
        let point = grid[gi];
        let heldout = &folds[fold];
        let train_idx: Vec<usize> =
            (0..k).filter(|&f| f != fold).flat_map(|f| folds[f].iter().copied()).collect();
        let xs: Vec<SparseVector> = train_idx.iter().map(|&i| x[i].clone()).collect();
        let ys: Vec<bool> = train_idx.iter().map(|&i| y[i]).collect();
        let cfg = TrainConfig {
            loss: point.loss,
            penalty: point.penalty,
            c: point.c,
            seed: derive_seed(base.seed, run as u64 + 1),
            dim: Some(dim),
            ..base.clone()
        };
        let model = train(&xs, &ys, &cfg)?;
        let y_true: Vec<bool> = heldout.iter().map(|&i| y[i]).collect();
        let y_pred = heldout
            .iter()
            .map(|&i| model.predict(&x[i]))
            .collect::<Result<Vec<bool>, _>>()?;
        Ok(macro_f1(&y_true, &y_pred).expect("fold is non-empty and lengths match"))
    });

    let mut results = Vec::with_capacity(grid.len());
    let mut scores = runs.into_iter();
    for &params in grid {
        let fold_scores =
            (0..k).map(|_| scores.next().unwrap()).collect::<Result<Vec<f64>, _>>()?;
        let mean = fold_scores.iter().sum::<f64>() / k as f64;
        let var = fold_scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / k as f64;
        results.push(CVResult { params, fold_scores, mean, std: var.sqrt() });
    }
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.mean > results[best].mean {
            best = i;
        }
    }
    Ok(GridSearchResult { best: results[best].params, results })
}
