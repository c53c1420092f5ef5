//! Batched Adam training with per-epoch validation.
//!
//! One run is single-threaded and fully determined by its seed: parameter
//! initialization, per-epoch shuffles and every dropout mask derive their
//! streams from it. Each batch builds a fresh tape over the current
//! parameters, backpropagates the mean cross-entropy, and applies one Adam
//! step per buffer against persistent optimizer state. After every epoch the
//! validation split is scored with macro-F1 (dropout off) and the best
//! epoch's parameters are retained — an early-selection rule: on ties the
//! earlier epoch wins, and the returned parameters are that snapshot, not
//! the final iterate.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    bigru_graph, charcnn_graph, cnn_params, gru_params, Bound, CnnHyper, GruHyper, NeuralError,
    ParamSet, Phase,
};
use crate::autodiff::{adam_step, AdamConfig, AdamState, Tape, Var};
use crate::eval::macro_f1;
use crate::par::{self, derive_seed};

/// A trainable architecture: parameter layout plus a graph builder. Both
/// hyper-parameter structs implement it, which is what lets one training
/// loop serve the GRU (id sequences) and the CNN (quantized matrices).
pub trait Net {
    type Input;

    fn classes(&self) -> usize;
    fn batch(&self) -> usize;
    fn init_params(&self, seed: u64) -> Result<ParamSet, NeuralError>;
    fn graph(
        &self,
        tape: &Tape,
        params: &Bound,
        x: &Self::Input,
        phase: Phase,
    ) -> Result<Var, NeuralError>;
}

impl Net for GruHyper {
    type Input = Vec<usize>;

    fn classes(&self) -> usize {
        self.classes
    }

    fn batch(&self) -> usize {
        self.batch
    }

    fn init_params(&self, seed: u64) -> Result<ParamSet, NeuralError> {
        gru_params(self, seed)
    }

    fn graph(
        &self,
        tape: &Tape,
        params: &Bound,
        x: &Self::Input,
        phase: Phase,
    ) -> Result<Var, NeuralError> {
        bigru_graph(tape, self, params, x, phase)
    }
}

impl Net for CnnHyper {
    type Input = Vec<f64>;

    fn classes(&self) -> usize {
        self.classes
    }

    fn batch(&self) -> usize {
        self.batch
    }

    fn init_params(&self, seed: u64) -> Result<ParamSet, NeuralError> {
        cnn_params(self, seed)
    }

    fn graph(
        &self,
        tape: &Tape,
        params: &Bound,
        x: &Self::Input,
        phase: Phase,
    ) -> Result<Var, NeuralError> {
        charcnn_graph(tape, self, params, x, phase)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub epochs: usize,
    pub seed: u64,
    pub adam: AdamConfig,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions { epochs: 20, seed: 42, adam: AdamConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean per-sample cross-entropy over the epoch, measured as each batch
    /// is trained (so later batches see slightly newer parameters).
    pub train_loss: f64,
    pub val_macro_f1: f64,
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    /// Parameters from the best validation epoch.
    pub params: ParamSet,
    pub history: Vec<EpochStats>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
}

impl TrainResult {
    /// `epoch,train_loss,val_macro_f1` rows, one per epoch.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_macro_f1\n");
        for e in &self.history {
            out.push_str(&format!("{},{:.6},{:.6}\n", e.epoch, e.train_loss, e.val_macro_f1));
        }
        out
    }
}

/// Train `net` on `(train_x, train_y)` and score `(val_x, val_y)` after
/// every epoch. Binary labels only (`classes` must be 2).
pub fn train_classifier<N: Net>(
    net: &N,
    train_x: &[N::Input],
    train_y: &[bool],
    val_x: &[N::Input],
    val_y: &[bool],
    opts: &TrainOptions,
) -> Result<TrainResult, NeuralError> {
    if opts.epochs == 0 {
        return Err(NeuralError::BadConfig("epochs must be positive".into()));
    }
    if net.classes() != 2 {
        return Err(NeuralError::BadConfig(format!(
            "binary training needs classes = 2, hyper says {}",
            net.classes()
        )));
    }
    if train_x.is_empty() {
        return Err(NeuralError::EmptyData("training"));
    }
    if val_x.is_empty() {
        return Err(NeuralError::EmptyData("validation"));
    }
    if train_x.len() != train_y.len() {
        return Err(NeuralError::LengthMismatch { inputs: train_x.len(), labels: train_y.len() });
    }
    if val_x.len() != val_y.len() {
        return Err(NeuralError::LengthMismatch { inputs: val_x.len(), labels: val_y.len() });
    }

    let mut params = net.init_params(derive_seed(opts.seed, 0))?;
    let mut adam: Vec<AdamState> =
        params.iter().map(|(_, _, data)| AdamState::new(data.len())).collect();
    let n = train_x.len();
    let batch = net.batch();
    let mut history = Vec::with_capacity(opts.epochs);
    let mut best: Option<(ParamSet, usize, f64)> = None;

    for epoch in 1..=opts.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        let shuffle_seed = derive_seed(derive_seed(opts.seed, 1), epoch as u64);
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));
        let drop_base = derive_seed(derive_seed(opts.seed, 2), epoch as u64);

        let mut loss_sum = 0.0;
        for (b, chunk) in order.chunks(batch).enumerate() {
            let tape = Tape::new();
            let bound = params.bind(&tape)?;
            let mut losses = Vec::with_capacity(chunk.len());
            for (s, &i) in chunk.iter().enumerate() {
                let sample_seed = derive_seed(drop_base, (b * batch + s) as u64);
                let probs =
                    net.graph(&tape, &bound, &train_x[i], Phase::Train { seed: sample_seed })?;
                let target = if train_y[i] { [0.0, 1.0] } else { [1.0, 0.0] };
                losses.push(tape.cross_entropy(probs, &target)?);
            }
            let loss = tape.mean_scalars(&losses)?;
            tape.backward(loss)?;
            loss_sum += tape.value(loss)[0] * chunk.len() as f64;

            let mut grads = Vec::with_capacity(params.len());
            for (name, _, _) in params.iter() {
                grads.push(tape.grad(bound.get(name)?));
            }
            for (((_, _, data), grad), state) in
                params.iter_mut().zip(&grads).zip(adam.iter_mut())
            {
                adam_step(data, grad, state, &opts.adam)?;
            }
        }

        let tape = Tape::new();
        let bound = params.bind(&tape)?;
        let mut preds = Vec::with_capacity(val_x.len());
        for x in val_x {
            let probs = net.graph(&tape, &bound, x, Phase::Eval)?;
            let v = tape.value(probs);
            preds.push(v[1] > v[0]);
        }
        let f1 = macro_f1(val_y, &preds).expect("validation split is non-empty and aligned");

        if best.as_ref().is_none_or(|(_, _, bf)| f1 > *bf) {
            best = Some((params.clone(), epoch, f1));
        }
        history.push(EpochStats { epoch, train_loss: loss_sum / n as f64, val_macro_f1: f1 });
    }

    let (params, best_epoch, _) = best.expect("at least one epoch ran");
    Ok(TrainResult { params, history, best_epoch })
}

pub fn train_bigru(
    hyper: &GruHyper,
    train_x: &[Vec<usize>],
    train_y: &[bool],
    val_x: &[Vec<usize>],
    val_y: &[bool],
    opts: &TrainOptions,
) -> Result<TrainResult, NeuralError> {
    train_classifier(hyper, train_x, train_y, val_x, val_y, opts)
}

pub fn train_charcnn(
    hyper: &CnnHyper,
    train_x: &[Vec<f64>],
    train_y: &[bool],
    val_x: &[Vec<f64>],
    val_y: &[bool],
    opts: &TrainOptions,
) -> Result<TrainResult, NeuralError> {
    train_classifier(hyper, train_x, train_y, val_x, val_y, opts)
}

/// Best-epoch validation macro-F1 of each run, with mean and population
/// standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub scores: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

/// Repeat training `runs` times under decoupled seeds derived from
/// `opts.seed` and summarize the best-epoch validation macro-F1 scores.
/// Runs are independent and execute in parallel; the summary is
/// deterministic either way.
pub fn evaluate_over_seeds<N>(
    net: &N,
    train_x: &[N::Input],
    train_y: &[bool],
    val_x: &[N::Input],
    val_y: &[bool],
    opts: &TrainOptions,
    runs: usize,
) -> Result<RunSummary, NeuralError>
where
    N: Net + Sync,
    N::Input: Sync,
{
    if runs == 0 {
        return Err(NeuralError::BadConfig("need at least one run".into()));
    }
    let results = par::map_range(runs, |i| {
        let run_opts =
            TrainOptions { seed: derive_seed(opts.seed, 0x5eed_0000 + i as u64), ..opts.clone() };
        let result = train_classifier(net, train_x, train_y, val_x, val_y, &run_opts)?;
        Ok(result.history[result.best_epoch - 1].val_macro_f1)
    });
    let scores: Vec<f64> = results.into_iter().collect::<Result<_, NeuralError>>()?;
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / scores.len() as f64;
    Ok(RunSummary { scores, mean, std: var.sqrt() })
}
