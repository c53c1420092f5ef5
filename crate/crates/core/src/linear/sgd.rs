//! Stochastic subgradient descent on `J = (1/n) Σ loss + (1/C) R(w)`.
//!
//! One epoch = one seeded shuffle of the training set, one update per sample.
//! Three standard tricks keep each update O(nnz):
//!
//! * L2 shrinkage multiplies a global scale instead of every weight
//!   (`w = scale · v`).
//! * The Polyak average is settled lazily per coordinate: between touches
//!   `v[j]` is constant, so its contribution to `Σ_t w_t[j]` is
//!   `v[j] · Σ_t scale_t`, a difference of two prefix sums.
//! * L1 uses the cumulative-penalty proximal scheme (Tsuruoka et al.):
//!   a pending penalty accrues every step and is applied to a coordinate
//!   when next touched, clipping at zero — which is what makes the final
//!   weights exactly sparse.
//!
//! After every epoch the full objective is evaluated on the averaged iterate
//! and the best such snapshot is retained, so the checkpoint history — the
//! objective of the model you would get by stopping there — is non-increasing
//! by construction. L2 models return the retained snapshot; L1 models return
//! the final proximal iterate, which is what carries the exact zeros.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{LinearError, LinearModel, Loss, Penalty, TrainConfig};
use crate::features::SparseVector;
use crate::par::derive_seed;

/// `J` restricted to the samples actually being optimized.
fn objective_at(
    x: &[SparseVector],
    y: &[bool],
    idx: &[usize],
    weights: &[f64],
    bias: f64,
    cfg: &TrainConfig,
) -> f64 {
    let mut total = 0.0;
    for &i in idx {
        let m = x[i].dot(weights) + bias;
        let ym = if y[i] { m } else { -m };
        total += match cfg.loss {
            Loss::Logistic => {
                if ym > 0.0 {
                    (-ym).exp().ln_1p()
                } else {
                    -ym + ym.exp().ln_1p()
                }
            }
            Loss::Hinge => (1.0 - ym).max(0.0),
        };
    }
    let reg: f64 = match cfg.penalty {
        Penalty::L1 => weights.iter().map(|w| w.abs()).sum(),
        Penalty::L2 => 0.5 * weights.iter().map(|w| w * w).sum::<f64>(),
    };
    total / idx.len().max(1) as f64 + reg / cfg.c
}

struct State {
    v: Vec<f64>,
    scale: f64,
    bias: f64,
    // Lazy Polyak averaging.
    wsum: Vec<f64>,
    last_s: Vec<f64>,
    sprefix: f64,
    bias_sum: f64,
    steps: u64,
    // Lazy cumulative L1 penalty.
    upen: f64,
    q: Vec<f64>,
}

impl State {
    fn new(dim: usize) -> Self {
        State {
            v: vec![0.0; dim],
            scale: 1.0,
            bias: 0.0,
            wsum: vec![0.0; dim],
            last_s: vec![0.0; dim],
            sprefix: 0.0,
            bias_sum: 0.0,
            steps: 0,
            upen: 0.0,
            q: vec![0.0; dim],
        }
    }

    /// Credits `j`'s averaged sum for the steps since its last touch.
    fn settle(&mut self, j: usize) {
        self.wsum[j] += self.v[j] * (self.sprefix - self.last_s[j]);
        self.last_s[j] = self.sprefix;
    }

    /// Applies the pending L1 penalty to `j`, clipping at zero.
    fn apply_penalty(&mut self, j: usize) {
        let z = self.v[j];
        if z > 0.0 {
            self.v[j] = (z - (self.upen + self.q[j])).max(0.0);
        } else if z < 0.0 {
            self.v[j] = (z + (self.upen - self.q[j])).min(0.0);
        }
        self.q[j] += self.v[j] - z;
    }

    /// Folds the global scale back into `v` when it underflows.
    fn renormalize(&mut self) {
        for j in 0..self.v.len() {
            self.settle(j);
            self.v[j] *= self.scale;
        }
        self.scale = 1.0;
    }

    fn margin(&self, x: &SparseVector) -> f64 {
        self.scale * x.dot(&self.v) + self.bias
    }

    fn step(&mut self, x: &SparseVector, g: f64, lr: f64, lambda: f64, penalty: Penalty) {
        match penalty {
            Penalty::L2 => {
                // eta0 is clamped so this factor stays in (0, 1).
                self.scale *= 1.0 - lr * lambda;
                if self.scale < 1e-9 {
                    self.renormalize();
                }
            }
            Penalty::L1 => self.upen += lr * lambda,
        }
        for &(j, xv) in x.pairs() {
            self.settle(j);
            if g != 0.0 {
                self.v[j] -= lr * g * xv / self.scale;
            }
            if penalty == Penalty::L1 {
                self.apply_penalty(j);
            }
        }
        if g != 0.0 {
            self.bias -= lr * g;
        }
        self.sprefix += self.scale;
        self.steps += 1;
        self.bias_sum += self.bias;
    }

    fn averaged(&mut self) -> (Vec<f64>, f64) {
        for j in 0..self.v.len() {
            self.settle(j);
        }
        let t = self.steps.max(1) as f64;
        (self.wsum.iter().map(|w| w / t).collect(), self.bias_sum / t)
    }

    /// Last iterate, with any pending L1 penalty flushed first.
    fn last(&mut self, penalty: Penalty) -> (Vec<f64>, f64) {
        if penalty == Penalty::L1 {
            for j in 0..self.v.len() {
                self.settle(j);
                self.apply_penalty(j);
            }
        }
        (self.v.iter().map(|v| v * self.scale).collect(), self.bias)
    }
}

/// dL/dm at margin `m` for a sample with sign `y ∈ {-1, +1}`.
fn grad(loss: Loss, m: f64, sign: f64) -> f64 {
    match loss {
        // d/dm ln(1 + e^{-ym}) = -y σ(-ym)
        Loss::Logistic => {
            let ym = sign * m;
            let s = if ym >= 0.0 {
                let e = (-ym).exp();
                e / (1.0 + e)
            } else {
                1.0 / (1.0 + ym.exp())
            };
            -sign * s
        }
        Loss::Hinge => {
            if sign * m < 1.0 {
                -sign
            } else {
                0.0
            }
        }
    }
}

pub(super) fn fit(
    x: &[SparseVector],
    y: &[bool],
    cfg: &TrainConfig,
) -> Result<(LinearModel, Vec<f64>), LinearError> {
    let dim = cfg.dim.unwrap_or_else(|| {
        x.iter().filter_map(|v| v.pairs().last()).map(|&(i, _)| i + 1).max().unwrap_or(0)
    });
    for xi in x {
        if let Some(&(i, _)) = xi.pairs().last() {
            if i >= dim {
                return Err(LinearError::DimensionMismatch { expected: dim, got: i + 1 });
            }
        }
    }
    // Hinge probabilities need a held-out split to fit the link scale on;
    // logistic margins are already calibrated by construction.
    let (train_idx, cal_idx) = match cfg.loss {
        Loss::Hinge => calibration_split(y, cfg.seed),
        Loss::Logistic => ((0..x.len()).collect(), Vec::new()),
    };
    let (weights, bias, history) = run_sgd(x, y, &train_idx, dim, cfg);
    let calibration = match cfg.loss {
        Loss::Logistic => None,
        Loss::Hinge => Some(fit_calibration(x, y, &cal_idx, &weights, bias)),
    };
    let model = LinearModel {
        weights,
        bias,
        loss: cfg.loss,
        penalty: cfg.penalty,
        c: cfg.c,
        classes: ["0".into(), "1".into()],
        calibration,
        vocab_checksum: None,
    };
    Ok((model, history))
}

fn run_sgd(
    x: &[SparseVector],
    y: &[bool],
    idx: &[usize],
    dim: usize,
    cfg: &TrainConfig,
) -> (Vec<f64>, f64, Vec<f64>) {
    let lambda = 1.0 / cfg.c;
    let eta0 = cfg.eta0.min(0.5 * cfg.c);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = idx.to_vec();
    let mut state = State::new(dim);
    let mut history = Vec::with_capacity(cfg.epochs);
    // Best averaged iterate seen at any checkpoint; what you get by stopping
    // at that epoch. Retaining it makes the checkpoint sequence monotone even
    // when individual epochs fluctuate at noise scale near an optimum.
    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    let mut t = 0u64;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let lr = eta0 / (1.0 + eta0 * t as f64 * lambda);
            let g = grad(cfg.loss, state.margin(&x[i]), if y[i] { 1.0 } else { -1.0 });
            state.step(&x[i], g, lr, lambda, cfg.penalty);
            t += 1;
        }
        let (aw, ab) = state.averaged();
        let j = objective_at(x, y, idx, &aw, ab, cfg);
        if best.as_ref().is_none_or(|(_, _, bj)| j < *bj) {
            best = Some((aw, ab, j));
        }
        history.push(best.as_ref().expect("just set").2);
    }
    let (weights, bias) = match cfg.penalty {
        // The retained checkpoint, not the final average.
        Penalty::L2 => {
            let (w, b, _) = best.expect("epochs >= 1");
            (w, b)
        }
        // Last proximal iterate: this is what carries the exact zeros.
        Penalty::L1 => state.last(Penalty::L1),
    };
    (weights, bias, history)
}

/// Stratified ~10% holdout for hinge calibration. Keeps at least one sample
/// of each class on the training side; the calibration side may be empty for
/// tiny inputs, in which case the link scale falls back to 1.
fn calibration_split(y: &[bool], seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xca11_b8a7e));
    let mut train = Vec::with_capacity(y.len());
    let mut cal = Vec::new();
    for class in [false, true] {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        members.shuffle(&mut rng);
        let mut take = members.len() / 10;
        if members.len() - take < 1 {
            take = 0;
        }
        cal.extend_from_slice(&members[..take]);
        train.extend_from_slice(&members[take..]);
    }
    train.sort_unstable();
    cal.sort_unstable();
    (train, cal)
}

/// Fits the scale `a` of the link `σ(a·m)` by minimizing logistic loss over
/// held-out margins. Golden-section over `ln a`; the loss is convex in `a`.
fn fit_calibration(
    x: &[SparseVector],
    y: &[bool],
    cal_idx: &[usize],
    weights: &[f64],
    bias: f64,
) -> f64 {
    let margins: Vec<(f64, f64)> = cal_idx
        .iter()
        .map(|&i| (x[i].dot(weights) + bias, if y[i] { 1.0 } else { -1.0 }))
        .collect();
    let has_pos = margins.iter().any(|&(_, s)| s > 0.0);
    let has_neg = margins.iter().any(|&(_, s)| s < 0.0);
    if !has_pos || !has_neg {
        return 1.0;
    }
    let nll = |ln_a: f64| -> f64 {
        let a = ln_a.exp();
        margins
            .iter()
            .map(|&(m, s)| {
                let z = s * a * m;
                if z > 0.0 {
                    (-z).exp().ln_1p()
                } else {
                    -z + z.exp().ln_1p()
                }
            })
            .sum()
    };
    let (mut lo, mut hi) = (-3.0 * std::f64::consts::LN_10, 3.0 * std::f64::consts::LN_10);
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut m1 = hi - phi * (hi - lo);
    let mut m2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (nll(m1), nll(m2));
    for _ in 0..100 {
        if f1 <= f2 {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - phi * (hi - lo);
            f1 = nll(m1);
        } else {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + phi * (hi - lo);
            f2 = nll(m2);
        }
    }
    (0.5 * (lo + hi)).exp()
}
