//! Minimal dense reverse-mode autodiff, 64-bit floats throughout.
//!
//! A [`Tape`] is an append-only arena of nodes; every op evaluates eagerly
//! and records enough to run the backward rule. [`Var`] is a copyable handle
//! into the arena. Values use row-major layout with shapes like `[rows,
//! cols]`; vectors are `[n]`, scalars `[1]`.
//!
//! A tape is single-threaded and supports exactly one backward pass;
//! independent tapes may run concurrently. The intended training pattern is
//! one fresh tape per batch: copy parameters in with [`Tape::param`], run the
//! forward pass, call [`Tape::backward`], read gradients out with
//! [`Tape::grad`], and apply [`adam_step`] to the external parameter buffers.

use std::cell::{Cell, RefCell};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AutodiffError {
    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },
    #[error("no tape: backward already consumed this tape or the loss is not a scalar")]
    NoTape,
    #[error("invalid argument: {0}")]
    InvalidArg(String),
}

fn shape_err(op: &'static str, detail: String) -> AutodiffError {
    AutodiffError::ShapeMismatch { op, detail }
}

/// Handle to a tensor on a tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

enum Op {
    Leaf,
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Scale(usize, f64),
    Matmul(usize, usize),
    AddRowwise(usize, usize),
    AddColwise(usize, usize),
    Conv1d { input: usize, kernels: usize, k: usize },
    MaxPool1d { input: usize, argmax: Vec<usize> },
    Relu(usize),
    Tanh(usize),
    Sigmoid(usize),
    SoftmaxRows(usize),
    Embedding { table: usize, ids: Vec<usize> },
    Concat(Vec<usize>),
    Reshape(usize),
    Dropout { input: usize, mask: Vec<f64> },
    CrossEntropy { probs: usize, target: Vec<f64> },
    Sum(usize),
    MeanScalars(Vec<usize>),
}

struct Node {
    shape: Vec<usize>,
    data: Vec<f64>,
    grad: Vec<f64>,
    op: Op,
}

fn numel(shape: &[usize]) -> usize {
    shape.iter().product()
}

/// Append-only computation arena.
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
    spent: Cell<bool>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: RefCell::new(Vec::new()), spent: Cell::new(false) }
    }

    fn push(&self, shape: Vec<usize>, data: Vec<f64>, op: Op) -> Var {
        debug_assert_eq!(numel(&shape), data.len());
        let grad = vec![0.0; data.len()];
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node { shape, data, grad, op });
        Var(nodes.len() - 1)
    }

    /// Trainable leaf; read its gradient after [`Tape::backward`].
    pub fn param(&self, shape: &[usize], data: Vec<f64>) -> Result<Var, AutodiffError> {
        if numel(shape) != data.len() {
            return Err(shape_err("param", format!("shape {shape:?} vs {} values", data.len())));
        }
        Ok(self.push(shape.to_vec(), data, Op::Leaf))
    }

    /// Fixed leaf (inputs, targets).  Mechanically identical to
    /// [`Tape::param`] -- gradients still accumulate -- but callers never
    /// step constants, so the split keeps intent visible at graph-build
    /// sites.
    pub fn constant(&self, shape: &[usize], data: Vec<f64>) -> Result<Var, AutodiffError> {
        if numel(shape) != data.len() {
            return Err(shape_err("constant", format!("shape {shape:?} vs {} values", data.len())));
        }
        Ok(self.push(shape.to_vec(), data, Op::Leaf))
    }

    pub fn scalar(&self, x: f64) -> Var {
        self.push(vec![1], vec![x], Op::Leaf)
    }

    pub fn shape(&self, v: Var) -> Vec<usize> {
        self.nodes.borrow()[v.0].shape.clone()
    }

    pub fn value(&self, v: Var) -> Vec<f64> {
        self.nodes.borrow()[v.0].data.clone()
    }

    /// Gradient of the last backward pass; zeros before one runs.
    pub fn grad(&self, v: Var) -> Vec<f64> {
        self.nodes.borrow()[v.0].grad.clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.borrow().is_empty()
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<Vec<usize>, AutodiffError> {
        let nodes = self.nodes.borrow();
        let (sa, sb) = (&nodes[a.0].shape, &nodes[b.0].shape);
        if sa != sb {
            return Err(shape_err(op, format!("{sa:?} vs {sb:?}")));
        }
        Ok(sa.clone())
    }

    pub fn add(&self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let shape = self.same_shape("add", a, b)?;
        let data = {
            let nodes = self.nodes.borrow();
            nodes[a.0].data.iter().zip(&nodes[b.0].data).map(|(x, y)| x + y).collect()
        };
        Ok(self.push(shape, data, Op::Add(a.0, b.0)))
    }

    pub fn sub(&self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let shape = self.same_shape("sub", a, b)?;
        let data = {
            let nodes = self.nodes.borrow();
            nodes[a.0].data.iter().zip(&nodes[b.0].data).map(|(x, y)| x - y).collect()
        };
        Ok(self.push(shape, data, Op::Sub(a.0, b.0)))
    }

    /// Elementwise product.
    pub fn mul(&self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let shape = self.same_shape("mul", a, b)?;
        let data = {
            let nodes = self.nodes.borrow();
            nodes[a.0].data.iter().zip(&nodes[b.0].data).map(|(x, y)| x * y).collect()
        };
        Ok(self.push(shape, data, Op::Mul(a.0, b.0)))
    }

    pub fn scale(&self, a: Var, k: f64) -> Var {
        let (shape, data) = {
            let nodes = self.nodes.borrow();
            (nodes[a.0].shape.clone(), nodes[a.0].data.iter().map(|x| x * k).collect())
        };
        self.push(shape, data, Op::Scale(a.0, k))
    }

    /// `a (r×k) · b (k×c) → (r×c)`.
    pub fn matmul(&self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (r, c, data) = {
            let nodes = self.nodes.borrow();
            let (na, nb) = (&nodes[a.0], &nodes[b.0]);
            let [r, k] = two_d("matmul", &na.shape)?;
            let [k2, c] = two_d("matmul", &nb.shape)?;
            if k != k2 {
                return Err(shape_err("matmul", format!("{:?} vs {:?}", na.shape, nb.shape)));
            }
            let mut out = vec![0.0; r * c];
            for i in 0..r {
                for t in 0..k {
                    let av = na.data[i * k + t];
                    if av == 0.0 {
                        continue;
                    }
                    for j in 0..c {
                        out[i * c + j] += av * nb.data[t * c + j];
                    }
                }
            }
            (r, c, out)
        };
        Ok(self.push(vec![r, c], data, Op::Matmul(a.0, b.0)))
    }

    /// Adds a length-`c` vector to every row of an `r×c` matrix.
    pub fn add_rowwise(&self, a: Var, v: Var) -> Result<Var, AutodiffError> {
        let (shape, data) = {
            let nodes = self.nodes.borrow();
            let (na, nv) = (&nodes[a.0], &nodes[v.0]);
            let [r, c] = two_d("add_rowwise", &na.shape)?;
            if nv.data.len() != c {
                return Err(shape_err("add_rowwise", format!("{:?} vs {:?}", na.shape, nv.shape)));
            }
            let mut out = na.data.clone();
            for i in 0..r {
                for j in 0..c {
                    out[i * c + j] += nv.data[j];
                }
            }
            (na.shape.clone(), out)
        };
        Ok(self.push(shape, data, Op::AddRowwise(a.0, v.0)))
    }

    /// Adds a length-`r` vector down every column of an `r×c` matrix.
    pub fn add_colwise(&self, a: Var, v: Var) -> Result<Var, AutodiffError> {
        let (shape, data) = {
            let nodes = self.nodes.borrow();
            let (na, nv) = (&nodes[a.0], &nodes[v.0]);
            let [r, c] = two_d("add_colwise", &na.shape)?;
            if nv.data.len() != r {
                return Err(shape_err("add_colwise", format!("{:?} vs {:?}", na.shape, nv.shape)));
            }
            let mut out = na.data.clone();
            for i in 0..r {
                for j in 0..c {
                    out[i * c + j] += nv.data[i];
                }
            }
            (na.shape.clone(), out)
        };
        Ok(self.push(shape, data, Op::AddColwise(a.0, v.0)))
    }

    /// Valid 1-D convolution, stride 1. Input is `channels×len`, kernels are
    /// `filters×(channels·k)` with taps laid out `[channel·k + offset]`;
    /// output is `filters×(len−k+1)`.
    pub fn conv1d(&self, input: Var, kernels: Var, k: usize) -> Result<Var, AutodiffError> {
        let (filters, out_len, data) = {
            let nodes = self.nodes.borrow();
            let (ni, nk) = (&nodes[input.0], &nodes[kernels.0]);
            let [channels, len] = two_d("conv1d", &ni.shape)?;
            let [filters, width] = two_d("conv1d", &nk.shape)?;
            if k == 0 || width != channels * k {
                return Err(shape_err(
                    "conv1d",
                    format!("kernels {:?} incompatible with {channels} channels × k={k}", nk.shape),
                ));
            }
            if len < k {
                return Err(shape_err("conv1d", format!("input length {len} < kernel {k}")));
            }
            let out_len = len - k + 1;
            let mut out = vec![0.0; filters * out_len];
            for f in 0..filters {
                for p in 0..out_len {
                    let mut acc = 0.0;
                    for c in 0..channels {
                        let krow = f * width + c * k;
                        let irow = c * len + p;
                        for t in 0..k {
                            acc += ni.data[irow + t] * nk.data[krow + t];
                        }
                    }
                    out[f * out_len + p] = acc;
                }
            }
            (filters, out_len, out)
        };
        Ok(self.push(vec![filters, out_len], data, Op::Conv1d {
            input: input.0,
            kernels: kernels.0,
            k,
        }))
    }

    /// Max-pooling with window `w` along each row; output length
    /// `floor(len/w)`, trailing remainder dropped. Ties take the earliest
    /// position.
    pub fn maxpool1d(&self, input: Var, w: usize) -> Result<Var, AutodiffError> {
        if w == 0 {
            return Err(AutodiffError::InvalidArg("pool width must be positive".into()));
        }
        let (rows, out_len, data, argmax) = {
            let nodes = self.nodes.borrow();
            let ni = &nodes[input.0];
            let [rows, len] = two_d("maxpool1d", &ni.shape)?;
            let out_len = len / w;
            if out_len == 0 {
                return Err(shape_err("maxpool1d", format!("length {len} shorter than window {w}")));
            }
            let mut out = vec![0.0; rows * out_len];
            let mut argmax = vec![0usize; rows * out_len];
            for r in 0..rows {
                for p in 0..out_len {
                    let base = r * len + p * w;
                    let (mut best, mut best_at) = (ni.data[base], base);
                    for t in 1..w {
                        if ni.data[base + t] > best {
                            best = ni.data[base + t];
                            best_at = base + t;
                        }
                    }
                    out[r * out_len + p] = best;
                    argmax[r * out_len + p] = best_at;
                }
            }
            (rows, out_len, out, argmax)
        };
        Ok(self.push(vec![rows, out_len], data, Op::MaxPool1d { input: input.0, argmax }))
    }

    pub fn relu(&self, a: Var) -> Var {
        let (shape, data) = {
            let nodes = self.nodes.borrow();
            (nodes[a.0].shape.clone(), nodes[a.0].data.iter().map(|&x| x.max(0.0)).collect())
        };
        self.push(shape, data, Op::Relu(a.0))
    }

    pub fn tanh(&self, a: Var) -> Var {
        let (shape, data) = {
            let nodes = self.nodes.borrow();
            (nodes[a.0].shape.clone(), nodes[a.0].data.iter().map(|x| x.tanh()).collect())
        };
        self.push(shape, data, Op::Tanh(a.0))
    }

    pub fn sigmoid(&self, a: Var) -> Var {
        let (shape, data) = {
            let nodes = self.nodes.borrow();
            (nodes[a.0].shape.clone(), nodes[a.0].data.iter().map(|&x| stable_sigmoid(x)).collect())
        };
        self.push(shape, data, Op::Sigmoid(a.0))
    }

    /// Row-wise softmax; rows sum to exactly 1 up to rounding.
    pub fn softmax_rows(&self, a: Var) -> Result<Var, AutodiffError> {
        let (shape, data) = {
            let nodes = self.nodes.borrow();
            let na = &nodes[a.0];
            let [r, c] = two_d("softmax_rows", &na.shape)?;
            let mut out = vec![0.0; r * c];
            for i in 0..r {
                let row = &na.data[i * c..(i + 1) * c];
                let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut denom = 0.0;
                for j in 0..c {
                    let e = (row[j] - max).exp();
                    out[i * c + j] = e;
                    denom += e;
                }
                for j in 0..c {
                    out[i * c + j] /= denom;
                }
            }
            (na.shape.clone(), out)
        };
        Ok(self.push(shape, data, Op::SoftmaxRows(a.0)))
    }

    /// Gathers rows of `table (V×d)` into a `len(ids)×d` matrix. Duplicate
    /// ids accumulate gradient into the same row.
    pub fn embedding(&self, table: Var, ids: &[usize]) -> Result<Var, AutodiffError> {
        let (d, data) = {
            let nodes = self.nodes.borrow();
            let nt = &nodes[table.0];
            let [v, d] = two_d("embedding", &nt.shape)?;
            if let Some(&bad) = ids.iter().find(|&&i| i >= v) {
                return Err(shape_err("embedding", format!("id {bad} out of range for {v} rows")));
            }
            let mut out = Vec::with_capacity(ids.len() * d);
            for &i in ids {
                out.extend_from_slice(&nt.data[i * d..(i + 1) * d]);
            }
            (d, out)
        };
        Ok(self.push(vec![ids.len(), d], data, Op::Embedding {
            table: table.0,
            ids: ids.to_vec(),
        }))
    }

    /// Flattens each input and concatenates into one vector.
    pub fn concat(&self, parts: &[Var]) -> Result<Var, AutodiffError> {
        if parts.is_empty() {
            return Err(AutodiffError::InvalidArg("concat of nothing".into()));
        }
        let data = {
            let nodes = self.nodes.borrow();
            let mut out = Vec::new();
            for p in parts {
                out.extend_from_slice(&nodes[p.0].data);
            }
            out
        };
        let n = data.len();
        Ok(self.push(vec![n], data, Op::Concat(parts.iter().map(|p| p.0).collect())))
    }

    /// Same data, new shape; element count must match.
    pub fn reshape(&self, a: Var, shape: &[usize]) -> Result<Var, AutodiffError> {
        let data = {
            let nodes = self.nodes.borrow();
            if numel(shape) != nodes[a.0].data.len() {
                return Err(shape_err(
                    "reshape",
                    format!("{:?} -> {shape:?}", nodes[a.0].shape),
                ));
            }
            nodes[a.0].data.clone()
        };
        Ok(self.push(shape.to_vec(), data, Op::Reshape(a.0)))
    }

    /// Inverted dropout: keeps each element with probability `1−rate` and
    /// scales survivors by `1/(1−rate)`, so the expectation is preserved.
    /// Identity when `train` is false or `rate` is 0.
    pub fn dropout(&self, a: Var, rate: f64, seed: u64, train: bool) -> Result<Var, AutodiffError> {
        if !(0.0..1.0).contains(&rate) {
            return Err(AutodiffError::InvalidArg(format!("dropout rate {rate} outside [0, 1)")));
        }
        let n = self.nodes.borrow()[a.0].data.len();
        let mask = if !train || rate == 0.0 {
            vec![1.0; n]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let keep = 1.0 - rate;
            (0..n).map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 }).collect()
        };
        self.masked(a, mask)
    }

    /// Spatial dropout over an `len×channels` matrix: one Bernoulli per
    /// channel (column), broadcast across all positions.
    pub fn spatial_dropout(
        &self,
        a: Var,
        rate: f64,
        seed: u64,
        train: bool,
    ) -> Result<Var, AutodiffError> {
        if !(0.0..1.0).contains(&rate) {
            return Err(AutodiffError::InvalidArg(format!("dropout rate {rate} outside [0, 1)")));
        }
        let [len, channels] = {
            let nodes = self.nodes.borrow();
            two_d("spatial_dropout", &nodes[a.0].shape)?
        };
        let mask = if !train || rate == 0.0 {
            vec![1.0; len * channels]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let keep = 1.0 - rate;
            let channel_mask: Vec<f64> =
                (0..channels).map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 }).collect();
            let mut mask = Vec::with_capacity(len * channels);
            for _ in 0..len {
                mask.extend_from_slice(&channel_mask);
            }
            mask
        };
        self.masked(a, mask)
    }

    fn masked(&self, a: Var, mask: Vec<f64>) -> Result<Var, AutodiffError> {
        let (shape, data) = {
            let nodes = self.nodes.borrow();
            let na = &nodes[a.0];
            (na.shape.clone(), na.data.iter().zip(&mask).map(|(x, m)| x * m).collect())
        };
        Ok(self.push(shape, data, Op::Dropout { input: a.0, mask }))
    }

    /// `−Σ target·ln(p)` over a probability vector. `target` is one-hot (or
    /// any distribution); probabilities are clamped at 1e-12 before the log.
    pub fn cross_entropy(&self, probs: Var, target: &[f64]) -> Result<Var, AutodiffError> {
        let loss = {
            let nodes = self.nodes.borrow();
            let np = &nodes[probs.0];
            if np.data.len() != target.len() {
                return Err(shape_err(
                    "cross_entropy",
                    format!("{} probabilities vs {} targets", np.data.len(), target.len()),
                ));
            }
            -np.data
                .iter()
                .zip(target)
                .map(|(&p, &t)| if t == 0.0 { 0.0 } else { t * p.max(1e-12).ln() })
                .sum::<f64>()
        };
        Ok(self.push(vec![1], vec![loss], Op::CrossEntropy {
            probs: probs.0,
            target: target.to_vec(),
        }))
    }

    pub fn sum(&self, a: Var) -> Var {
        let total = self.nodes.borrow()[a.0].data.iter().sum();
        self.push(vec![1], vec![total], Op::Sum(a.0))
    }

    /// Mean of scalar vars — the batch-loss reducer.
    pub fn mean_scalars(&self, parts: &[Var]) -> Result<Var, AutodiffError> {
        if parts.is_empty() {
            return Err(AutodiffError::InvalidArg("mean of nothing".into()));
        }
        let total = {
            let nodes = self.nodes.borrow();
            let mut acc = 0.0;
            for p in parts {
                if nodes[p.0].data.len() != 1 {
                    return Err(shape_err("mean_scalars", format!("{:?}", nodes[p.0].shape)));
                }
                acc += nodes[p.0].data[0];
            }
            acc / parts.len() as f64
        };
        Ok(self.push(vec![1], vec![total], Op::MeanScalars(parts.iter().map(|p| p.0).collect())))
    }

    /// Reverse pass from a scalar loss. Gradients accumulate on every node
    /// and can be read with [`Tape::grad`]. A tape supports exactly one
    /// backward pass; a second call (or a non-scalar loss) errs.
    pub fn backward(&self, loss: Var) -> Result<(), AutodiffError> {
        if self.spent.get() {
            return Err(AutodiffError::NoTape);
        }
        let mut nodes = self.nodes.borrow_mut();
        if nodes[loss.0].data.len() != 1 {
            return Err(AutodiffError::NoTape);
        }
        self.spent.set(true);
        nodes[loss.0].grad[0] = 1.0;
        for id in (0..=loss.0).rev() {
            // Split off the current node so its gradient can be read while
            // upstream nodes (always lower ids) are written.
            let (before, rest) = nodes.split_at_mut(id);
            let node = &rest[0];
            let go = &node.grad;
            match &node.op {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    for (i, &g) in go.iter().enumerate() {
                        before[*a].grad[i] += g;
                        before[*b].grad[i] += g;
                    }
                }
                Op::Sub(a, b) => {
                    for (i, &g) in go.iter().enumerate() {
                        before[*a].grad[i] += g;
                        before[*b].grad[i] -= g;
                    }
                }
                Op::Mul(a, b) => {
                    for i in 0..go.len() {
                        let g = go[i];
                        let (av, bv) = (before[*a].data[i], before[*b].data[i]);
                        before[*a].grad[i] += g * bv;
                        before[*b].grad[i] += g * av;
                    }
                }
                Op::Scale(a, k) => {
                    for (i, &g) in go.iter().enumerate() {
                        before[*a].grad[i] += g * k;
                    }
                }
                Op::Matmul(a, b) => {
                    let r = before[*a].shape[0];
                    let k = before[*a].shape[1];
                    let c = before[*b].shape[1];
                    for i in 0..r {
                        for j in 0..c {
                            let g = go[i * c + j];
                            if g == 0.0 {
                                continue;
                            }
                            for t in 0..k {
                                let bv = before[*b].data[t * c + j];
                                let av = before[*a].data[i * k + t];
                                before[*a].grad[i * k + t] += g * bv;
                                before[*b].grad[t * c + j] += g * av;
                            }
                        }
                    }
                }
                Op::AddRowwise(a, v) => {
                    let c = before[*v].data.len();
                    for (i, &g) in go.iter().enumerate() {
                        before[*a].grad[i] += g;
                        before[*v].grad[i % c] += g;
                    }
                }
                Op::AddColwise(a, v) => {
                    let c = node.shape[1];
                    for (i, &g) in go.iter().enumerate() {
                        before[*a].grad[i] += g;
                        before[*v].grad[i / c] += g;
                    }
                }
                Op::Conv1d { input, kernels, k } => {
                    let channels = before[*input].shape[0];
                    let len = before[*input].shape[1];
                    let width = before[*kernels].shape[1];
                    let out_len = node.shape[1];
                    let filters = node.shape[0];
                    for f in 0..filters {
                        for p in 0..out_len {
                            let g = go[f * out_len + p];
                            if g == 0.0 {
                                continue;
                            }
                            for c in 0..channels {
                                let krow = f * width + c * k;
                                let irow = c * len + p;
                                for t in 0..*k {
                                    let kv = before[*kernels].data[krow + t];
                                    let iv = before[*input].data[irow + t];
                                    before[*input].grad[irow + t] += g * kv;
                                    before[*kernels].grad[krow + t] += g * iv;
                                }
                            }
                        }
                    }
                }
                Op::MaxPool1d { input, argmax } => {
                    for (i, &g) in go.iter().enumerate() {
                        before[*input].grad[argmax[i]] += g;
                    }
                }
                Op::Relu(a) => {
                    for (i, &g) in go.iter().enumerate() {
                        if before[*a].data[i] > 0.0 {
                            before[*a].grad[i] += g;
                        }
                    }
                }
                Op::Tanh(a) => {
                    for (i, &g) in go.iter().enumerate() {
                        let y = node.data[i];
                        before[*a].grad[i] += g * (1.0 - y * y);
                    }
                }
                Op::Sigmoid(a) => {
                    for (i, &g) in go.iter().enumerate() {
                        let y = node.data[i];
                        before[*a].grad[i] += g * y * (1.0 - y);
                    }
                }
                Op::SoftmaxRows(a) => {
                    let c = node.shape[1];
                    for i in 0..node.shape[0] {
                        let row = &node.data[i * c..(i + 1) * c];
                        let grow = &go[i * c..(i + 1) * c];
                        let dot: f64 = row.iter().zip(grow).map(|(s, g)| s * g).sum();
                        for j in 0..c {
                            before[*a].grad[i * c + j] += row[j] * (grow[j] - dot);
                        }
                    }
                }
                Op::Embedding { table, ids } => {
                    let d = node.shape[1];
                    for (pos, &id) in ids.iter().enumerate() {
                        for j in 0..d {
                            before[*table].grad[id * d + j] += go[pos * d + j];
                        }
                    }
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let n = before[p].data.len();
                        for i in 0..n {
                            before[p].grad[i] += go[offset + i];
                        }
                        offset += n;
                    }
                }
                Op::Reshape(a) => {
                    for (i, &g) in go.iter().enumerate() {
                        before[*a].grad[i] += g;
                    }
                }
                Op::Dropout { input, mask } => {
                    for (i, &g) in go.iter().enumerate() {
                        before[*input].grad[i] += g * mask[i];
                    }
                }
                Op::CrossEntropy { probs, target } => {
                    let g = go[0];
                    for (i, &t) in target.iter().enumerate() {
                        if t != 0.0 {
                            let p = before[*probs].data[i].max(1e-12);
                            before[*probs].grad[i] -= g * t / p;
                        }
                    }
                }
                Op::Sum(a) => {
                    let g = go[0];
                    for gi in before[*a].grad.iter_mut() {
                        *gi += g;
                    }
                }
                Op::MeanScalars(parts) => {
                    let g = go[0] / parts.len() as f64;
                    for &p in parts {
                        before[p].grad[0] += g;
                    }
                }
            }
        }
        Ok(())
    }
}

fn two_d(op: &'static str, shape: &[usize]) -> Result<[usize; 2], AutodiffError> {
    match shape {
        [r, c] => Ok([*r, *c]),
        other => Err(shape_err(op, format!("expected 2-D shape, got {other:?}"))),
    }
}

fn stable_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Adam hyper-parameters; standard defaults.
#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub lr: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { beta1: 0.9, beta2: 0.999, eps: 1e-8, lr: 1e-3 }
    }
}

/// First/second-moment state for one parameter buffer.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState { m: vec![0.0; len], v: vec![0.0; len], t: 0 }
    }
}

/// One bias-corrected Adam update: `p -= lr · m̂ / (√v̂ + ε)`.
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
    cfg: &AdamConfig,
) -> Result<(), AutodiffError> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(shape_err(
            "adam_step",
            format!("{} params, {} grads, {} state", params.len(), grads.len(), state.m.len()),
        ));
    }
    state.t += 1;
    let b1t = 1.0 - cfg.beta1.powi(state.t as i32);
    let b2t = 1.0 - cfg.beta2.powi(state.t as i32);
    for i in 0..params.len() {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        let m_hat = state.m[i] / b1t;
        let v_hat = state.v[i] / b2t;
        params[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
    Ok(())
}

/// Central finite-difference gradient check. Builds the scalar loss with `f`
/// on parameters drawn from U(−0.5, 0.5), runs backward, and compares every
/// analytic gradient against `(J(θ+h) − J(θ−h)) / 2h` at `h = 1e-5`.
/// Returns the maximum relative error `|a−n| / max(|a|, |n|, 1)`.
///
/// `f` must be deterministic: given the same parameter values it must build
/// the same graph (seeded dropout is fine).
pub fn gradcheck<F>(param_shapes: &[&[usize]], seed: u64, f: F) -> Result<f64, AutodiffError>
where
    F: Fn(&Tape, &[Var]) -> Result<Var, AutodiffError>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<Vec<f64>> = param_shapes
        .iter()
        .map(|s| (0..numel(s)).map(|_| rng.gen_range(-0.5..0.5)).collect())
        .collect();

    let eval = |values: &[Vec<f64>]| -> Result<f64, AutodiffError> {
        let tape = Tape::new();
        let params: Vec<Var> = param_shapes
            .iter()
            .zip(values)
            .map(|(s, v)| tape.param(s, v.clone()))
            .collect::<Result<_, _>>()?;
        let loss = f(&tape, &params)?;
        Ok(tape.value(loss)[0])
    };

    let analytic: Vec<Vec<f64>> = {
        let tape = Tape::new();
        let params: Vec<Var> = param_shapes
            .iter()
            .zip(&values)
            .map(|(s, v)| tape.param(s, v.clone()))
            .collect::<Result<_, _>>()?;
        let loss = f(&tape, &params)?;
        tape.backward(loss)?;
        params.iter().map(|&p| tape.grad(p)).collect()
    };

    let h = 1e-5;
    let mut worst = 0.0f64;
    for p in 0..values.len() {
        for i in 0..values[p].len() {
            let orig = values[p][i];
            values[p][i] = orig + h;
            let up = eval(&values)?;
            values[p][i] = orig - h;
            let down = eval(&values)?;
            values[p][i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic[p][i];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1.0);
            if err > worst {
                worst = err;
            }
        }
    }
    Ok(worst)
}
