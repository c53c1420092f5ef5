//! Character-level CNN over 1-of-m quantized text: a stack of
//! `conv1d → relu → maxpool` blocks, then flatten → two relu dense layers
//! with dropout → softmax. Convolutions are valid (no padding), stride 1;
//! pooling is non-overlapping with the remainder dropped, so the sequence
//! lengths follow [`super::cnn_length_trace`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{cnn_length_trace, dense_layer, glorot, Bound, CnnHyper, NeuralError, ParamSet, Phase};
use crate::autodiff::{Tape, Var};

/// Freshly initialized parameters: Glorot-uniform kernels and dense weights
/// (conv fan-in = in-channels × kernel width), zero biases.
pub fn cnn_params(h: &CnnHyper, seed: u64) -> Result<ParamSet, NeuralError> {
    h.validate()?;
    let trace = cnn_length_trace(h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = ParamSet::new();
    let mut channels = h.m;
    for layer in 0..h.conv_layers {
        let width = channels * h.kernel;
        p.push(
            &format!("conv{layer}.k"),
            &[h.filters, width],
            glorot(&mut rng, width, h.filters, h.filters * width),
        )?;
        p.push(&format!("conv{layer}.b"), &[h.filters], vec![0.0; h.filters])?;
        channels = h.filters;
    }
    let flat = h.filters * trace.last().expect("trace is non-empty");
    let dims = [flat, h.dense[0], h.dense[1], h.classes];
    for (i, name) in ["dense1", "dense2", "out"].into_iter().enumerate() {
        let (din, dout) = (dims[i], dims[i + 1]);
        p.push(&format!("{name}.w"), &[din, dout], glorot(&mut rng, din, dout, din * dout))?;
        p.push(&format!("{name}.b"), &[dout], vec![0.0; dout])?;
    }
    Ok(p)
}

/// Append the forward pass for one quantized matrix (m × L row-major, as
/// produced by [`super::CharQuantizer::quantize`]) onto `tape` and return
/// the class-probability vector (shape `[classes]`).
pub fn charcnn_graph(
    tape: &Tape,
    h: &CnnHyper,
    p: &Bound,
    input: &[f64],
    phase: Phase,
) -> Result<Var, NeuralError> {
    h.validate()?;
    if input.len() != h.m * h.l {
        return Err(NeuralError::BadInput(format!(
            "expected a {}×{} matrix ({} values), got {}",
            h.m,
            h.l,
            h.m * h.l,
            input.len()
        )));
    }
    let trace = cnn_length_trace(h)?;
    let mut z = tape.constant(&[h.m, h.l], input.to_vec())?;
    for layer in 0..h.conv_layers {
        let k = p.get(&format!("conv{layer}.k"))?;
        let b = p.get(&format!("conv{layer}.b"))?;
        z = tape.relu(tape.add_colwise(tape.conv1d(z, k, h.kernel)?, b)?);
        z = tape.maxpool1d(z, h.pool)?;
    }
    let flat = h.filters * trace.last().expect("trace is non-empty");
    let mut z = tape.reshape(z, &[1, flat])?;
    for (i, name) in ["dense1", "dense2"].into_iter().enumerate() {
        z = tape.relu(dense_layer(tape, p, name, z)?);
        let (seed, on) = phase.dropout_args(i as u64);
        z = tape.dropout(z, h.dropout, seed, on)?;
    }
    let logits = dense_layer(tape, p, "out", z)?;
    Ok(tape.reshape(tape.softmax_rows(logits)?, &[h.classes])?)
}

/// Inference on an owned tape: class probabilities for one quantized
/// matrix, dropout off.
pub fn charcnn_forward(
    h: &CnnHyper,
    params: &ParamSet,
    input: &[f64],
) -> Result<Vec<f64>, NeuralError> {
    let tape = Tape::new();
    let bound = params.bind(&tape)?;
    let out = charcnn_graph(&tape, h, &bound, input, Phase::Eval)?;
    Ok(tape.value(out))
}
