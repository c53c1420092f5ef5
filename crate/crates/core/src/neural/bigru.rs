//! Word-level bidirectional GRU: embedding → spatial dropout → forward and
//! backward GRU chains → concatenated final hidden states → two relu dense
//! layers with dropout → softmax.
//!
//! The cell is the standard gated recurrent unit,
//!
//! ```text
//! z = σ(x·Wz + h·Uz + bz)          update gate
//! r = σ(x·Wr + h·Ur + br)          reset gate
//! h̃ = tanh(x·Wh + (r ⊙ h)·Uh + bh) candidate
//! h′ = z ⊙ h + (1 − z) ⊙ h̃
//! ```
//!
//! with the blend computed as `h̃ + z ⊙ (h − h̃)`. The backward direction
//! reuses the same cell over the reversed sequence; its parameters live
//! under the `bwd.` prefix.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{dense_layer, glorot, Bound, GruHyper, NeuralError, ParamSet, Phase};
use crate::autodiff::{Tape, Var};

/// Freshly initialized parameters: Glorot-uniform weights, zero biases,
/// drawn in a fixed buffer order from one seeded stream.
pub fn gru_params(h: &GruHyper, seed: u64) -> Result<ParamSet, NeuralError> {
    h.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = ParamSet::new();
    let (v, e, hid) = (h.vocab_size, h.embed_dim, h.hidden);
    p.push("embed", &[v, e], glorot(&mut rng, v, e, v * e))?;
    for dir in ["fwd", "bwd"] {
        for gate in ["z", "r", "h"] {
            p.push(&format!("{dir}.w{gate}"), &[e, hid], glorot(&mut rng, e, hid, e * hid))?;
            p.push(&format!("{dir}.u{gate}"), &[hid, hid], glorot(&mut rng, hid, hid, hid * hid))?;
            p.push(&format!("{dir}.b{gate}"), &[hid], vec![0.0; hid])?;
        }
    }
    let dims = [2 * hid, h.dense[0], h.dense[1], h.classes];
    for (i, name) in ["dense1", "dense2", "out"].into_iter().enumerate() {
        let (din, dout) = (dims[i], dims[i + 1]);
        p.push(&format!("{name}.w"), &[din, dout], glorot(&mut rng, din, dout, din * dout))?;
        p.push(&format!("{name}.b"), &[dout], vec![0.0; dout])?;
    }
    Ok(p)
}

fn gru_cell(
    tape: &Tape,
    p: &Bound,
    dir: &str,
    x: Var,
    hprev: Var,
) -> Result<Var, NeuralError> {
    let gate = |g: &str| -> Result<Var, NeuralError> {
        let w = p.get(&format!("{dir}.w{g}"))?;
        let u = p.get(&format!("{dir}.u{g}"))?;
        let b = p.get(&format!("{dir}.b{g}"))?;
        Ok(tape.add_rowwise(tape.add(tape.matmul(x, w)?, tape.matmul(hprev, u)?)?, b)?)
    };
    let z = tape.sigmoid(gate("z")?);
    let r = tape.sigmoid(gate("r")?);
    let wh = p.get(&format!("{dir}.wh"))?;
    let uh = p.get(&format!("{dir}.uh"))?;
    let bh = p.get(&format!("{dir}.bh"))?;
    let rh = tape.mul(r, hprev)?;
    let cand =
        tape.tanh(tape.add_rowwise(tape.add(tape.matmul(x, wh)?, tape.matmul(rh, uh)?)?, bh)?);
    // h′ = z⊙h + (1−z)⊙h̃, folded into one fused blend.
    Ok(tape.add(cand, tape.mul(z, tape.sub(hprev, cand)?)?)?)
}

/// Append the forward pass for one id sequence onto `tape` and return the
/// class-probability vector (shape `[classes]`).
pub fn bigru_graph(
    tape: &Tape,
    h: &GruHyper,
    p: &Bound,
    ids: &[usize],
    phase: Phase,
) -> Result<Var, NeuralError> {
    h.validate()?;
    if ids.len() > h.seq_len {
        return Err(NeuralError::BadInput(format!(
            "sequence of {} ids exceeds seq_len {}",
            ids.len(),
            h.seq_len
        )));
    }
    if let Some(&bad) = ids.iter().find(|&&id| id >= h.vocab_size) {
        return Err(NeuralError::BadInput(format!(
            "token id {bad} outside vocabulary of {}",
            h.vocab_size
        )));
    }
    let embed = p.get("embed")?;
    // Per-timestep rows with one shared seed: the channel mask depends only
    // on the seed and the channel count, so this equals spatial dropout over
    // the whole sequence at once.
    let (sd_seed, sd_on) = phase.dropout_args(0);
    let mut xs = Vec::with_capacity(ids.len());
    for t in 0..ids.len() {
        let x = tape.embedding(embed, &ids[t..=t])?;
        xs.push(tape.spatial_dropout(x, h.dropout, sd_seed, sd_on)?);
    }
    let h0 = tape.constant(&[1, h.hidden], vec![0.0; h.hidden])?;
    let mut hf = h0;
    for &x in &xs {
        hf = gru_cell(tape, p, "fwd", x, hf)?;
    }
    let mut hb = h0;
    for &x in xs.iter().rev() {
        hb = gru_cell(tape, p, "bwd", x, hb)?;
    }
    let mut z = tape.reshape(tape.concat(&[hf, hb])?, &[1, 2 * h.hidden])?;
    for (i, name) in ["dense1", "dense2"].into_iter().enumerate() {
        z = tape.relu(dense_layer(tape, p, name, z)?);
        let (seed, on) = phase.dropout_args(1 + i as u64);
        z = tape.dropout(z, h.dropout, seed, on)?;
    }
    let logits = dense_layer(tape, p, "out", z)?;
    Ok(tape.reshape(tape.softmax_rows(logits)?, &[h.classes])?)
}

/// Inference on an owned tape: class probabilities for one id sequence,
/// dropout off.
pub fn bigru_forward(
    h: &GruHyper,
    params: &ParamSet,
    ids: &[usize],
) -> Result<Vec<f64>, NeuralError> {
    let tape = Tape::new();
    let bound = params.bind(&tape)?;
    let out = bigru_graph(&tape, h, &bound, ids, Phase::Eval)?;
    Ok(tape.value(out))
}
