//! Reusable layer forwards: linear, the two-linear GELU MLP, and multi-head
//! scaled dot-product attention. All record onto the caller's tape.

use crate::error::{Error, Result};
use crate::nn::params::ParamStore;
use crate::nn::tape::{NodeId, Tape};
use crate::rng::SplitMix64;

/// Define `{prefix}.w` (din x dout, uniform +-1/sqrt(din)) and `{prefix}.b`
/// (1 x dout, zero).
pub fn init_linear(
    store: &mut ParamStore,
    prefix: &str,
    din: usize,
    dout: usize,
    rng: &mut SplitMix64,
) -> Result<()> {
    store.define_uniform(format!("{prefix}.w"), din, dout, din, rng)?;
    store.define_zeros(format!("{prefix}.b"), 1, dout)
}

/// Define the parameters of a two-linear MLP block: `{prefix}.fc1`,
/// `{prefix}.fc2`.
pub fn init_mlp(
    store: &mut ParamStore,
    prefix: &str,
    din: usize,
    hidden: usize,
    dout: usize,
    rng: &mut SplitMix64,
) -> Result<()> {
    init_linear(store, &format!("{prefix}.fc1"), din, hidden, rng)?;
    init_linear(store, &format!("{prefix}.fc2"), hidden, dout, rng)
}

/// `x W + b` for the named block.
pub fn linear_forward(
    tape: &mut Tape,
    store: &ParamStore,
    x: NodeId,
    prefix: &str,
) -> Result<NodeId> {
    let w_name = format!("{prefix}.w");
    let w_rows = store.value(&w_name)?.rows();
    let x_cols = tape.value(x).cols();
    if x_cols != w_rows {
        return Err(Error::dimension(
            prefix,
            format!("input width {w_rows}"),
            format!("input width {x_cols}"),
        ));
    }
    let w = tape.param(store, &w_name)?;
    let b = tape.param(store, &format!("{prefix}.b"))?;
    let xw = tape.matmul(x, w);
    Ok(tape.add_row_broadcast(xw, b))
}

/// Two linear layers with GELU in between: `fc2(GELU(fc1(x)))`.
pub fn mlp_forward(
    tape: &mut Tape,
    store: &ParamStore,
    x: NodeId,
    prefix: &str,
) -> Result<NodeId> {
    let h = linear_forward(tape, store, x, &format!("{prefix}.fc1"))?;
    let a = tape.gelu(h);
    linear_forward(tape, store, a, &format!("{prefix}.fc2"))
}

/// Define q/k/v/o projection parameters for one attention block.
pub fn init_attention_block(
    store: &mut ParamStore,
    prefix: &str,
    width: usize,
    rng: &mut SplitMix64,
) -> Result<()> {
    for proj in ["q", "k", "v", "o"] {
        init_linear(store, &format!("{prefix}.{proj}"), width, width, rng)?;
    }
    Ok(())
}

/// Projected multi-head self-attention: q/k/v/o linears around
/// [`attention_forward`], all derived from `x`.
pub fn self_attention_block(
    tape: &mut Tape,
    store: &ParamStore,
    x: NodeId,
    prefix: &str,
    heads: usize,
) -> Result<NodeId> {
    let q = linear_forward(tape, store, x, &format!("{prefix}.q"))?;
    let k = linear_forward(tape, store, x, &format!("{prefix}.k"))?;
    let v = linear_forward(tape, store, x, &format!("{prefix}.v"))?;
    let attended = attention_forward(tape, q, k, v, heads)?;
    linear_forward(tape, store, attended, &format!("{prefix}.o"))
}

/// Projected multi-head cross-attention: queries from `x`, keys and values
/// from `context`.
pub fn cross_attention_block(
    tape: &mut Tape,
    store: &ParamStore,
    x: NodeId,
    context: NodeId,
    prefix: &str,
    heads: usize,
) -> Result<NodeId> {
    let q = linear_forward(tape, store, x, &format!("{prefix}.q"))?;
    let k = linear_forward(tape, store, context, &format!("{prefix}.k"))?;
    let v = linear_forward(tape, store, context, &format!("{prefix}.v"))?;
    let attended = attention_forward(tape, q, k, v, heads)?;
    linear_forward(tape, store, attended, &format!("{prefix}.o"))
}

/// Multi-head scaled dot-product attention over already-projected inputs.
///
/// `queries`, `keys`, `values` all have the same width, which must divide
/// evenly into `heads`; `keys` and `values` have the same row count. Returns
/// a `queries.rows x width` matrix (heads re-concatenated).
pub fn attention_forward(
    tape: &mut Tape,
    queries: NodeId,
    keys: NodeId,
    values: NodeId,
    heads: usize,
) -> Result<NodeId> {
    let width = tape.value(queries).cols();
    if tape.value(keys).cols() != width || tape.value(values).cols() != width {
        return Err(Error::dimension(
            "attention_forward",
            format!("q/k/v width {width}"),
            format!(
                "k width {}, v width {}",
                tape.value(keys).cols(),
                tape.value(values).cols()
            ),
        ));
    }
    if tape.value(keys).rows() != tape.value(values).rows() {
        return Err(Error::dimension(
            "attention_forward",
            format!("{} key rows", tape.value(keys).rows()),
            format!("{} value rows", tape.value(values).rows()),
        ));
    }
    if heads == 0 || width % heads != 0 {
        return Err(Error::Config(format!(
            "attention width {width} not divisible by {heads} heads"
        )));
    }
    let head_dim = width / heads;
    let scale = 1.0 / (head_dim as f64).sqrt();
    let mut outputs = Vec::with_capacity(heads);
    for h in 0..heads {
        let start = h * head_dim;
        let qh = tape.slice_cols(queries, start, head_dim);
        let kh = tape.slice_cols(keys, start, head_dim);
        let vh = tape.slice_cols(values, start, head_dim);
        let kt = tape.transpose(kh);
        let scores = tape.matmul(qh, kt);
        let scaled = tape.scale(scores, scale);
        let weights = tape.softmax_rows(scaled);
        outputs.push(tape.matmul(weights, vh));
    }
    Ok(tape.concat_cols(&outputs))
}
