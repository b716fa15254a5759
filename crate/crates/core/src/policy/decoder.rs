//! The cross-frame action decoder.
//!
//! Default variant: noised action rows are embedded to d' tokens, the
//! embedded timestep joins as one extra token (sequence length K+1), and
//! each layer runs residual self-attention over those tokens, a residual
//! MLP, then residual cross-attention whose keys/values come from the
//! modulated features. A final linear maps the K action tokens back to n
//! dimensions of predicted noise.

use crate::error::{Error, Result};
use crate::nn::{
    cross_attention_block, init_attention_block, init_linear, init_mlp, linear_forward,
    mlp_forward, self_attention_block, NodeId, ParamStore, Tape, Tensor2,
};
use crate::policy::config::{DecoderVariant, ModelConfig};
use crate::policy::modulator::zf_rows;
use crate::rng::SplitMix64;

/// Classic sinusoidal embedding of an integer timestep, 1 x dim.
pub fn sinusoidal_timestep(timestep: usize, dim: usize) -> Tensor2 {
    let mut values = vec![0.0; dim];
    let t = timestep as f64;
    for k in 0..dim.div_ceil(2) {
        let freq = (-(2.0 * k as f64 / dim as f64) * 10000f64.ln()).exp();
        values[2 * k] = (t * freq).sin();
        if 2 * k + 1 < dim {
            values[2 * k + 1] = (t * freq).cos();
        }
    }
    Tensor2::row_vector(&values)
}

pub(crate) fn init_decoder_params(
    store: &mut ParamStore,
    config: &ModelConfig,
    rng: &mut SplitMix64,
) -> Result<()> {
    let dp = config.decoder_dim;
    init_linear(store, "dec.act", config.action_dim, dp, rng)?;
    init_mlp(store, "dec.temb", dp, dp, dp, rng)?;
    match config.decoder {
        DecoderVariant::CrossAttentionDit => {
            for layer in 0..config.decoder_layers {
                init_attention_block(store, &format!("dec.blk{layer}.self"), dp, rng)?;
                init_mlp(store, &format!("dec.blk{layer}.mlp"), dp, 4 * dp, dp, rng)?;
                init_attention_block(store, &format!("dec.blk{layer}.cross"), dp, rng)?;
            }
            init_linear(store, "dec.final", dp, config.action_dim, rng)?;
        }
        DecoderVariant::SelfAttentionOnly => {
            for layer in 0..config.decoder_layers {
                init_attention_block(store, &format!("dec.blk{layer}.self"), dp, rng)?;
                init_mlp(store, &format!("dec.blk{layer}.mlp"), dp, 4 * dp, dp, rng)?;
            }
            init_linear(store, "dec.final", dp, config.action_dim, rng)?;
        }
        DecoderVariant::MlpOnly => {
            let flat_in = config.chunk_len * config.action_dim + dp + zf_rows(config) * dp;
            init_linear(store, "dec.stem", flat_in, dp, rng)?;
            for layer in 0..config.decoder_layers {
                init_mlp(store, &format!("dec.blk{layer}.mlp"), dp, 4 * dp, dp, rng)?;
            }
            init_linear(store, "dec.final", dp, config.chunk_len * config.action_dim, rng)?;
        }
    }
    Ok(())
}

/// Predict the noise residual for one noised action chunk.
pub fn decode_noise(
    tape: &mut Tape,
    store: &ParamStore,
    config: &ModelConfig,
    zf: NodeId,
    noised_actions: &Tensor2,
    timestep: usize,
) -> Result<NodeId> {
    if timestep == 0 || timestep > config.diffusion_steps {
        return Err(Error::Input(format!(
            "timestep {timestep} outside schedule 1..={}",
            config.diffusion_steps
        )));
    }
    let (k, n) = (config.chunk_len, config.action_dim);
    if noised_actions.shape() != (k, n) {
        return Err(Error::dimension(
            "decode_noise",
            format!("{k}x{n} action chunk"),
            format!("{:?}", noised_actions.shape()),
        ));
    }
    let dp = config.decoder_dim;
    if tape.value(zf).shape() != (zf_rows(config), dp) {
        return Err(Error::dimension(
            "decode_noise",
            format!("{}x{dp} conditioning", zf_rows(config)),
            format!("{:?}", tape.value(zf).shape()),
        ));
    }

    let temb_sin = tape.constant(sinusoidal_timestep(timestep, dp));
    let temb = mlp_forward(tape, store, temb_sin, "dec.temb")?;

    match config.decoder {
        DecoderVariant::CrossAttentionDit => {
            let actions = tape.constant(noised_actions.clone());
            let tokens = linear_forward(tape, store, actions, "dec.act")?;
            let mut x = tape.concat_rows(&[tokens, temb]);
            for layer in 0..config.decoder_layers {
                let attended = self_attention_block(
                    tape,
                    store,
                    x,
                    &format!("dec.blk{layer}.self"),
                    config.heads,
                )?;
                x = tape.add(x, attended);
                let fed = mlp_forward(tape, store, x, &format!("dec.blk{layer}.mlp"))?;
                x = tape.add(x, fed);
                let crossed = cross_attention_block(
                    tape,
                    store,
                    x,
                    zf,
                    &format!("dec.blk{layer}.cross"),
                    config.heads,
                )?;
                x = tape.add(x, crossed);
            }
            let action_tokens = tape.slice_rows(x, 0, k);
            linear_forward(tape, store, action_tokens, "dec.final")
        }
        DecoderVariant::SelfAttentionOnly => {
            let actions = tape.constant(noised_actions.clone());
            let tokens = linear_forward(tape, store, actions, "dec.act")?;
            let mut x = tape.concat_rows(&[tokens, temb, zf]);
            for layer in 0..config.decoder_layers {
                let attended = self_attention_block(
                    tape,
                    store,
                    x,
                    &format!("dec.blk{layer}.self"),
                    config.heads,
                )?;
                x = tape.add(x, attended);
                let fed = mlp_forward(tape, store, x, &format!("dec.blk{layer}.mlp"))?;
                x = tape.add(x, fed);
            }
            let action_tokens = tape.slice_rows(x, 0, k);
            linear_forward(tape, store, action_tokens, "dec.final")
        }
        DecoderVariant::MlpOnly => {
            let flat_actions = tape.constant(noised_actions.reshaped(1, k * n));
            let flat_zf = {
                let rows = tape.value(zf).rows();
                tape.reshape(zf, 1, rows * dp)
            };
            let joined = tape.concat_cols(&[flat_actions, temb, flat_zf]);
            let stem = linear_forward(tape, store, joined, "dec.stem")?;
            let mut x = tape.gelu(stem);
            for layer in 0..config.decoder_layers {
                let fed = mlp_forward(tape, store, x, &format!("dec.blk{layer}.mlp"))?;
                x = tape.add(x, fed);
            }
            let flat = linear_forward(tape, store, x, "dec.final")?;
            Ok(tape.reshape(flat, k, n))
        }
    }
}
