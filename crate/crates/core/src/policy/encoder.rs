//! The single-frame encoder: a stand-in for a frozen-architecture
//! vision-language backbone at desk scale.
//!
//! Patchify -> per-patch linear embedding -> [patch tokens, instruction
//! token, learnable summary token] + learnable positional embedding ->
//! encoder blocks (residual self-attention + residual MLP) -> the summary
//! token's final hidden state is the frame's learnable feature.
//!
//! The output is a function of (image, instruction, parameters) only; there
//! is no temporal state anywhere in this module.

use crate::error::{Error, Result};
use crate::image::ObservationImage;
use crate::nn::{
    init_attention_block, init_linear, init_mlp, mlp_forward, self_attention_block, NodeId,
    ParamStore, Tape, Tensor2,
};
use crate::policy::config::ModelConfig;
use crate::rng::SplitMix64;

pub(crate) fn init_encoder_params(
    store: &mut ParamStore,
    config: &ModelConfig,
    rng: &mut SplitMix64,
) -> Result<()> {
    let d = config.feature_dim;
    init_linear(store, "enc.patch", config.patch_dim(), d, rng)?;
    store.define_uniform("enc.pos", config.encoder_tokens(), d, d, rng)?;
    store.define_uniform("enc.instr", config.instructions, d, d, rng)?;
    store.define_uniform("enc.summary", 1, d, d, rng)?;
    for layer in 0..config.encoder_layers {
        init_attention_block(store, &format!("enc.blk{layer}.attn"), d, rng)?;
        init_mlp(store, &format!("enc.blk{layer}.mlp"), d, 4 * d, d, rng)?;
    }
    Ok(())
}

/// Contrast gain applied to centered patch values before embedding.
const PATCH_GAIN: f64 = 4.0;

/// Row-major patch grid; each row holds one patch's pixels (row-major within
/// the patch, channels interleaved), scaled to [0, 1], centered on the
/// patch's own mean, and amplified by a fixed gain. Centering zeroes uniform
/// patches, so the flat background contributes nothing and the few patches
/// containing shapes dominate the embedding.
fn patchify(image: &ObservationImage, config: &ModelConfig) -> Tensor2 {
    let p = config.patch_size;
    let grid_w = config.image_width / p;
    let grid_h = config.image_height / p;
    let mut data = Vec::with_capacity(grid_w * grid_h * config.patch_dim());
    let mut patch = vec![0.0; config.patch_dim()];
    for gy in 0..grid_h {
        for gx in 0..grid_w {
            let mut idx = 0;
            for py in 0..p {
                for px in 0..p {
                    let rgb = image.get(gx * p + px, gy * p + py);
                    for ch in rgb {
                        patch[idx] = ch as f64 / 255.0;
                        idx += 1;
                    }
                }
            }
            let mean = patch.iter().sum::<f64>() / patch.len() as f64;
            data.extend(patch.iter().map(|v| PATCH_GAIN * (v - mean)));
        }
    }
    Tensor2::from_vec(grid_w * grid_h, config.patch_dim(), data).expect("patch grid")
}

/// Encode one frame into its learnable feature (1 x d node on the tape).
pub fn encode_frame(
    tape: &mut Tape,
    store: &ParamStore,
    config: &ModelConfig,
    image: &ObservationImage,
    instruction: u32,
) -> Result<NodeId> {
    if image.height != config.image_height || image.width != config.image_width {
        return Err(Error::dimension(
            "encode_frame",
            format!("{}x{} image", config.image_width, config.image_height),
            format!("{}x{} image", image.width, image.height),
        ));
    }
    if instruction as usize >= config.instructions {
        return Err(Error::Input(format!(
            "instruction id {instruction} out of range (vocabulary {})",
            config.instructions
        )));
    }

    let patches = tape.constant(patchify(image, config));
    let embedded = crate::nn::linear_forward(tape, store, patches, "enc.patch")?;
    let instr_table = tape.param(store, "enc.instr")?;
    let instr_token = tape.slice_rows(instr_table, instruction as usize, 1);
    let summary = tape.param(store, "enc.summary")?;
    let seq = tape.concat_rows(&[embedded, instr_token, summary]);
    let pos = tape.param(store, "enc.pos")?;
    let mut x = tape.add(seq, pos);

    for layer in 0..config.encoder_layers {
        let attended =
            self_attention_block(tape, store, x, &format!("enc.blk{layer}.attn"), config.heads)?;
        x = tape.add(x, attended);
        let fed = mlp_forward(tape, store, x, &format!("enc.blk{layer}.mlp"))?;
        x = tape.add(x, fed);
    }

    // Summary token sits last.
    Ok(tape.slice_rows(x, config.encoder_tokens() - 1, 1))
}

/// Gradient-free encode: runs the same forward on a scratch tape and returns
/// the feature values.
pub fn encode_frame_value(
    store: &ParamStore,
    config: &ModelConfig,
    image: &ObservationImage,
    instruction: u32,
) -> Result<Vec<f64>> {
    let mut tape = Tape::new();
    let node = encode_frame(&mut tape, store, config, image, instruction)?;
    Ok(tape.value(node).row(0).to_vec())
}
