//! Wall-clock accounting and the joint-encoding reference used for scaling
//! comparisons.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::image::ObservationImage;
use crate::nn::{
    init_attention_block, init_linear, init_mlp, mlp_forward, self_attention_block, ParamStore,
    Tape, Tensor2,
};
use crate::policy::{Policy, RolloutCounters};
use crate::rng::SplitMix64;

/// Per-rollout latency summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatencyReport {
    pub steps: u64,
    pub encoder_calls: u64,
    pub encoder_nanos_per_step: f64,
    pub decoder_nanos_per_step: f64,
}

impl LatencyReport {
    pub fn from_counters(c: &RolloutCounters) -> Self {
        let steps = c.steps.max(1) as f64;
        LatencyReport {
            steps: c.steps,
            encoder_calls: c.encoder_calls,
            encoder_nanos_per_step: c.encoder_nanos as f64 / steps,
            decoder_nanos_per_step: c.decoder_nanos as f64 / steps,
        }
    }
}

fn median(mut samples: Vec<u128>) -> u128 {
    samples.sort_unstable();
    samples[samples.len() / 2]
}

/// Median nanoseconds of one cached-policy encoder call (the whole per-step
/// backbone cost under the queue mechanism).
pub fn measure_cached_encoder_nanos(
    policy: &Policy,
    image: &ObservationImage,
    instruction: u32,
    reps: usize,
) -> Result<u128> {
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps.max(1) {
        let t0 = Instant::now();
        std::hint::black_box(policy.encode(image, instruction)?);
        samples.push(t0.elapsed().as_nanos());
    }
    Ok(median(samples))
}

/// Median nanoseconds of one joint multi-frame backbone forward: all
/// `frames` images enter a single sequence of `frames * patch_tokens + 2`
/// tokens, so self-attention cost grows quadratically with the frame count.
/// This is the reference the cached path is compared against.
pub fn measure_joint_encoder_nanos(
    feature_dim: usize,
    heads: usize,
    layers: usize,
    frames: usize,
    patch_tokens: usize,
    patch_dim: usize,
    reps: usize,
) -> Result<u128> {
    let mut rng = SplitMix64::new(0xBEEF);
    let mut store = ParamStore::new();
    let tokens = frames * patch_tokens + 2;
    init_linear(&mut store, "joint.patch", patch_dim, feature_dim, &mut rng)?;
    store.define_uniform("joint.pos", tokens, feature_dim, feature_dim, &mut rng)?;
    store.define_uniform("joint.extra", 2, feature_dim, feature_dim, &mut rng)?;
    for layer in 0..layers {
        init_attention_block(&mut store, &format!("joint.blk{layer}.attn"), feature_dim, &mut rng)?;
        init_mlp(
            &mut store,
            &format!("joint.blk{layer}.mlp"),
            feature_dim,
            4 * feature_dim,
            feature_dim,
            &mut rng,
        )?;
    }
    let raw: Vec<f64> = (0..frames * patch_tokens * patch_dim)
        .map(|_| rng.uniform())
        .collect();
    let patches = Tensor2::from_vec(frames * patch_tokens, patch_dim, raw)?;

    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps.max(1) {
        let t0 = Instant::now();
        let mut tape = Tape::new();
        let input = tape.constant(patches.clone());
        let embedded = crate::nn::linear_forward(&mut tape, &store, input, "joint.patch")?;
        let extra = tape.param(&store, "joint.extra")?;
        let seq = tape.concat_rows(&[embedded, extra]);
        let pos = tape.param(&store, "joint.pos")?;
        let mut x = tape.add(seq, pos);
        for layer in 0..layers {
            let attended =
                self_attention_block(&mut tape, &store, x, &format!("joint.blk{layer}.attn"), heads)?;
            x = tape.add(x, attended);
            let fed = mlp_forward(&mut tape, &store, x, &format!("joint.blk{layer}.mlp"))?;
            x = tape.add(x, fed);
        }
        std::hint::black_box(tape.value(x));
        samples.push(t0.elapsed().as_nanos());
    }
    Ok(median(samples))
}
