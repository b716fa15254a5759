//! Minibatch training with multi-frame regularization and a linear
//! learning-rate decay to zero.

use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::{adamw_step, AdamConfig, Tape, Tensor2};
use crate::policy::config::ModelConfig;
use crate::policy::diffusion::{
    assemble_sample, diffusion_loss, DiffusionBatch, NoiseSchedule, PastFeatures,
};
use crate::policy::encoder::{encode_frame, encode_frame_value};
use crate::policy::model::{ActionNormalizer, Policy};
use crate::rng::SplitMix64;
use crate::simenv::{window_samples, EpisodeSet};

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub steps: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            steps: 2000,
            batch_size: 8,
            lr: 1e-3,
            // The reference recipe trains without weight decay.
            weight_decay: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub step: usize,
    pub loss: f64,
    pub lr: f64,
}

/// Train a fresh policy on expert windows.
///
/// Windows are drawn uniformly (first-frame padded, matching inference), the
/// current frame is encoded on the training tape, and past frames are
/// encoded gradient-free and enter the loss as detached constants when
/// regularization is on — with it off, they stay on the tape and the encoder
/// receives their gradients too.
pub fn train(
    dataset: &EpisodeSet,
    config: ModelConfig,
    opts: &TrainOptions,
) -> Result<(Policy, Vec<CurvePoint>)> {
    config.validate()?;
    if opts.steps == 0 || opts.batch_size == 0 {
        return Err(Error::Config("steps and batch_size must be positive".into()));
    }
    for ep in &dataset.episodes {
        if ep.instruction as usize >= config.instructions {
            return Err(Error::Config(format!(
                "dataset instruction {} outside vocabulary {}",
                ep.instruction, config.instructions
            )));
        }
    }
    let windows = window_samples(dataset, config.frames, true);
    if windows.is_empty() {
        return Err(Error::Input("dataset has no usable windows".into()));
    }

    let mut policy = Policy::init(config.clone(), opts.seed)?;
    policy.normalizer = ActionNormalizer::fit(
        dataset.action_rows().map(|r| r.as_slice()),
        config.action_dim,
    )?;
    let schedule = NoiseSchedule::linear(config.diffusion_steps)?;
    // Separate stream from parameter init so batch order is independent of
    // architecture size.
    let mut rng = SplitMix64::new(opts.seed ^ 0x9E37_79B9_7F4A_7C15);
    let adam = AdamConfig {
        weight_decay: opts.weight_decay,
        ..AdamConfig::default()
    };

    let mut curve = Vec::with_capacity(opts.steps);
    for step in 0..opts.steps {
        let lr = opts.lr * (1.0 - step as f64 / opts.steps as f64);
        let mut tape = Tape::new();
        let mut batch = DiffusionBatch::default();
        for _ in 0..opts.batch_size {
            let wref = windows[rng.choice(windows.len())];
            let (images, actions, instruction) =
                dataset.window(wref, config.frames, config.chunk_len);

            let current = encode_frame(
                &mut tape,
                &policy.params,
                &config,
                images[config.frames - 1],
                instruction,
            )?;
            let past = if config.regularization || config.frames == 1 {
                let mut detached = Vec::with_capacity(config.frames - 1);
                for img in &images[..config.frames - 1] {
                    detached.push(Tensor2::row_vector(&encode_frame_value(
                        &policy.params,
                        &config,
                        img,
                        instruction,
                    )?));
                }
                PastFeatures::Detached(detached)
            } else {
                let mut attached = Vec::with_capacity(config.frames - 1);
                for img in &images[..config.frames - 1] {
                    attached.push(encode_frame(
                        &mut tape,
                        &policy.params,
                        &config,
                        img,
                        instruction,
                    )?);
                }
                PastFeatures::Attached(attached)
            };

            let normalized: Vec<Vec<f64>> = actions
                .iter()
                .map(|a| policy.normalizer.normalize_row(a))
                .collect();
            let clean = Tensor2::from_rows(&normalized)?;
            let noise = Tensor2::from_vec(
                config.chunk_len,
                config.action_dim,
                (0..config.chunk_len * config.action_dim)
                    .map(|_| rng.normal())
                    .collect(),
            )?;
            let timestep = 1 + rng.choice(config.diffusion_steps);
            batch
                .samples
                .push(assemble_sample(&schedule, current, past, clean, noise, timestep)?);
        }

        let loss_node = diffusion_loss(&mut tape, &policy.params, &config, &batch)?;
        let loss = tape.value(loss_node).item();
        if !loss.is_finite() {
            return Err(Error::Training(format!(
                "loss became non-finite at step {step} (lr {lr:.3e}); aborting"
            )));
        }
        tape.backward(loss_node, &mut policy.params)?;
        adamw_step(&mut policy.params, lr, &adam)?;
        curve.push(CurvePoint { step, loss, lr });
    }
    Ok((policy, curve))
}

/// CSV with the header `step,loss,lr`.
pub fn write_loss_curve(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let mut text = String::from("step,loss,lr\n");
    for point in curve {
        text.push_str(&format!("{},{:.12e},{:.12e}\n", point.step, point.loss, point.lr));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}
