//! The assembled policy: parameters, config, action normalization, cached
//! and uncached inference, and checkpoint I/O.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ObservationImage;
use crate::nn::{ParamStore, Tensor2};
use crate::policy::chunk::FeatureChunk;
use crate::policy::config::ModelConfig;
use crate::policy::decoder::init_decoder_params;
use crate::policy::diffusion::{sample_actions, NoiseSchedule};
use crate::policy::encoder::{encode_frame_value, init_encoder_params};
use crate::policy::modulator::init_modulator_params;
use crate::rng::SplitMix64;

/// Denoised chunks are clamped to this band (normalized action units).
pub const CHUNK_CLAMP: f64 = 1.5;

/// Per-dimension affine map between raw env actions and the [-1, 1] band the
/// diffusion model works in, fit on the 1st/99th percentiles of the training
/// actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionNormalizer {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

impl ActionNormalizer {
    pub fn identity(dim: usize) -> Self {
        ActionNormalizer {
            low: vec![-1.0; dim],
            high: vec![1.0; dim],
        }
    }

    /// Nearest-rank 1st/99th percentiles per dimension.
    pub fn fit<'a>(rows: impl Iterator<Item = &'a [f64]>, dim: usize) -> Result<Self> {
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); dim];
        for row in rows {
            if row.len() != dim {
                return Err(Error::dimension(
                    "ActionNormalizer::fit",
                    format!("{dim} action dims"),
                    format!("{}", row.len()),
                ));
            }
            for (c, &v) in row.iter().enumerate() {
                columns[c].push(v);
            }
        }
        if columns[0].is_empty() {
            return Err(Error::Input("no actions to fit the normalizer on".into()));
        }
        let mut low = Vec::with_capacity(dim);
        let mut high = Vec::with_capacity(dim);
        for col in &mut columns {
            col.sort_by(|a, b| a.partial_cmp(b).expect("finite actions"));
            let rank = |q: f64| {
                let idx = ((col.len() - 1) as f64 * q).round() as usize;
                col[idx]
            };
            low.push(rank(0.01));
            high.push(rank(0.99));
        }
        Ok(ActionNormalizer { low, high })
    }

    fn span(&self, d: usize) -> f64 {
        self.high[d] - self.low[d]
    }

    /// Raw -> [-1, 1], clipped. Degenerate dimensions map to 0.
    pub fn normalize_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(d, &v)| {
                let span = self.span(d);
                if span.abs() < 1e-12 {
                    0.0
                } else {
                    (2.0 * (v - self.low[d]) / span - 1.0).clamp(-1.0, 1.0)
                }
            })
            .collect()
    }

    /// [-1, 1] -> raw. Degenerate dimensions return their midpoint.
    pub fn denormalize_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(d, &v)| {
                let span = self.span(d);
                if span.abs() < 1e-12 {
                    (self.low[d] + self.high[d]) / 2.0
                } else {
                    (v + 1.0) / 2.0 * span + self.low[d]
                }
            })
            .collect()
    }
}

/// Wall-clock and invocation accounting for one rollout.
#[derive(Debug, Clone, Copy, Default)]
pub struct RolloutCounters {
    pub steps: u64,
    pub encoder_calls: u64,
    pub encoder_nanos: u128,
    pub decoder_nanos: u128,
}

#[derive(Serialize, Deserialize)]
struct PolicyManifest {
    format_version: u32,
    config: ModelConfig,
    normalizer: ActionNormalizer,
}

/// Trained (or freshly initialized) policy.
#[derive(Debug, Clone)]
pub struct Policy {
    pub config: ModelConfig,
    pub params: ParamStore,
    pub normalizer: ActionNormalizer,
}

impl Policy {
    /// Initialize all parameters from a seed. Definition order (encoder,
    /// modulator, decoder) is fixed so a seed pins every weight.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Policy> {
        config.validate()?;
        let mut rng = SplitMix64::new(seed);
        let mut params = ParamStore::new();
        init_encoder_params(&mut params, &config, &mut rng)?;
        init_modulator_params(&mut params, &config, &mut rng)?;
        init_decoder_params(&mut params, &config, &mut rng)?;
        let dim = config.action_dim;
        Ok(Policy {
            config,
            params,
            normalizer: ActionNormalizer::identity(dim),
        })
    }

    pub fn schedule(&self) -> Result<NoiseSchedule> {
        NoiseSchedule::linear(self.config.diffusion_steps)
    }

    pub fn new_cache(&self) -> Result<FeatureChunk> {
        FeatureChunk::new(self.config.frames, self.config.feature_dim)
    }

    /// Gradient-free single-frame encode.
    pub fn encode(&self, image: &ObservationImage, instruction: u32) -> Result<Vec<f64>> {
        encode_frame_value(&self.params, &self.config, image, instruction)
    }

    /// One environment step with the feature cache: encode only the new
    /// frame, push it, denoise an action chunk, execute its first action
    /// (receding horizon). Returns the raw-unit action.
    pub fn predict_step(
        &self,
        image: &ObservationImage,
        instruction: u32,
        cache: &mut FeatureChunk,
        rng: &mut SplitMix64,
        counters: &mut RolloutCounters,
    ) -> Result<Vec<f64>> {
        let t0 = Instant::now();
        let feature = self.encode(image, instruction)?;
        counters.encoder_nanos += t0.elapsed().as_nanos();
        counters.encoder_calls += 1;
        cache.push(feature)?;

        let schedule = self.schedule()?;
        let t1 = Instant::now();
        let chunk = sample_actions(&self.params, &self.config, &schedule, cache, rng)?;
        counters.decoder_nanos += t1.elapsed().as_nanos();
        counters.steps += 1;
        Ok(self.normalizer.denormalize_row(chunk.row(0)))
    }

    /// Reference path with no cache: re-encodes the last M frames from the
    /// raw episode images every step (first-frame padded), then samples
    /// exactly like [`Policy::predict_step`]. Used as the cache-equivalence
    /// oracle and as the deliberately uncached baseline (M encoder calls per
    /// step).
    pub fn predict_step_uncached(
        &self,
        frames_so_far: &[ObservationImage],
        instruction: u32,
        rng: &mut SplitMix64,
        counters: &mut RolloutCounters,
    ) -> Result<Vec<f64>> {
        if frames_so_far.is_empty() {
            return Err(Error::Input("no frames to encode".into()));
        }
        let t = frames_so_far.len() - 1;
        let m = self.config.frames;
        let mut window = FeatureChunk::new(m, self.config.feature_dim)?;
        for k in 0..m {
            let idx = (t + k + 1).saturating_sub(m).min(t);
            let t0 = Instant::now();
            let feature = self.encode(&frames_so_far[idx], instruction)?;
            counters.encoder_nanos += t0.elapsed().as_nanos();
            counters.encoder_calls += 1;
            window.push(feature)?;
        }
        let schedule = self.schedule()?;
        let t1 = Instant::now();
        let chunk = sample_actions(&self.params, &self.config, &schedule, &window, rng)?;
        counters.decoder_nanos += t1.elapsed().as_nanos();
        counters.steps += 1;
        Ok(self.normalizer.denormalize_row(chunk.row(0)))
    }

    /// Full normalized action chunk for the current cache (mainly for tests
    /// and inspection).
    pub fn sample_chunk(&self, cache: &FeatureChunk, rng: &mut SplitMix64) -> Result<Tensor2> {
        let schedule = self.schedule()?;
        sample_actions(&self.params, &self.config, &schedule, cache, rng)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let manifest = PolicyManifest {
            format_version: 1,
            config: self.config.clone(),
            normalizer: self.normalizer.clone(),
        };
        let manifest_path = dir.join("policy.json");
        std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)
            .map_err(|e| Error::io(manifest_path.display().to_string(), e))?;
        self.params.save(&dir.join("params.bin"))
    }

    pub fn load(dir: &Path) -> Result<Policy> {
        let manifest_path = dir.join("policy.json");
        let text = std::fs::read_to_string(&manifest_path)
            .map_err(|e| Error::io(manifest_path.display().to_string(), e))?;
        let manifest: PolicyManifest = serde_json::from_str(&text)?;
        if manifest.format_version != 1 {
            return Err(Error::Input(format!(
                "unsupported policy format version {}",
                manifest.format_version
            )));
        }
        manifest.config.validate()?;
        let params = ParamStore::load(&dir.join("params.bin"))?;
        Ok(Policy {
            config: manifest.config,
            params,
            normalizer: manifest.normalizer,
        })
    }
}
