//! DDPM machinery: the noise schedule, training batches with the stop-
//! gradient rule, the noise-prediction loss, and ancestral sampling.

use crate::error::{Error, Result};
use crate::nn::{NodeId, ParamStore, Tape, Tensor2};
use crate::policy::chunk::FeatureChunk;
use crate::policy::config::ModelConfig;
use crate::policy::decoder::decode_noise;
use crate::policy::modulator::modulate;
use crate::rng::SplitMix64;

/// Beta schedule with the derived cumulative products.
#[derive(Debug, Clone)]
pub struct NoiseSchedule {
    betas: Vec<f64>,
    alphas: Vec<f64>,
    alpha_bars: Vec<f64>,
}

pub const BETA_START: f64 = 1e-4;
pub const BETA_END: f64 = 0.02;
const BASE_STEPS: usize = 1000;

impl NoiseSchedule {
    /// The linear DDPM schedule, respaced to `steps`.
    ///
    /// The canonical table is 1000 betas linearly spaced from 1e-4 to 0.02.
    /// Shorter schedules subsample its cumulative products at evenly spaced
    /// positions and derive per-step betas from the ratios
    /// (`beta_i = 1 - abar_i / abar_{i-1}`). Using the 1e-4..0.02 endpoints
    /// directly over a short schedule would leave `abar_T` near 0.6 — the
    /// terminal state would still be mostly signal, which both starves the
    /// noise-prediction objective and breaks ancestral sampling from pure
    /// noise. Respacing keeps `abar_T ~ 4e-5` at any length.
    pub fn linear(steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Config("diffusion schedule needs >= 1 step".into()));
        }
        if steps > BASE_STEPS {
            return Err(Error::Config(format!(
                "diffusion schedule longer than the {BASE_STEPS}-step base table"
            )));
        }
        let mut base_abar = Vec::with_capacity(BASE_STEPS);
        let mut product = 1.0;
        for i in 0..BASE_STEPS {
            let beta =
                BETA_START + (BETA_END - BETA_START) * i as f64 / (BASE_STEPS - 1) as f64;
            product *= 1.0 - beta;
            base_abar.push(product);
        }

        let mut betas = Vec::with_capacity(steps);
        let mut alpha_bars = Vec::with_capacity(steps);
        let mut prev = 1.0;
        for i in 0..steps {
            let idx = (i + 1) * BASE_STEPS / steps - 1;
            let abar = base_abar[idx];
            betas.push(1.0 - abar / prev);
            alpha_bars.push(abar);
            prev = abar;
        }
        let alphas: Vec<f64> = betas.iter().map(|b| 1.0 - b).collect();
        Ok(NoiseSchedule {
            betas,
            alphas,
            alpha_bars,
        })
    }

    pub fn steps(&self) -> usize {
        self.betas.len()
    }

    /// Timesteps are 1-based throughout.
    pub fn beta(&self, t: usize) -> f64 {
        self.betas[t - 1]
    }

    pub fn alpha(&self, t: usize) -> f64 {
        self.alphas[t - 1]
    }

    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alpha_bars[t - 1]
    }

    /// Forward noising: `sqrt(abar_t) * clean + sqrt(1 - abar_t) * noise`.
    pub fn q_sample(&self, clean: &Tensor2, noise: &Tensor2, t: usize) -> Tensor2 {
        let abar = self.alpha_bar(t);
        let signal = abar.sqrt();
        let sigma = (1.0 - abar).sqrt();
        clean.zip_map(noise, |c, e| signal * c + sigma * e)
    }
}

/// Past features entering the decoder: detached copies (regularization on)
/// or live tape nodes (regularization off).
#[derive(Debug)]
pub enum PastFeatures {
    Detached(Vec<Tensor2>),
    Attached(Vec<NodeId>),
}

/// One training sample, already q-sampled.
#[derive(Debug)]
pub struct DiffusionSample {
    pub current: NodeId,
    pub past: PastFeatures,
    pub clean: Tensor2,
    pub noise: Tensor2,
    pub noised: Tensor2,
    pub timestep: usize,
}

#[derive(Debug, Default)]
pub struct DiffusionBatch {
    pub samples: Vec<DiffusionSample>,
}

/// Validate shapes, q-sample, and wrap one training example.
pub fn assemble_sample(
    schedule: &NoiseSchedule,
    current: NodeId,
    past: PastFeatures,
    clean: Tensor2,
    noise: Tensor2,
    timestep: usize,
) -> Result<DiffusionSample> {
    if clean.shape() != noise.shape() {
        return Err(Error::dimension(
            "assemble_sample",
            format!("{:?} noise", clean.shape()),
            format!("{:?}", noise.shape()),
        ));
    }
    if timestep == 0 || timestep > schedule.steps() {
        return Err(Error::Input(format!(
            "timestep {timestep} outside schedule 1..={}",
            schedule.steps()
        )));
    }
    let noised = schedule.q_sample(&clean, &noise, timestep);
    Ok(DiffusionSample {
        current,
        past,
        clean,
        noise,
        noised,
        timestep,
    })
}

/// Mean squared error between true and predicted noise over the whole batch.
///
/// With regularization enabled the batch must carry past features as
/// detached constants; live nodes there are an internal consistency error.
/// (Their gradients would otherwise flow into the encoder, which is exactly
/// what the regularization rules out.)
pub fn diffusion_loss(
    tape: &mut Tape,
    store: &ParamStore,
    config: &ModelConfig,
    batch: &DiffusionBatch,
) -> Result<NodeId> {
    if batch.samples.is_empty() {
        return Err(Error::Input("empty diffusion batch".into()));
    }
    let mut per_sample = Vec::with_capacity(batch.samples.len());
    for sample in &batch.samples {
        let past_nodes: Vec<NodeId> = match &sample.past {
            PastFeatures::Detached(values) => values
                .iter()
                .map(|v| tape.constant(v.clone()))
                .collect(),
            PastFeatures::Attached(ids) => {
                if config.regularization {
                    return Err(Error::State(
                        "regularization enabled but past features carry gradient tape".into(),
                    ));
                }
                ids.clone()
            }
        };
        let zf = modulate(tape, store, config, &past_nodes, sample.current)?;
        let eps_hat = decode_noise(tape, store, config, zf, &sample.noised, sample.timestep)?;
        let target = tape.constant(sample.noise.clone());
        let diff = tape.sub(eps_hat, target);
        let sq = tape.hadamard(diff, diff);
        per_sample.push(tape.mean_all(sq));
    }
    let mut total = per_sample[0];
    for &node in &per_sample[1..] {
        total = tape.add(total, node);
    }
    Ok(tape.scale(total, 1.0 / batch.samples.len() as f64))
}

/// Ancestral DDPM sampling conditioned on a full feature chunk.
///
/// Starts from pure noise (K x n standard normals drawn row-major), walks
/// the schedule from its last step down to 1 calling the decoder each step,
/// and clamps the result to [-1.5, 1.5]. Deterministic given the rng state.
pub fn sample_actions(
    store: &ParamStore,
    config: &ModelConfig,
    schedule: &NoiseSchedule,
    chunk: &FeatureChunk,
    rng: &mut SplitMix64,
) -> Result<Tensor2> {
    if !chunk.is_primed() {
        return Err(Error::State("feature chunk has never been pushed".into()));
    }
    if chunk.capacity() != config.frames || chunk.dim() != config.feature_dim {
        return Err(Error::dimension(
            "sample_actions",
            format!("chunk {}x{}", config.frames, config.feature_dim),
            format!("chunk {}x{}", chunk.capacity(), chunk.dim()),
        ));
    }
    if schedule.steps() != config.diffusion_steps {
        return Err(Error::Config(format!(
            "schedule has {} steps, config wants {}",
            schedule.steps(),
            config.diffusion_steps
        )));
    }

    // Conditioning features are fixed for the whole trajectory; compute the
    // modulated matrix once and replay it as a constant each step.
    let zf_value = {
        let mut tape = Tape::new();
        let (past, current) = chunk.past_and_current()?;
        let past_nodes: Vec<NodeId> = past
            .iter()
            .map(|f| tape.constant(Tensor2::row_vector(&f.values)))
            .collect();
        let current_node = tape.constant(Tensor2::row_vector(&current.values));
        let zf = modulate(&mut tape, store, config, &past_nodes, current_node)?;
        tape.value(zf).clone()
    };

    let (k, n) = (config.chunk_len, config.action_dim);
    let mut x = Tensor2::from_vec(k, n, (0..k * n).map(|_| rng.normal()).collect())?;

    for t in (1..=schedule.steps()).rev() {
        let eps_hat = {
            let mut tape = Tape::new();
            let zf = tape.constant(zf_value.clone());
            let eps = decode_noise(&mut tape, store, config, zf, &x, t)?;
            tape.value(eps).clone()
        };
        let alpha = schedule.alpha(t);
        let abar = schedule.alpha_bar(t);
        let coeff = schedule.beta(t) / (1.0 - abar).sqrt();
        let mean = x
            .zip_map(&eps_hat, |xi, ei| (xi - coeff * ei) / alpha.sqrt());
        x = if t > 1 {
            let abar_prev = schedule.alpha_bar(t - 1);
            let sigma = ((1.0 - abar_prev) / (1.0 - abar) * schedule.beta(t)).sqrt();
            let z = Tensor2::from_vec(k, n, (0..k * n).map(|_| rng.normal()).collect())?;
            mean.zip_map(&z, |m, zi| m + sigma * zi)
        } else {
            mean
        };
    }
    Ok(x.map(|v| v.clamp(-1.5, 1.5)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::model::Policy;

    #[test]
    fn schedule_invariants_hold() {
        let s = NoiseSchedule::linear(50).unwrap();
        assert_eq!(s.steps(), 50);
        for t in 1..=50 {
            assert!(s.beta(t) > 0.0 && s.beta(t) < 1.0);
            assert!(s.alpha_bar(t) > 0.0 && s.alpha_bar(t) < 1.0);
            if t > 1 {
                assert!(s.beta(t) > s.beta(t - 1), "betas must increase");
                assert!(
                    s.alpha_bar(t) < s.alpha_bar(t - 1),
                    "alpha_bar must strictly decrease"
                );
            }
        }
        assert!(NoiseSchedule::linear(0).is_err());
        // The terminal cumulative product is near zero at any length, so
        // ancestral sampling can start from pure noise.
        for steps in [1, 8, 50, 100, 1000] {
            let s = NoiseSchedule::linear(steps).unwrap();
            assert!(
                s.alpha_bar(steps) < 1e-4,
                "abar_T {} too large at {steps} steps",
                s.alpha_bar(steps)
            );
        }
    }

    #[test]
    fn q_sample_matches_the_closed_form_and_loses_signal_over_time() {
        let s = NoiseSchedule::linear(10).unwrap();
        let clean = Tensor2::row_vector(&[1.0, -1.0]);
        let noise = Tensor2::row_vector(&[0.5, 0.5]);
        for t in [1, 5, 10] {
            let got = s.q_sample(&clean, &noise, t);
            let abar = s.alpha_bar(t);
            for c in 0..2 {
                let expected = abar.sqrt() * clean.get(0, c) + (1.0 - abar).sqrt() * noise.get(0, c);
                assert_eq!(got.get(0, c), expected);
            }
        }
        // Signal fraction decays along the schedule; the terminal state is
        // almost pure noise.
        assert!(s.alpha_bar(1) > s.alpha_bar(5));
        assert!(s.alpha_bar(5) > s.alpha_bar(10));
        assert!(s.alpha_bar(10) < 1e-4);
    }

    fn tiny_policy(regularization: bool) -> Policy {
        let config = ModelConfig {
            feature_dim: 8,
            decoder_dim: 8,
            frames: 3,
            chunk_len: 2,
            action_dim: 2,
            encoder_layers: 1,
            decoder_layers: 1,
            heads: 2,
            diffusion_steps: 10,
            regularization,
            ..ModelConfig::default()
        };
        Policy::init(config, 77).unwrap()
    }

    #[test]
    fn exact_prediction_gives_zero_loss() {
        // Zero decoder output (all weights and biases zero) with zero noise
        // target: the loss must be exactly zero.
        let mut policy = tiny_policy(true);
        let names: Vec<String> = policy.params.names().map(String::from).collect();
        for name in names.iter().filter(|n| n.starts_with("dec.")) {
            policy.params.value_mut(name).unwrap().fill(0.0);
        }
        let schedule = NoiseSchedule::linear(10).unwrap();
        let mut tape = Tape::new();
        let current = tape.constant(Tensor2::row_vector(&[0.1; 8]));
        let past = PastFeatures::Detached(vec![
            Tensor2::row_vector(&[0.2; 8]),
            Tensor2::row_vector(&[0.3; 8]),
        ]);
        let sample = assemble_sample(
            &schedule,
            current,
            past,
            Tensor2::zeros(2, 2),
            Tensor2::zeros(2, 2),
            5,
        )
        .unwrap();
        let batch = DiffusionBatch {
            samples: vec![sample],
        };
        let loss = diffusion_loss(&mut tape, &policy.params, &policy.config, &batch).unwrap();
        assert_eq!(tape.value(loss).item(), 0.0);
    }

    #[test]
    fn attached_past_features_with_regularization_is_an_error() {
        let policy = tiny_policy(true);
        let schedule = NoiseSchedule::linear(10).unwrap();
        let mut tape = Tape::new();
        let current = tape.constant(Tensor2::row_vector(&[0.1; 8]));
        let p1 = tape.constant(Tensor2::row_vector(&[0.2; 8]));
        let p2 = tape.constant(Tensor2::row_vector(&[0.3; 8]));
        let sample = assemble_sample(
            &schedule,
            current,
            PastFeatures::Attached(vec![p1, p2]),
            Tensor2::zeros(2, 2),
            Tensor2::zeros(2, 2),
            3,
        )
        .unwrap();
        let batch = DiffusionBatch {
            samples: vec![sample],
        };
        let err = diffusion_loss(&mut tape, &policy.params, &policy.config, &batch).unwrap_err();
        assert!(matches!(err, Error::State(_)));
    }

    #[test]
    fn sampling_is_seed_deterministic_and_clamped() {
        let policy = tiny_policy(true);
        let schedule = NoiseSchedule::linear(10).unwrap();
        let mut chunk = FeatureChunk::new(3, 8).unwrap();
        chunk.push(vec![0.5; 8]).unwrap();
        chunk.push(vec![-0.5; 8]).unwrap();

        let a = sample_actions(
            &policy.params,
            &policy.config,
            &schedule,
            &chunk,
            &mut SplitMix64::new(123),
        )
        .unwrap();
        let b = sample_actions(
            &policy.params,
            &policy.config,
            &schedule,
            &chunk,
            &mut SplitMix64::new(123),
        )
        .unwrap();
        assert_eq!(a, b);
        assert!(a.data().iter().all(|v| (-1.5..=1.5).contains(v)));
        // An untrained denoiser rails against the clamp, so different seeds
        // can only show up in the saturation pattern; scan a few seeds to
        // confirm the noise stream actually matters.
        let c = (200..220)
            .map(|seed| {
                sample_actions(
                    &policy.params,
                    &policy.config,
                    &schedule,
                    &chunk,
                    &mut SplitMix64::new(seed),
                )
                .unwrap()
            })
            .any(|other| other != a);
        assert!(c, "twenty different seeds all reproduced the same chunk");
    }
}
