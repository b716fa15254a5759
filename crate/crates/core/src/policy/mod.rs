//! The multi-frame policy: single-frame encoder with learnable summary
//! features, FIFO feature-chunk cache, feature modulator, cross-frame
//! diffusion decoder, and the training loop.
//!
//! The temporal mechanism in one paragraph: every observation is encoded
//! independently into one feature vector per frame (the encoder never sees
//! history). The last M features live in a [`FeatureChunk`]. The modulator
//! expands the current feature into M-1 vectors via a channel-splitting
//! linear (DIV), stacks them with the M-1 past features, adds a learnable
//! per-slot positional embedding, and maps every row through a shared MLP.
//! The resulting 2(M-1) x d' matrix conditions a DiT-style decoder through
//! cross-attention (noised action tokens are the queries) that is trained to
//! predict diffusion noise. During training, gradients from past features
//! into the encoder are severed (multi-frame regularization), so the encoder
//! keeps training on single frames while the decoder learns multi-frame
//! structure. At inference, one encoder call per environment step plus the
//! cache reproduces exactly what re-encoding the whole window would.

mod chunk;
mod config;
mod decoder;
mod diffusion;
mod encoder;
mod model;
mod modulator;
mod train;

pub use chunk::{Feature, FeatureChunk};
pub use config::{DecoderVariant, ModelConfig};
pub use decoder::{decode_noise, sinusoidal_timestep};
pub use diffusion::{
    assemble_sample, diffusion_loss, sample_actions, DiffusionBatch, DiffusionSample,
    NoiseSchedule, PastFeatures,
};
pub use encoder::{encode_frame, encode_frame_value};
pub use model::{ActionNormalizer, Policy, RolloutCounters, CHUNK_CLAMP};
pub use modulator::{modulate, zf_rows};
pub use train::{train, write_loss_curve, CurvePoint, TrainOptions};
