//! Model configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderVariant {
    /// Self-attention + MLP + cross-attention over modulated features.
    CrossAttentionDit,
    /// Modulated features join the token sequence; no cross-attention.
    SelfAttentionOnly,
    /// Everything flattened through plain MLP blocks.
    MlpOnly,
}

impl DecoderVariant {
    pub fn parse(s: &str) -> Option<DecoderVariant> {
        match s {
            "dit" | "cross_attention_dit" => Some(DecoderVariant::CrossAttentionDit),
            "self" | "self_attention_only" => Some(DecoderVariant::SelfAttentionOnly),
            "mlp" | "mlp_only" => Some(DecoderVariant::MlpOnly),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Feature width d produced by the encoder.
    pub feature_dim: usize,
    /// Decoder hidden width d'.
    pub decoder_dim: usize,
    /// Total frames M in the feature chunk (current + M-1 past).
    pub frames: usize,
    /// Action dimension n.
    pub action_dim: usize,
    /// Action-chunk length K.
    pub chunk_len: usize,
    pub encoder_layers: usize,
    pub decoder_layers: usize,
    pub heads: usize,
    pub diffusion_steps: usize,
    pub decoder: DecoderVariant,
    /// Feature modulator on/off (off = features only linearly projected).
    pub modulator: bool,
    /// Multi-frame regularization: block gradients from past features into
    /// the encoder.
    pub regularization: bool,
    pub patch_size: usize,
    pub image_height: usize,
    pub image_width: usize,
    /// Instruction vocabulary size.
    pub instructions: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            feature_dim: 32,
            decoder_dim: 64,
            frames: 4,
            action_dim: 3,
            chunk_len: 4,
            encoder_layers: 2,
            decoder_layers: 2,
            heads: 4,
            diffusion_steps: 50,
            decoder: DecoderVariant::CrossAttentionDit,
            modulator: true,
            regularization: true,
            patch_size: 8,
            image_height: 64,
            image_width: 64,
            instructions: 2,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::Config("frames must be at least 1".into()));
        }
        if self.chunk_len == 0 {
            return Err(Error::Config("chunk_len must be at least 1".into()));
        }
        if self.diffusion_steps == 0 {
            return Err(Error::Config("diffusion_steps must be at least 1".into()));
        }
        if self.heads == 0 || self.decoder_dim % self.heads != 0 {
            return Err(Error::Config(format!(
                "decoder_dim {} must divide into {} heads",
                self.decoder_dim, self.heads
            )));
        }
        if self.feature_dim % self.heads != 0 {
            return Err(Error::Config(format!(
                "feature_dim {} must divide into {} heads",
                self.feature_dim, self.heads
            )));
        }
        if self.patch_size == 0
            || self.image_height % self.patch_size != 0
            || self.image_width % self.patch_size != 0
        {
            return Err(Error::Config(format!(
                "image {}x{} not divisible by patch size {}",
                self.image_width, self.image_height, self.patch_size
            )));
        }
        if self.instructions == 0 {
            return Err(Error::Config("instruction vocabulary is empty".into()));
        }
        if self.action_dim == 0 {
            return Err(Error::Config("action_dim must be at least 1".into()));
        }
        if self.encoder_layers == 0 || self.decoder_layers == 0 {
            return Err(Error::Config("need at least one layer per stack".into()));
        }
        Ok(())
    }

    /// Patch tokens per frame.
    pub fn patch_tokens(&self) -> usize {
        (self.image_height / self.patch_size) * (self.image_width / self.patch_size)
    }

    /// Full encoder sequence length: patches + instruction + summary.
    pub fn encoder_tokens(&self) -> usize {
        self.patch_tokens() + 2
    }

    /// Raw values per patch (patch_size^2 * 3 channels).
    pub fn patch_dim(&self) -> usize {
        self.patch_size * self.patch_size * 3
    }
}
