//! Token-count cost model for backbone self-attention.
//!
//! Feeding M past frames plus the current one straight into the backbone
//! makes the token count `(M+1) * P + I` and self-attention cost its square.
//! Encoding frames one at a time and caching the per-frame features pays
//! `(P+I)^2` per frame instead: `(M+1)` of those on a cold start, one per
//! warm step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexityModel {
    /// Patch tokens per image (P).
    pub patch_tokens: usize,
    /// Instruction tokens (I).
    pub instruction_tokens: usize,
    /// Past frames (M); the model also sees the current frame.
    pub past_frames: usize,
    /// Vision/text token counts of the backbone (bookkeeping only).
    pub vision_tokens: usize,
    pub text_tokens: usize,
    /// Batch size, frame count, and action-sequence length (bookkeeping).
    pub batch: usize,
    pub frames_total: usize,
    pub action_tokens: usize,
}

impl ComplexityModel {
    pub fn new(patch_tokens: usize, instruction_tokens: usize, past_frames: usize) -> Self {
        ComplexityModel {
            patch_tokens,
            instruction_tokens,
            past_frames,
            vision_tokens: patch_tokens,
            text_tokens: instruction_tokens,
            batch: 1,
            frames_total: past_frames + 1,
            action_tokens: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.patch_tokens == 0 || self.instruction_tokens == 0 {
            return Err(Error::Config(
                "complexity model needs positive token counts".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    /// All frames through the backbone jointly: `((M+1) P + I)^2`.
    NaiveMultiframe,
    /// Per-frame encoding, no cache yet: `(M+1) (P+I)^2`.
    ChunkedCold,
    /// Per-frame encoding with a warm cache (one new frame): `(P+I)^2`.
    ChunkedWarm,
}

/// Attention cost in squared-token units.
pub fn attention_cost(model: &ComplexityModel, mode: CostMode) -> Result<f64> {
    model.validate()?;
    let p = model.patch_tokens as f64;
    let i = model.instruction_tokens as f64;
    let m = model.past_frames as f64;
    Ok(match mode {
        CostMode::NaiveMultiframe => ((m + 1.0) * p + i).powi(2),
        CostMode::ChunkedCold => (m + 1.0) * (p + i).powi(2),
        CostMode::ChunkedWarm => (p + i).powi(2),
    })
}
