//! The feature modulator.
//!
//! DIV expands the current feature f_t (1 x d) to M-1 vectors through a
//! dimensionality-expanding linear (with bias) plus a split; those rows are
//! stacked under the M-1 past features, a learnable per-slot positional
//! embedding is added, and a shared per-row MLP maps d -> d'. Output is
//! 2(M-1) x d'.
//!
//! Degenerate paths: with M = 1 the modulator is bypassed and the decoder
//! conditions on a single projected current feature (1 x d'); with the
//! modulator ablated, all M features are projected through the same linear
//! instead (M x d'), with no splitting and no positional embedding.

use crate::error::{Error, Result};
use crate::nn::{init_linear, init_mlp, linear_forward, mlp_forward, NodeId, ParamStore, Tape};
use crate::policy::config::ModelConfig;
use crate::rng::SplitMix64;

/// Number of rows the decoder's conditioning matrix has under this config.
pub fn zf_rows(config: &ModelConfig) -> usize {
    if config.frames == 1 || !config.modulator {
        config.frames
    } else {
        2 * (config.frames - 1)
    }
}

pub(crate) fn init_modulator_params(
    store: &mut ParamStore,
    config: &ModelConfig,
    rng: &mut SplitMix64,
) -> Result<()> {
    let d = config.feature_dim;
    let dp = config.decoder_dim;
    if config.frames == 1 || !config.modulator {
        init_linear(store, "mod.proj", d, dp, rng)?;
    } else {
        let m_minus_1 = config.frames - 1;
        init_linear(store, "mod.div", d, m_minus_1 * d, rng)?;
        store.define_uniform("mod.pos", 2 * m_minus_1, d, d, rng)?;
        init_mlp(store, "mod.mlp", d, dp, dp, rng)?;
    }
    Ok(())
}

/// Build the modulated conditioning matrix from past feature nodes (oldest
/// first) and the current feature node.
pub fn modulate(
    tape: &mut Tape,
    store: &ParamStore,
    config: &ModelConfig,
    past: &[NodeId],
    current: NodeId,
) -> Result<NodeId> {
    let d = config.feature_dim;
    if tape.value(current).shape() != (1, d) {
        return Err(Error::dimension(
            "modulate",
            format!("current feature 1x{d}"),
            format!("{:?}", tape.value(current).shape()),
        ));
    }
    if past.len() + 1 != config.frames {
        return Err(Error::dimension(
            "modulate",
            format!("{} past features", config.frames - 1),
            format!("{}", past.len()),
        ));
    }

    if config.frames == 1 || !config.modulator {
        let mut rows: Vec<NodeId> = past.to_vec();
        rows.push(current);
        let stacked = if rows.len() == 1 {
            rows[0]
        } else {
            tape.concat_rows(&rows)
        };
        return linear_forward(tape, store, stacked, "mod.proj");
    }

    let m_minus_1 = config.frames - 1;
    let expanded = linear_forward(tape, store, current, "mod.div")?;
    let split = tape.reshape(expanded, m_minus_1, d);
    let mut rows: Vec<NodeId> = past.to_vec();
    rows.push(split);
    let stacked = tape.concat_rows(&rows);
    let pos = tape.param(store, "mod.pos")?;
    let positioned = tape.add(stacked, pos);
    mlp_forward(tape, store, positioned, "mod.mlp")
}
