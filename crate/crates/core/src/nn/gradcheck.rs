//! Finite-difference verification of tape gradients.

use crate::error::{Error, Result};
use crate::nn::params::ParamStore;
use crate::nn::tape::{NodeId, Tape};
use crate::rng::SplitMix64;

/// Outcome of a finite-difference sweep.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// Worst relative error across all sampled coordinates, with denominator
    /// `max(|analytic|, |numeric|, 1e-8)`.
    pub max_rel_error: f64,
    pub epsilon: f64,
    pub samples: usize,
    pub tolerance: f64,
    pub passed: bool,
    /// Parameter name and flat offset of the worst coordinate.
    pub worst_coordinate: Option<(String, usize)>,
}

/// Compare tape gradients of `build_loss` against central differences at
/// `samples` randomly chosen scalar coordinates.
///
/// `build_loss` must record the complete forward pass onto the given tape
/// and return the scalar loss node; it must be deterministic in the store
/// contents (checked by evaluating twice).
pub fn finite_diff_check<F>(
    build_loss: F,
    store: &mut ParamStore,
    epsilon: f64,
    samples: usize,
    tolerance: f64,
    seed: u64,
) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &ParamStore) -> Result<NodeId>,
{
    if epsilon <= 0.0 {
        return Err(Error::Input(format!(
            "finite_diff_check requires epsilon > 0, got {epsilon}"
        )));
    }
    let eval = |store: &ParamStore| -> Result<f64> {
        let mut tape = Tape::new();
        let loss = build_loss(&mut tape, store)?;
        Ok(tape.value(loss).item())
    };

    // Analytic gradients from one forward/backward.
    store.zero_grads();
    let mut tape = Tape::new();
    let loss = build_loss(&mut tape, store)?;
    let base = tape.value(loss).item();
    tape.backward(loss, store)?;
    let analytic = store.grads_snapshot();

    // Determinism gate: a second evaluation must reproduce the loss exactly.
    let replay = eval(store)?;
    if replay.to_bits() != base.to_bits() {
        return Err(Error::Determinism(format!(
            "two evaluations differ: {base:?} vs {replay:?}"
        )));
    }

    let total = store.scalar_count();
    if total == 0 {
        return Err(Error::Input("store has no parameters to check".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let mut max_rel = 0.0f64;
    let mut worst = None;
    for _ in 0..samples {
        let flat = rng.choice(total);
        let (name, offset) = {
            let (n, o) = store.locate_scalar(flat)?;
            (n.to_string(), o)
        };
        store.nudge_scalar(&name, offset, epsilon)?;
        let plus = eval(store)?;
        store.nudge_scalar(&name, offset, -2.0 * epsilon)?;
        let minus = eval(store)?;
        store.nudge_scalar(&name, offset, epsilon)?;

        let numeric = (plus - minus) / (2.0 * epsilon);
        let a = analytic
            .get(&name)
            .map(|t| t.data()[offset])
            .unwrap_or(0.0);
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        if rel > max_rel {
            max_rel = rel;
            worst = Some((name.clone(), offset));
        }
    }

    Ok(GradCheckReport {
        max_rel_error: max_rel,
        epsilon,
        samples,
        tolerance,
        passed: max_rel < tolerance,
        worst_coordinate: worst,
    })
}
