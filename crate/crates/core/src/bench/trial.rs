//! One benchmark trial: a policy rollout where the policy observes disturbed
//! frames while the environment advances on true state.

use serde::{Deserialize, Serialize};

use crate::disturbance::{apply_disturbance, derive_trial_seed, DisturbanceContext, DisturbancePlan};
use crate::error::{Error, Result};
use crate::policy::{Policy, RolloutCounters};
use crate::rng::SplitMix64;
use crate::simenv::{TaskKind, WorldState};

/// Deterministic sub-seeds for the independent streams of one trial.
fn stream_seed(trial_id: &str, stream: &str) -> Result<u64> {
    derive_trial_seed(&format!("{trial_id}#{stream}"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_id: String,
    pub task: TaskKind,
    /// "clean" or "family@ratio".
    pub setting: String,
    pub success: bool,
    pub steps: u32,
    pub plan_digest: u64,
    pub encoder_calls: u64,
    /// Set when the policy emitted a non-finite action.
    pub diagnostic: Option<String>,
    #[serde(skip)]
    pub counters: RolloutCounters,
}

/// Execute one trial against the plan. The environment always renders true
/// state; the policy sees disturbed pixels on the plan's disturbed frames.
/// Environment layout, disturbance noise, and policy sampling run on three
/// independent hash-derived streams, so the same (policy, plan) pair always
/// reproduces the same result.
pub fn run_trial(policy: &Policy, task: TaskKind, plan: &DisturbancePlan) -> Result<TrialResult> {
    if plan.frames.len() < plan.horizon {
        return Err(Error::Input(format!(
            "plan covers {} frames but declares horizon {}",
            plan.frames.len(),
            plan.horizon
        )));
    }
    let env_seed = stream_seed(&plan.trial_id, "env")?;
    let policy_seed = stream_seed(&plan.trial_id, "policy")?;

    let (mut state, mut frame) = WorldState::reset(task, env_seed);
    let instruction = task.instruction_id();
    let mut cache = policy.new_cache()?;
    let mut policy_rng = SplitMix64::new(policy_seed);
    let mut counters = RolloutCounters::default();
    let mut ctx = DisturbanceContext::new();

    let setting = plan
        .setting
        .as_ref()
        .map(|s| format!("{}@{}", s.family, s.schedule))
        .unwrap_or_else(|| "clean".to_string());

    let mut diagnostic = None;
    let mut step_index = 0usize;
    while !state.done && step_index < plan.horizon {
        let decision = &plan.frames[step_index];
        let observed = if decision.disturb {
            let spec = decision
                .spec
                .as_ref()
                .ok_or_else(|| Error::State("disturbed frame without parameters".into()))?;
            let mut noise_rng = SplitMix64::new(decision.noise_seed.unwrap_or(0));
            apply_disturbance(&frame, spec, &ctx, &mut noise_rng)?
        } else {
            ctx.record_clean(&frame);
            frame.clone()
        };

        let action =
            policy.predict_step(&observed, instruction, &mut cache, &mut policy_rng, &mut counters)?;
        if !action.iter().all(|v| v.is_finite()) {
            diagnostic = Some(format!(
                "non-finite action at step {step_index}: {action:?}"
            ));
            break;
        }
        let (next, image, done, _) = state.step([action[0], action[1], action[2]])?;
        state = next;
        frame = image;
        step_index += 1;
        if done {
            break;
        }
    }

    Ok(TrialResult {
        trial_id: plan.trial_id.clone(),
        task,
        setting,
        success: diagnostic.is_none() && state.success,
        steps: state.step,
        plan_digest: plan.digest()?,
        encoder_calls: counters.encoder_calls,
        diagnostic,
        counters,
    })
}
