//! Per-trial disturbance plans, fully determined by the trial id.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::disturbance::family::{sample_params, DisturbanceSpec, Family};
use crate::disturbance::schedule::{schedule_mask_with_phase, TemporalSchedule};
use crate::error::{Error, Result};
use crate::rng::{fnv1a64, SplitMix64};

/// Map a trial id to a 64-bit seed: FNV-1a over the UTF-8 bytes. The seed
/// feeds a splitmix64 stream (see [`crate::rng`]).
pub fn derive_trial_seed(trial_id: &str) -> Result<u64> {
    if trial_id.is_empty() {
        return Err(Error::Input("trial id must be non-empty".into()));
    }
    Ok(fnv1a64(trial_id.as_bytes()))
}

/// The disturbance setting a plan was resolved for. `None` on the baseline
/// (clean) plans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSetting {
    pub family: Family,
    pub schedule: TemporalSchedule,
    pub phase: i64,
}

/// One frame's resolved decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDecision {
    pub frame: usize,
    pub disturb: bool,
    /// Sampled parameters; present exactly when `disturb` is true.
    pub spec: Option<DisturbanceSpec>,
    /// Seed for the per-frame noise stream used at application time;
    /// present exactly when `disturb` is true.
    pub noise_seed: Option<u64>,
}

/// Eagerly resolved per-trial disturbance sequence. Two plans built from the
/// same (trial id, family, schedule, horizon) are identical, across processes
/// and platforms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisturbancePlan {
    pub trial_id: String,
    pub setting: Option<PlanSetting>,
    pub horizon: usize,
    pub frames: Vec<FrameDecision>,
}

/// Resolve a plan with the default phase (disturbed slot first in each
/// period).
pub fn plan_trial(
    trial_id: &str,
    family: Family,
    schedule: TemporalSchedule,
    horizon: usize,
) -> Result<DisturbancePlan> {
    plan_trial_with_phase(trial_id, family, schedule, horizon, 0)
}

/// Resolve a plan. The trial seed drives a single splitmix64 stream; for each
/// disturbed frame, in frame order, the stream first samples the family's
/// parameters and then one `u64` noise seed. Clean frames consume nothing.
pub fn plan_trial_with_phase(
    trial_id: &str,
    family: Family,
    schedule: TemporalSchedule,
    horizon: usize,
    phase: i64,
) -> Result<DisturbancePlan> {
    let seed = derive_trial_seed(trial_id)?;
    let mut rng = SplitMix64::new(seed);
    let mask = schedule_mask_with_phase(schedule, horizon, phase)?;
    let frames = mask
        .iter()
        .enumerate()
        .map(|(frame, &disturb)| {
            if disturb {
                let spec = sample_params(family, &mut rng);
                let noise_seed = rng.next_u64();
                FrameDecision {
                    frame,
                    disturb,
                    spec: Some(spec),
                    noise_seed: Some(noise_seed),
                }
            } else {
                FrameDecision {
                    frame,
                    disturb,
                    spec: None,
                    noise_seed: None,
                }
            }
        })
        .collect();
    Ok(DisturbancePlan {
        trial_id: trial_id.to_string(),
        setting: Some(PlanSetting {
            family,
            schedule,
            phase,
        }),
        horizon,
        frames,
    })
}

impl DisturbancePlan {
    /// All-clean plan for baseline trials.
    pub fn clean(trial_id: &str, horizon: usize) -> Result<DisturbancePlan> {
        derive_trial_seed(trial_id)?;
        Ok(DisturbancePlan {
            trial_id: trial_id.to_string(),
            setting: None,
            horizon,
            frames: (0..horizon)
                .map(|frame| FrameDecision {
                    frame,
                    disturb: false,
                    spec: None,
                    noise_seed: None,
                })
                .collect(),
        })
    }

    pub fn disturbed_frames(&self) -> Vec<usize> {
        self.frames
            .iter()
            .filter(|f| f.disturb)
            .map(|f| f.frame)
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<DisturbancePlan> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<DisturbancePlan> {
        let json = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        DisturbancePlan::from_json(&json)
    }

    /// Stable fingerprint of the fully-resolved plan.
    pub fn digest(&self) -> Result<u64> {
        Ok(fnv1a64(serde_json::to_string(self)?.as_bytes()))
    }
}
