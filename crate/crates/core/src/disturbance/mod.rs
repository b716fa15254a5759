//! Deterministic observational-disturbance engine.
//!
//! Eight disturbance families, each drawing parameters from a fixed finite
//! grid, combined with temporal schedulers (constant / cyclic / sparse
//! disturbed-to-clean ratios) and hash-based per-trial seeding. A
//! [`DisturbancePlan`] resolves every per-frame decision eagerly from a trial
//! id alone, so any two policies evaluated on the same trial ids see exactly
//! the same pixels.

mod apply;
mod family;
mod plan;
mod schedule;

pub use apply::{apply_disturbance, DisturbanceContext};
pub use family::{
    sample_params, DisturbanceParams, DisturbanceSpec, Family, JitterDirection, SpatialCategory,
};
pub use plan::{derive_trial_seed, plan_trial, plan_trial_with_phase, DisturbancePlan, FrameDecision, PlanSetting};
pub use schedule::{schedule_mask, schedule_mask_with_phase, ScheduleMode, TemporalSchedule};
