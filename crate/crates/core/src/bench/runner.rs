//! Suite orchestration: baseline plus (family x schedule) settings, with
//! per-category aggregation and a fully deterministic report.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::metrics::{r_score, round_half_up_1dp, success_rate};
use crate::bench::trial::{run_trial, TrialResult};
use crate::disturbance::{
    plan_trial_with_phase, DisturbancePlan, Family, ScheduleMode, SpatialCategory,
    TemporalSchedule,
};
use crate::error::{Error, Result};
use crate::policy::Policy;
use crate::rng::fnv1a64;
use crate::simenv::{TaskKind, HORIZON};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SettingConfig {
    pub family: Family,
    pub disturbed: u32,
    pub clean: u32,
    #[serde(default)]
    pub phase: i64,
}

impl SettingConfig {
    pub fn schedule(&self) -> Result<TemporalSchedule> {
        TemporalSchedule::new(self.disturbed, self.clean)
    }

    pub fn label(&self) -> String {
        format!("{}@{}:{}", self.family, self.disturbed, self.clean)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub task: TaskKind,
    pub trials_per_setting: usize,
    pub baseline_trials: usize,
    pub horizon: usize,
    /// Prefix for every trial id; two runs with the same namespace see the
    /// same disturbances regardless of the policy under test.
    pub namespace: String,
    pub settings: Vec<SettingConfig>,
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_setting == 0 && !self.settings.is_empty() {
            return Err(Error::Config("trials_per_setting must be positive".into()));
        }
        if self.baseline_trials == 0 {
            return Err(Error::Config("baseline_trials must be positive".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        for setting in &self.settings {
            setting.schedule()?;
        }
        Ok(())
    }

    pub fn fingerprint(&self) -> Result<String> {
        Ok(format!("{:016x}", fnv1a64(serde_json::to_string(self)?.as_bytes())))
    }
}

/// The standard suite: every family crossed with its supported ratios.
pub fn paper_default_suite(task: TaskKind, trials_per_setting: usize) -> SuiteConfig {
    let mut settings = Vec::new();
    for family in Family::ALL {
        for &(d, c) in family.supported_ratios() {
            settings.push(SettingConfig {
                family,
                disturbed: d,
                clean: c,
                phase: 0,
            });
        }
    }
    SuiteConfig {
        task,
        trials_per_setting,
        baseline_trials: trials_per_setting,
        horizon: HORIZON as usize,
        namespace: "suite-v1".to_string(),
        settings,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial_id: String,
    pub success: bool,
    pub steps: u32,
    pub plan_digest: u64,
    pub encoder_calls: u64,
}

impl From<&TrialResult> for TrialRow {
    fn from(r: &TrialResult) -> Self {
        TrialRow {
            trial_id: r.trial_id.clone(),
            success: r.success,
            steps: r.steps,
            plan_digest: r.plan_digest,
            encoder_calls: r.encoder_calls,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingRow {
    pub label: String,
    pub family: Family,
    pub category: SpatialCategory,
    pub ratio: String,
    pub mode: ScheduleMode,
    pub trials: usize,
    pub sr: f64,
    /// None when the baseline success rate is zero (unscorable).
    pub r_score: Option<f64>,
    pub trial_rows: Vec<TrialRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub name: String,
    pub members: usize,
    pub sr: f64,
    pub r_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub version: u32,
    pub task: TaskKind,
    pub config_fingerprint: String,
    pub baseline_trials: usize,
    pub baseline_sr: f64,
    pub baseline_rows: Vec<TrialRow>,
    pub settings: Vec<SettingRow>,
    pub spatial: Vec<CategoryRow>,
    pub temporal: Vec<CategoryRow>,
}

impl RobustnessReport {
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<RobustnessReport> {
        Ok(serde_json::from_str(text)?)
    }
}

fn run_setting_trials(
    policy: &Policy,
    task: TaskKind,
    plans: &[DisturbancePlan],
) -> Result<Vec<TrialResult>> {
    let mut results = plans
        .par_iter()
        .map(|plan| run_trial(policy, task, plan))
        .collect::<Result<Vec<_>>>()?;
    results.sort_by(|a, b| a.trial_id.cmp(&b.trial_id));
    Ok(results)
}

/// Category mean: unweighted over member settings' (rounded) success rates;
/// the category R-Score rescores that mean against the baseline.
fn aggregate(name: &str, members: &[&SettingRow], baseline_sr: f64) -> Option<CategoryRow> {
    if members.is_empty() {
        return None;
    }
    let mean_sr = members.iter().map(|m| m.sr).sum::<f64>() / members.len() as f64;
    let r = if baseline_sr > 0.0 {
        Some(r_score(mean_sr, baseline_sr).expect("positive baseline"))
    } else {
        None
    };
    Some(CategoryRow {
        name: name.to_string(),
        members: members.len(),
        sr: round_half_up_1dp(mean_sr),
        r_score: r,
    })
}

/// Run the clean baseline then every configured setting, with hash-seeded
/// plans; aggregate success rates, R-Scores, and category means.
pub fn run_benchmark(policy: &Policy, suite: &SuiteConfig) -> Result<RobustnessReport> {
    suite.validate()?;
    let ns = &suite.namespace;

    let baseline_plans: Vec<DisturbancePlan> = (0..suite.baseline_trials)
        .map(|k| DisturbancePlan::clean(&format!("{ns}/baseline/trial-{k:04}"), suite.horizon))
        .collect::<Result<Vec<_>>>()?;
    let baseline_results = run_setting_trials(policy, suite.task, &baseline_plans)?;
    let baseline_sr = success_rate(&baseline_results)?;

    let mut setting_rows = Vec::with_capacity(suite.settings.len());
    for setting in &suite.settings {
        let schedule = setting.schedule()?;
        let label = setting.label();
        let plans: Vec<DisturbancePlan> = (0..suite.trials_per_setting)
            .map(|k| {
                plan_trial_with_phase(
                    &format!("{ns}/{label}/trial-{k:04}"),
                    setting.family,
                    schedule,
                    suite.horizon,
                    setting.phase,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let results = run_setting_trials(policy, suite.task, &plans)?;
        let sr = success_rate(&results)?;
        let r = if baseline_sr > 0.0 {
            Some(r_score(sr, baseline_sr)?)
        } else {
            None
        };
        setting_rows.push(SettingRow {
            label,
            family: setting.family,
            category: setting.family.spatial_category(),
            ratio: schedule.label(),
            mode: schedule.mode(),
            trials: results.len(),
            sr,
            r_score: r,
            trial_rows: results.iter().map(TrialRow::from).collect(),
        });
    }

    let spatial = [
        SpatialCategory::Global,
        SpatialCategory::Local,
        SpatialCategory::Discrete,
    ]
    .iter()
    .filter_map(|cat| {
        let members: Vec<&SettingRow> =
            setting_rows.iter().filter(|s| s.category == *cat).collect();
        aggregate(&cat.to_string(), &members, baseline_sr)
    })
    .collect();

    let temporal = [
        (ScheduleMode::Constant, "constant"),
        (ScheduleMode::Cyclic, "cyclic"),
        (ScheduleMode::Sparse, "sparse"),
    ]
    .iter()
    .filter_map(|(mode, name)| {
        let members: Vec<&SettingRow> =
            setting_rows.iter().filter(|s| s.mode == *mode).collect();
        aggregate(name, &members, baseline_sr)
    })
    .collect();

    Ok(RobustnessReport {
        version: 1,
        task: suite.task,
        config_fingerprint: suite.fingerprint()?,
        baseline_trials: baseline_results.len(),
        baseline_sr,
        baseline_rows: baseline_results.iter().map(TrialRow::from).collect(),
        settings: setting_rows,
        spatial,
        temporal,
    })
}

/// Clean-only evaluation: success rate over seeded episodes (trial ids
/// `namespace/eval/trial-k`), episodes in parallel.
pub fn evaluate_clean(
    policy: &Policy,
    task: TaskKind,
    trials: usize,
    namespace: &str,
) -> Result<(f64, Vec<TrialResult>)> {
    if trials == 0 {
        return Err(Error::Input("evaluation needs at least one trial".into()));
    }
    let plans: Vec<DisturbancePlan> = (0..trials)
        .map(|k| DisturbancePlan::clean(&format!("{namespace}/eval/trial-{k:04}"), HORIZON as usize))
        .collect::<Result<Vec<_>>>()?;
    let results = run_setting_trials(policy, task, &plans)?;
    let sr = success_rate(&results)?;
    Ok((sr, results))
}
