//! Benchmark runner and metrics: disturbed rollouts, success rates, R-Score,
//! the attention cost model, latency accounting, and report emission.

mod cost;
mod latency;
mod metrics;
mod report;
mod runner;
mod trial;

pub use cost::{attention_cost, ComplexityModel, CostMode};
pub use latency::{measure_cached_encoder_nanos, measure_joint_encoder_nanos, LatencyReport};
pub use metrics::{r_score, r_score_raw, round_half_up_1dp, success_rate, success_rate_percent};
pub use report::{emit_report, ReportFormat};
pub use runner::{
    evaluate_clean, paper_default_suite, run_benchmark, CategoryRow, RobustnessReport,
    SettingConfig, SettingRow, SuiteConfig, TrialRow,
};
pub use trial::{run_trial, TrialResult};
