//! Temporal disturbance schedules: disturbed-to-clean frame ratios.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constant (1:0), cyclic (1:1) or sparse (1:3, 1:5, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    Constant,
    Cyclic,
    Sparse,
}

/// A validated disturbed:clean ratio. The only legal shapes are 1:0, 1:1,
/// and 1:c with c >= 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TemporalSchedule {
    disturbed: u32,
    clean: u32,
}

impl TemporalSchedule {
    pub fn new(disturbed: u32, clean: u32) -> Result<Self> {
        if disturbed + clean == 0 {
            return Err(Error::Config("zero-length disturbance ratio".into()));
        }
        if disturbed != 1 {
            return Err(Error::Config(format!(
                "unsupported ratio {disturbed}:{clean} (disturbed count must be 1)"
            )));
        }
        if clean == 2 {
            return Err(Error::Config(
                "ratio 1:2 is not a recognized schedule (use 1:0, 1:1, or 1:c with c >= 3)".into(),
            ));
        }
        Ok(TemporalSchedule { disturbed, clean })
    }

    pub const fn constant() -> Self {
        TemporalSchedule {
            disturbed: 1,
            clean: 0,
        }
    }

    pub const fn cyclic() -> Self {
        TemporalSchedule {
            disturbed: 1,
            clean: 1,
        }
    }

    pub fn sparse(clean: u32) -> Result<Self> {
        if clean < 3 {
            return Err(Error::Config(format!(
                "sparse schedules need at least 3 clean frames, got {clean}"
            )));
        }
        TemporalSchedule::new(1, clean)
    }

    pub fn disturbed(&self) -> u32 {
        self.disturbed
    }

    pub fn clean(&self) -> u32 {
        self.clean
    }

    pub fn mode(&self) -> ScheduleMode {
        match self.clean {
            0 => ScheduleMode::Constant,
            1 => ScheduleMode::Cyclic,
            _ => ScheduleMode::Sparse,
        }
    }

    pub fn period(&self) -> u32 {
        self.disturbed + self.clean
    }

    /// "1:0", "1:3", ...
    pub fn label(&self) -> String {
        format!("{}:{}", self.disturbed, self.clean)
    }

    pub fn parse(s: &str) -> Result<Self> {
        let (d, c) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("ratio {s} is not of the form D:C")))?;
        let d: u32 = d
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad disturbed count in {s}")))?;
        let c: u32 = c
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad clean count in {s}")))?;
        TemporalSchedule::new(d, c)
    }
}

impl std::fmt::Display for TemporalSchedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.disturbed, self.clean)
    }
}

/// Per-frame disturb/clean mask over a horizon.
///
/// Convention: within each period of `disturbed + clean` frames, the leading
/// `disturbed` frames are the disturbed ones, starting at frame 0. Constant
/// (1:0) therefore disturbs every frame.
pub fn schedule_mask(schedule: TemporalSchedule, horizon: usize) -> Result<Vec<bool>> {
    schedule_mask_with_phase(schedule, horizon, 0)
}

/// Like [`schedule_mask`] but with the disturbed slot shifted `phase` frames
/// later within each period, for phase-sensitivity studies.
pub fn schedule_mask_with_phase(
    schedule: TemporalSchedule,
    horizon: usize,
    phase: i64,
) -> Result<Vec<bool>> {
    if horizon == 0 {
        return Err(Error::Input("schedule horizon must be at least 1".into()));
    }
    let period = schedule.period() as i64;
    if period == 0 {
        return Err(Error::Config("zero-length disturbance ratio".into()));
    }
    Ok((0..horizon)
        .map(|i| (i as i64 - phase).rem_euclid(period) < schedule.disturbed() as i64)
        .collect())
}
