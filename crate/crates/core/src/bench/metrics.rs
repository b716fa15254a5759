//! Success rates and the relative robustness score.

use crate::bench::trial::TrialResult;
use crate::error::{Error, Result};

/// Round half-up to one decimal place (table precision).
pub fn round_half_up_1dp(x: f64) -> f64 {
    (x * 10.0 + 0.5).floor() / 10.0
}

/// Success percentage over raw counts, one decimal.
pub fn success_rate_percent(successes: usize, trials: usize) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Input("success rate over zero trials".into()));
    }
    Ok(round_half_up_1dp(100.0 * successes as f64 / trials as f64))
}

/// Success percentage over trial results, one decimal.
pub fn success_rate(results: &[TrialResult]) -> Result<f64> {
    let successes = results.iter().filter(|r| r.success).count();
    success_rate_percent(successes, results.len())
}

/// Unrounded `100 * sr / baseline`.
pub fn r_score_raw(sr: f64, sr_baseline: f64) -> Result<f64> {
    if sr_baseline <= 0.0 {
        return Err(Error::UndefinedScore(format!(
            "baseline success rate {sr_baseline} is not positive"
        )));
    }
    Ok(100.0 * sr / sr_baseline)
}

/// Robustness score: `100 * SR_i / SR`, rounded half-up to one decimal.
pub fn r_score(sr: f64, sr_baseline: f64) -> Result<f64> {
    Ok(round_half_up_1dp(r_score_raw(sr, sr_baseline)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn success_rate_fixtures() {
        assert_eq!(success_rate_percent(48, 48).unwrap(), 100.0);
        // 29 of 48 -> 60.4166... -> 60.4.
        assert_eq!(success_rate_percent(29, 48).unwrap(), 60.4);
        assert!(success_rate_percent(0, 0).is_err());
    }

    #[test]
    fn r_score_fixtures() {
        assert_eq!(r_score(58.1, 60.4).unwrap(), 96.2);
        assert_eq!(r_score(29.4, 55.2).unwrap(), 53.3);
        assert_eq!(r_score(42.0, 42.0).unwrap(), 100.0);
        assert!(r_score(10.0, 0.0).is_err());
    }

    #[test]
    fn r_score_is_scale_consistent_before_rounding() {
        let mut k = 0.37;
        for _ in 0..50 {
            k = (k * 1.7 + 0.11) % 5.0 + 0.01;
            let a = 37.3;
            let b = 61.9;
            let plain = r_score_raw(a, b).unwrap();
            let scaled = r_score_raw(k * a, k * b).unwrap();
            assert!(
                (plain - scaled).abs() < 1e-9,
                "k={k}: {plain} vs {scaled}"
            );
        }
    }
}
