//! Report emission: JSON, CSV, and an SVG bar plot.

use std::path::Path;

use crate::bench::runner::RobustnessReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Svg,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Option<ReportFormat> {
        match s {
            "json" => Some(ReportFormat::Json),
            "csv" => Some(ReportFormat::Csv),
            "svg" | "svg_plot" => Some(ReportFormat::Svg),
            _ => None,
        }
    }
}

pub fn emit_report(report: &RobustnessReport, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Json => report.to_json()?,
        ReportFormat::Csv => to_csv(report),
        ReportFormat::Svg => to_svg(report),
    };
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Columns: setting,family,category,ratio,trials,sr,r_score. One row per
/// setting plus the leading baseline row.
pub fn to_csv(report: &RobustnessReport) -> String {
    let mut out = String::from("setting,family,category,ratio,trials,sr,r_score\n");
    out.push_str(&format!(
        "clean,,,,{},{:.1},\n",
        report.baseline_trials, report.baseline_sr
    ));
    for s in &report.settings {
        out.push_str(&format!(
            "{},{},{},{},{},{:.1},{}\n",
            s.label,
            s.family,
            s.category,
            s.ratio,
            s.trials,
            s.sr,
            s.r_score.map_or(String::new(), |r| format!("{r:.1}")),
        ));
    }
    out
}

/// Two bars per setting (SR and R-Score), labels beneath.
pub fn to_svg(report: &RobustnessReport) -> String {
    let bar_w = 14.0;
    let group_w = 40.0;
    let plot_h = 220.0;
    let base_y = 250.0;
    let n = report.settings.len().max(1);
    let width = 60.0 + n as f64 * group_w;
    let height = base_y + 90.0;

    let mut body = String::new();
    // Axis and baseline reference.
    body.push_str(&format!(
        "  <line x1=\"40\" y1=\"{base_y}\" x2=\"{:.1}\" y2=\"{base_y}\" stroke=\"#333\"/>\n",
        width - 10.0
    ));
    let scale = plot_h / 110.0;
    let baseline_y = base_y - report.baseline_sr * scale;
    body.push_str(&format!(
        "  <line x1=\"40\" y1=\"{baseline_y:.1}\" x2=\"{:.1}\" y2=\"{baseline_y:.1}\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n",
        width - 10.0
    ));
    body.push_str(&format!(
        "  <text x=\"42\" y=\"{:.1}\" font-size=\"9\" fill=\"#666\">clean SR {:.1}</text>\n",
        baseline_y - 3.0,
        report.baseline_sr
    ));

    for (i, s) in report.settings.iter().enumerate() {
        let x0 = 50.0 + i as f64 * group_w;
        let sr_h = s.sr * scale;
        body.push_str(&format!(
            "  <rect x=\"{x0:.1}\" y=\"{:.1}\" width=\"{bar_w}\" height=\"{sr_h:.1}\" fill=\"#4878cf\"/>\n",
            base_y - sr_h
        ));
        if let Some(r) = s.r_score {
            let r_h = r.min(110.0) * scale;
            body.push_str(&format!(
                "  <rect x=\"{:.1}\" y=\"{:.1}\" width=\"{bar_w}\" height=\"{r_h:.1}\" fill=\"#6acc65\"/>\n",
                x0 + bar_w + 2.0,
                base_y - r_h
            ));
        }
        body.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"8\" fill=\"#333\" transform=\"rotate(45 {:.1} {:.1})\">{}</text>\n",
            x0,
            base_y + 12.0,
            x0,
            base_y + 12.0,
            s.label
        ));
    }

    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n  <title>robustness report: {} (blue = SR, green = R-Score)</title>\n{body}</svg>\n",
        report.task
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::runner::{run_benchmark, SettingConfig, SuiteConfig};
    use crate::disturbance::Family;
    use crate::policy::{ModelConfig, Policy};
    use crate::simenv::{TaskKind, HORIZON};

    fn sample_report() -> RobustnessReport {
        let policy = Policy::init(
            ModelConfig {
                feature_dim: 8,
                decoder_dim: 8,
                frames: 2,
                chunk_len: 2,
                encoder_layers: 1,
                decoder_layers: 1,
                heads: 2,
                diffusion_steps: 2,
                ..ModelConfig::default()
            },
            3,
        )
        .unwrap();
        let suite = SuiteConfig {
            task: TaskKind::PickPlace,
            trials_per_setting: 2,
            baseline_trials: 2,
            horizon: HORIZON as usize,
            namespace: "report-test".into(),
            settings: vec![
                SettingConfig {
                    family: Family::FullOcclusion,
                    disturbed: 1,
                    clean: 1,
                    phase: 0,
                },
                SettingConfig {
                    family: Family::ImpulseNoise,
                    disturbed: 1,
                    clean: 3,
                    phase: 0,
                },
            ],
        };
        run_benchmark(&policy, &suite).unwrap()
    }

    #[test]
    fn json_roundtrips_to_an_equal_report() {
        let report = sample_report();
        let round = RobustnessReport::from_json(&report.to_json().unwrap()).unwrap();
        assert_eq!(round, report);
    }

    #[test]
    fn csv_has_one_row_per_setting_plus_baseline() {
        let report = sample_report();
        let csv = to_csv(&report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 1 + report.settings.len());
        assert!(lines[1].starts_with("clean,"));
        assert!(lines[2].starts_with("full_occlusion@1:1,full_occlusion,global,1:1,2,"));
    }

    #[test]
    fn svg_is_well_formed_xml() {
        let svg = to_svg(&sample_report());
        // Minimal structural validation: every opened tag closes, attributes
        // balance their quotes.
        assert!(svg.starts_with("<?xml"));
        let mut stack: Vec<String> = Vec::new();
        let mut rest = svg.as_str();
        while let Some(open) = rest.find('<') {
            rest = &rest[open + 1..];
            let end = rest.find('>').expect("unclosed tag");
            let tag = &rest[..end];
            rest = &rest[end + 1..];
            if tag.starts_with('?') || tag.starts_with('!') {
                continue;
            }
            assert_eq!(tag.matches('"').count() % 2, 0, "unbalanced quotes in {tag}");
            if let Some(name) = tag.strip_prefix('/') {
                assert_eq!(stack.pop().as_deref(), Some(name), "mismatched close");
            } else if !tag.ends_with('/') {
                let name: String = tag.split_whitespace().next().unwrap().to_string();
                stack.push(name);
            }
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    }
}
