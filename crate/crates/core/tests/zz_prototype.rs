//! Scratch prototype for sizing the directional-benefit run. Not part of the
//! suite (ignored); run explicitly and delete afterwards.

use std::time::Instant;

use framebench_core::bench::{evaluate_clean, run_benchmark, SettingConfig, SuiteConfig};
use framebench_core::disturbance::Family;
use framebench_core::policy::{train, ModelConfig, TrainOptions};
use framebench_core::simenv::{generate_dataset, TaskKind, HORIZON};

fn config_with_frames(frames: usize) -> ModelConfig {
    ModelConfig {
        frames,
        ..ModelConfig::default()
    }
}

#[test]
#[ignore]
fn zz_prototype_directional() {
    let steps: usize = std::env::var("PROTO_STEPS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(600);
    let lr: f64 = std::env::var("PROTO_LR")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1e-3);
    let episodes: usize = std::env::var("PROTO_EPISODES")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(200);
    let batch: usize = std::env::var("PROTO_BATCH")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(8);

    let t0 = Instant::now();
    let button_data = generate_dataset(TaskKind::ButtonOrder, episodes, 1000).unwrap();
    let pick_data = generate_dataset(TaskKind::PickPlace, episodes, 2000).unwrap();
    println!("datasets generated in {:.1}s", t0.elapsed().as_secs_f64());

    let opts = TrainOptions {
        steps,
        batch_size: batch,
        lr,
        ..TrainOptions::default()
    };

    for (label, frames) in [("M=4", 4usize), ("M=1", 1usize)] {
        let t1 = Instant::now();
        let (policy, curve) = train(&button_data, config_with_frames(frames), &opts).unwrap();
        let train_secs = t1.elapsed().as_secs_f64();
        let tail: f64 =
            curve[curve.len() - 20..].iter().map(|p| p.loss).sum::<f64>() / 20.0;
        let t2 = Instant::now();
        let (sr, _) = evaluate_clean(&policy, TaskKind::ButtonOrder, 40, "proto-button").unwrap();
        println!(
            "button {label}: train {train_secs:.0}s tail-loss {tail:.3} SR {sr:.1} eval {:.0}s",
            t2.elapsed().as_secs_f64()
        );
    }

    for (label, frames) in [("M=4", 4usize), ("M=1", 1usize)] {
        let t1 = Instant::now();
        let (policy, _) = train(&pick_data, config_with_frames(frames), &opts).unwrap();
        let train_secs = t1.elapsed().as_secs_f64();
        let suite = SuiteConfig {
            task: TaskKind::PickPlace,
            trials_per_setting: 20,
            baseline_trials: 20,
            horizon: HORIZON as usize,
            namespace: "proto-pick".into(),
            settings: vec![SettingConfig {
                family: Family::FullOcclusion,
                disturbed: 1,
                clean: 1,
                phase: 0,
            }],
        };
        let t2 = Instant::now();
        let report = run_benchmark(&policy, &suite).unwrap();
        println!(
            "pick {label}: train {train_secs:.0}s baseline SR {:.1} occluded SR {:.1} R {:?} bench {:.0}s",
            report.baseline_sr,
            report.settings[0].sr,
            report.settings[0].r_score,
            t2.elapsed().as_secs_f64()
        );
    }
    println!("total {:.0}s", t0.elapsed().as_secs_f64());
}
