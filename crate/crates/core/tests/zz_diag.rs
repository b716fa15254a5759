//! Scratch diagnostics. Ignored; run explicitly, delete afterwards.

use framebench_core::bench::evaluate_clean;
use framebench_core::policy::{train, ModelConfig, Policy, RolloutCounters, TrainOptions};
use framebench_core::rng::SplitMix64;
use framebench_core::simenv::{expert_action, generate_dataset, TaskKind, WorldState};

#[test]
#[ignore]
fn zz_diag_pick_place() {
    let steps: usize = std::env::var("DIAG_STEPS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1000);
    let lr: f64 = std::env::var("DIAG_LR")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1e-3);
    let frames: usize = std::env::var("DIAG_FRAMES")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let diffusion: usize = std::env::var("DIAG_DIFFUSION")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(50);

    let data = generate_dataset(TaskKind::PickPlace, 100, 2000).unwrap();
    let config = ModelConfig {
        frames,
        diffusion_steps: diffusion,
        ..ModelConfig::default()
    };
    let opts = TrainOptions {
        steps,
        batch_size: 8,
        lr,
        ..TrainOptions::default()
    };
    let t0 = std::time::Instant::now();
    let (policy, curve) = train(&data, config, &opts).unwrap();
    let tail: f64 = curve[curve.len() - 20..].iter().map(|p| p.loss).sum::<f64>() / 20.0;
    println!(
        "trained {steps} steps in {:.0}s, tail loss {tail:.3}",
        t0.elapsed().as_secs_f64()
    );

    // Trace one episode against the expert.
    let (mut state, mut image) = WorldState::reset(TaskKind::PickPlace, 123_456);
    let mut cache = policy.new_cache().unwrap();
    let mut rng = SplitMix64::new(9);
    let mut counters = RolloutCounters::default();
    println!("object {:?} goal {:?}", state.object, state.goal);
    for step in 0..20 {
        let action = policy
            .predict_step(&image, 0, &mut cache, &mut rng, &mut counters)
            .unwrap();
        let expert = expert_action(&state);
        println!(
            "step {step}: agent ({:.2},{:.2}) holding {} policy [{:+.2} {:+.2} {:+.2}] expert [{:+.2} {:+.2} {:+.2}]",
            state.agent.0, state.agent.1, state.holding,
            action[0], action[1], action[2],
            expert[0], expert[1], expert[2],
        );
        let (next, img, done, success) = state.step([action[0], action[1], action[2]]).unwrap();
        state = next;
        image = img;
        if done {
            println!("done at {step}, success {success}");
            break;
        }
    }

    let (sr, results) = evaluate_clean(&policy, TaskKind::PickPlace, 20, "diag").unwrap();
    let mean_steps: f64 =
        results.iter().map(|r| r.steps as f64).sum::<f64>() / results.len() as f64;
    println!("clean SR {sr:.1} (mean steps {mean_steps:.1})");
}

#[test]
#[ignore]
fn zz_diag_conditioning_gap() {
    use framebench_core::nn::{Tape, Tensor2};
    use framebench_core::policy::{
        assemble_sample, diffusion_loss, encode_frame, DiffusionBatch, NoiseSchedule,
        PastFeatures,
    };
    use framebench_core::simenv::window_samples;

    let steps: usize = std::env::var("DIAG_STEPS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1500);
    let lr: f64 = std::env::var("DIAG_LR")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1e-3);
    let data = generate_dataset(TaskKind::PickPlace, 100, 2000).unwrap();
    let config = ModelConfig {
        frames: 1,
        ..ModelConfig::default()
    };
    let opts = TrainOptions {
        steps,
        batch_size: 8,
        lr,
        ..TrainOptions::default()
    };
    let (policy, _) = train(&data, config.clone(), &opts).unwrap();
    let schedule = NoiseSchedule::linear(config.diffusion_steps).unwrap();

    // Loss with true vs mismatched (rotated-by-one) windows, same noise.
    let windows = window_samples(&data, 1, true);
    let mut rng = SplitMix64::new(5);
    let picks: Vec<usize> = (0..64).map(|_| rng.choice(windows.len())).collect();
    let mut per_t = vec![(0.0f64, 0.0f64, 0usize); 5];
    for (j, &w) in picks.iter().enumerate() {
        let wref = windows[w];
        let wrong = windows[picks[(j + 1) % picks.len()]];
        let (images, actions, instr) = data.window(wref, 1, 4);
        let (wrong_images, _, _) = data.window(wrong, 1, 4);
        let normalized: Vec<Vec<f64>> = actions
            .iter()
            .map(|a| policy.normalizer.normalize_row(a))
            .collect();
        let clean = Tensor2::from_rows(&normalized).unwrap();
        let noise =
            Tensor2::from_vec(4, 3, (0..12).map(|_| rng.normal()).collect()).unwrap();
        let bucket = rng.choice(5);
        let t = 1 + bucket * 10 + rng.choice(10);
        for (which, img) in [(0usize, images[0]), (1usize, wrong_images[0])] {
            let mut tape = Tape::new();
            let current = encode_frame(&mut tape, &policy.params, &config, img, instr).unwrap();
            let sample = assemble_sample(
                &schedule,
                current,
                PastFeatures::Detached(vec![]),
                clean.clone(),
                noise.clone(),
                t,
            )
            .unwrap();
            let batch = DiffusionBatch {
                samples: vec![sample],
            };
            let loss = diffusion_loss(&mut tape, &policy.params, &config, &batch).unwrap();
            let v = tape.value(loss).item();
            if which == 0 {
                per_t[bucket].0 += v;
                per_t[bucket].2 += 1;
            } else {
                per_t[bucket].1 += v;
            }
        }
    }
    for (bucket, (true_sum, wrong_sum, count)) in per_t.iter().enumerate() {
        println!(
            "t in [{}..{}]: true {:.4} wrong {:.4} (n={count})",
            bucket * 10 + 1,
            bucket * 10 + 10,
            true_sum / *count as f64,
            wrong_sum / *count as f64
        );
    }
}

#[test]
#[ignore]
fn zz_diag_feature_spread() {
    let data = generate_dataset(TaskKind::PickPlace, 20, 2000).unwrap();
    let config = ModelConfig {
        frames: 1,
        ..ModelConfig::default()
    };

    let frames: Vec<_> = (0..10)
        .map(|i| &data.episodes[i].images[0])
        .collect();

    let spread = |policy: &Policy, label: &str| {
        let feats: Vec<Vec<f64>> = frames
            .iter()
            .map(|f| policy.encode(f, 0).unwrap())
            .collect();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mean_norm: f64 = feats.iter().map(|f| norm(f)).sum::<f64>() / feats.len() as f64;
        let mut max_dist = 0.0f64;
        let mut mean_dist = 0.0f64;
        let mut pairs = 0;
        for i in 0..feats.len() {
            for j in (i + 1)..feats.len() {
                let d: f64 = feats[i]
                    .iter()
                    .zip(&feats[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                max_dist = max_dist.max(d);
                mean_dist += d;
                pairs += 1;
            }
        }
        println!(
            "{label}: |f| {mean_norm:.4} pairwise dist mean {:.6} max {max_dist:.6}",
            mean_dist / pairs as f64
        );
    };

    let init_policy = Policy::init(config.clone(), 0).unwrap();
    spread(&init_policy, "init");

    let opts = TrainOptions {
        steps: 600,
        batch_size: 8,
        lr: 1e-3,
        ..TrainOptions::default()
    };
    let (trained, _) = train(&data, config, &opts).unwrap();
    spread(&trained, "trained-600");
}

#[test]
#[ignore]
fn zz_diag_expert_replay() {
    // Sanity floor: a policy that replays normalized-denormalized expert
    // actions must succeed. Checks the normalizer and env loop, not learning.
    let data = generate_dataset(TaskKind::PickPlace, 20, 2000).unwrap();
    let policy = Policy::init(ModelConfig::default(), 0).unwrap();
    let norm = framebench_core::policy::ActionNormalizer::fit(
        data.action_rows().map(|r| r.as_slice()),
        3,
    )
    .unwrap();
    let _ = policy;
    let mut wins = 0;
    for seed in 0..20u64 {
        let (mut state, _) = WorldState::reset(TaskKind::PickPlace, seed);
        loop {
            let e = expert_action(&state);
            let roundtrip = norm.denormalize_row(&norm.normalize_row(&e));
            let (next, _, done, success) =
                state.step([roundtrip[0], roundtrip[1], roundtrip[2]]).unwrap();
            state = next;
            if done {
                if success {
                    wins += 1;
                }
                break;
            }
        }
    }
    println!("expert replay through normalizer: {wins}/20");
}
