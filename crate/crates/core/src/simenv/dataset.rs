//! Episode container format and the training window loader.
//!
//! A dataset is a directory:
//!
//! ```text
//! <dir>/index.json      metadata + per-episode entries, see [`IndexFile`]
//! <dir>/ep00000.bin     raw frames then actions, one file per episode
//! ```
//!
//! Each episode blob is `(T+1) * H * W * 3` bytes of row-major RGB frames
//! followed by `T * n` little-endian f64 actions. Regenerating a dataset
//! from the same seed yields byte-identical files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ObservationImage;
use crate::rng::SplitMix64;
use crate::simenv::expert::expert_action;
use crate::simenv::world::{TaskKind, WorldState, IMAGE_SIZE};

pub const ACTION_DIM: usize = 3;

#[derive(Debug, Clone)]
pub struct EpisodeRecord {
    pub instruction: u32,
    pub images: Vec<ObservationImage>,
    pub actions: Vec<[f64; ACTION_DIM]>,
    pub success: bool,
}

impl EpisodeRecord {
    /// Number of actions (one fewer than images).
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeSet {
    pub task: TaskKind,
    pub height: usize,
    pub width: usize,
    pub seed: u64,
    pub episodes: Vec<EpisodeRecord>,
}

#[derive(Serialize, Deserialize)]
struct IndexFile {
    version: u32,
    task: TaskKind,
    height: usize,
    width: usize,
    action_dim: usize,
    seed: u64,
    episodes: Vec<IndexEntry>,
}

#[derive(Serialize, Deserialize)]
struct IndexEntry {
    file: String,
    image_count: usize,
    action_count: usize,
    instruction: u32,
    success: bool,
}

/// Roll out `episodes` expert demonstrations. Per-episode seeds come from a
/// splitmix64 stream over `seed`, so any prefix of a larger dataset is
/// identical to a smaller one generated from the same seed.
pub fn generate_dataset(task: TaskKind, episodes: usize, seed: u64) -> Result<EpisodeSet> {
    if episodes == 0 {
        return Err(Error::Input("dataset needs at least one episode".into()));
    }
    let mut seeds = SplitMix64::new(seed);
    let mut records = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let ep_seed = seeds.next_u64();
        let (mut state, first) = WorldState::reset(task, ep_seed);
        let mut images = vec![first];
        let mut actions = Vec::new();
        loop {
            let action = expert_action(&state);
            let (next, image, done, _) = state.step(action)?;
            actions.push(action);
            images.push(image);
            state = next;
            if done {
                break;
            }
        }
        records.push(EpisodeRecord {
            instruction: task.instruction_id(),
            images,
            actions,
            success: state.success,
        });
    }
    Ok(EpisodeSet {
        task,
        height: IMAGE_SIZE,
        width: IMAGE_SIZE,
        seed,
        episodes: records,
    })
}

impl EpisodeSet {
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let mut entries = Vec::with_capacity(self.episodes.len());
        for (i, ep) in self.episodes.iter().enumerate() {
            let file = format!("ep{i:05}.bin");
            let mut blob =
                Vec::with_capacity(ep.images.len() * self.height * self.width * 3 + ep.actions.len() * ACTION_DIM * 8);
            for img in &ep.images {
                if img.height != self.height || img.width != self.width {
                    return Err(Error::dimension(
                        "EpisodeSet::save",
                        format!("{}x{}", self.width, self.height),
                        format!("{}x{}", img.width, img.height),
                    ));
                }
                blob.extend_from_slice(&img.pixels);
            }
            for action in &ep.actions {
                for v in action {
                    blob.extend_from_slice(&v.to_le_bytes());
                }
            }
            let path = dir.join(&file);
            std::fs::write(&path, blob).map_err(|e| Error::io(path.display().to_string(), e))?;
            entries.push(IndexEntry {
                file,
                image_count: ep.images.len(),
                action_count: ep.actions.len(),
                instruction: ep.instruction,
                success: ep.success,
            });
        }
        let index = IndexFile {
            version: 1,
            task: self.task,
            height: self.height,
            width: self.width,
            action_dim: ACTION_DIM,
            seed: self.seed,
            episodes: entries,
        };
        let path = dir.join("index.json");
        std::fs::write(&path, serde_json::to_string_pretty(&index)?)
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(dir: &Path) -> Result<EpisodeSet> {
        let index_path = dir.join("index.json");
        let text = std::fs::read_to_string(&index_path)
            .map_err(|e| Error::io(index_path.display().to_string(), e))?;
        let index: IndexFile = serde_json::from_str(&text)?;
        if index.action_dim != ACTION_DIM {
            return Err(Error::Input(format!(
                "dataset action dim {} unsupported",
                index.action_dim
            )));
        }
        let frame_bytes = index.height * index.width * 3;
        let mut episodes = Vec::with_capacity(index.episodes.len());
        for entry in &index.episodes {
            let path = dir.join(&entry.file);
            let bytes =
                std::fs::read(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
            let expected = entry.image_count * frame_bytes + entry.action_count * ACTION_DIM * 8;
            if bytes.len() != expected {
                return Err(Error::Input(format!(
                    "episode blob {} has {} bytes, expected {expected}",
                    entry.file,
                    bytes.len()
                )));
            }
            if entry.image_count != entry.action_count + 1 {
                return Err(Error::Input(format!(
                    "episode {} image/action counts are inconsistent",
                    entry.file
                )));
            }
            let mut images = Vec::with_capacity(entry.image_count);
            for f in 0..entry.image_count {
                images.push(ObservationImage::from_pixels(
                    index.height,
                    index.width,
                    bytes[f * frame_bytes..(f + 1) * frame_bytes].to_vec(),
                )?);
            }
            let mut actions = Vec::with_capacity(entry.action_count);
            let base = entry.image_count * frame_bytes;
            for a in 0..entry.action_count {
                let mut action = [0.0; ACTION_DIM];
                for (d, slot) in action.iter_mut().enumerate() {
                    let off = base + (a * ACTION_DIM + d) * 8;
                    *slot = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
                }
                actions.push(action);
            }
            episodes.push(EpisodeRecord {
                instruction: entry.instruction,
                images,
                actions,
                success: entry.success,
            });
        }
        Ok(EpisodeSet {
            task: index.task,
            height: index.height,
            width: index.width,
            seed: index.seed,
            episodes,
        })
    }

    pub fn action_rows(&self) -> impl Iterator<Item = &[f64; ACTION_DIM]> {
        self.episodes.iter().flat_map(|e| e.actions.iter())
    }
}

/// Reference to one training sample: episode index plus the current-frame
/// index `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowRef {
    pub episode: usize,
    pub t: usize,
}

/// Enumerate (M images, K actions) sample positions.
///
/// With `padded` off, `t` ranges over `[M-1, images-2]` — every frame in the
/// window really exists. With `padded` on (the training default, mirroring
/// inference-time first-frame padding), `t` starts at 0 and indices before
/// the episode start resolve to frame 0. Action chunks always start at `t`
/// and repeat the final action past the episode end.
pub fn window_samples(set: &EpisodeSet, frames: usize, padded: bool) -> Vec<WindowRef> {
    let mut out = Vec::new();
    for (episode, ep) in set.episodes.iter().enumerate() {
        if ep.images.len() < 2 {
            continue;
        }
        let start = if padded { 0 } else { frames.saturating_sub(1) };
        for t in start..=ep.images.len() - 2 {
            out.push(WindowRef { episode, t });
        }
    }
    out
}

impl EpisodeSet {
    /// The M window frames ending at `t` (first-frame padded) and the K
    /// action rows starting at `t` (tail-repeat padded).
    pub fn window(
        &self,
        wref: WindowRef,
        frames: usize,
        chunk: usize,
    ) -> (Vec<&ObservationImage>, Vec<[f64; ACTION_DIM]>, u32) {
        let ep = &self.episodes[wref.episode];
        let images: Vec<&ObservationImage> = (0..frames)
            .map(|k| {
                let idx = (wref.t + k).saturating_sub(frames - 1);
                &ep.images[idx]
            })
            .collect();
        let actions: Vec<[f64; ACTION_DIM]> = (0..chunk)
            .map(|k| ep.actions[(wref.t + k).min(ep.actions.len() - 1)])
            .collect();
        (images, actions, ep.instruction)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_roundtrips_and_regenerates_identically() {
        let set = generate_dataset(TaskKind::PickPlace, 10, 7).unwrap();
        assert_eq!(set.episodes.len(), 10);
        assert!(set.episodes.iter().all(|e| e.success));
        assert!(set
            .episodes
            .iter()
            .all(|e| e.images.len() == e.actions.len() + 1));

        let dir = tempfile::tempdir().unwrap();
        let d1 = dir.path().join("a");
        let d2 = dir.path().join("b");
        set.save(&d1).unwrap();
        generate_dataset(TaskKind::PickPlace, 10, 7)
            .unwrap()
            .save(&d2)
            .unwrap();
        for entry in std::fs::read_dir(&d1).unwrap() {
            let name = entry.unwrap().file_name();
            assert_eq!(
                std::fs::read(d1.join(&name)).unwrap(),
                std::fs::read(d2.join(&name)).unwrap(),
                "file {name:?} differs between regenerations"
            );
        }

        let loaded = EpisodeSet::load(&d1).unwrap();
        assert_eq!(loaded.episodes.len(), set.episodes.len());
        for (a, b) in loaded.episodes.iter().zip(&set.episodes) {
            assert_eq!(a.images, b.images);
            assert_eq!(a.actions, b.actions);
        }
    }

    #[test]
    fn window_count_matches_enumeration() {
        // A 20-image episode at M=4 with padding off: t in [3, 18] -> 16.
        let mut set = generate_dataset(TaskKind::PickPlace, 1, 0).unwrap();
        let frame = set.episodes[0].images[0].clone();
        set.episodes[0] = EpisodeRecord {
            instruction: 0,
            images: vec![frame; 20],
            actions: vec![[0.0; ACTION_DIM]; 19],
            success: true,
        };
        let samples = window_samples(&set, 4, false);
        assert_eq!(samples.len(), 16);
        assert_eq!(samples.first().unwrap().t, 3);
        assert_eq!(samples.last().unwrap().t, 18);

        // Padded mode starts at t = 0.
        let padded = window_samples(&set, 4, true);
        assert_eq!(padded.len(), 19);
        assert_eq!(padded.first().unwrap().t, 0);
    }

    #[test]
    fn window_pads_first_frame_and_action_tail() {
        let set = generate_dataset(TaskKind::ButtonOrder, 1, 3).unwrap();
        let (images, actions, instr) = set.window(WindowRef { episode: 0, t: 0 }, 4, 4);
        assert_eq!(instr, TaskKind::ButtonOrder.instruction_id());
        assert_eq!(images.len(), 4);
        for img in &images {
            assert_eq!(**img, set.episodes[0].images[0]);
        }
        let last_t = set.episodes[0].actions.len() - 1;
        let (_, tail_actions, _) = set.window(WindowRef { episode: 0, t: last_t }, 4, 4);
        for a in &tail_actions {
            assert_eq!(*a, set.episodes[0].actions[last_t]);
        }
        assert_eq!(actions.len(), 4);
    }
}
