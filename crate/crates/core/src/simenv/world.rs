//! World state and dynamics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ObservationImage;
use crate::rng::SplitMix64;
use crate::simenv::render::render;

pub const MOVE_GAIN: f64 = 0.08;
pub const INTERACT_RADIUS: f64 = 0.08;
pub const GOAL_RADIUS: f64 = 0.06;
pub const HORIZON: u32 = 60;
/// A pressed button flashes white for exactly this many rendered frames.
pub const FLASH_FRAMES: u32 = 2;

pub const IMAGE_SIZE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    PickPlace,
    ButtonOrder,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::PickPlace => "pick_place",
            TaskKind::ButtonOrder => "button_order",
        }
    }

    pub fn parse(s: &str) -> Option<TaskKind> {
        match s {
            "pick_place" => Some(TaskKind::PickPlace),
            "button_order" => Some(TaskKind::ButtonOrder),
            _ => None,
        }
    }

    /// Instruction id used in datasets and by policies.
    pub fn instruction_id(self) -> u32 {
        match self {
            TaskKind::PickPlace => 0,
            TaskKind::ButtonOrder => 1,
        }
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// (dx, dy, interact), each clamped to [-1, 1] on entry.
pub type EnvAction = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub task: TaskKind,
    pub agent: (f64, f64),
    pub object: (f64, f64),
    pub goal: (f64, f64),
    pub holding: bool,
    /// Red, yellow, green button positions.
    pub buttons: [(f64, f64); 3],
    /// Step index at which each button was pressed.
    pub pressed: [Option<u32>; 3],
    /// Next index into the fixed press order red -> yellow -> green.
    pub next_button: usize,
    pub step: u32,
    pub done: bool,
    pub success: bool,
    pub seed: u64,
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

impl WorldState {
    /// Deterministic initial layout from the seed.
    pub fn reset(task: TaskKind, seed: u64) -> (WorldState, ObservationImage) {
        let mut rng = SplitMix64::new(seed);
        let agent = (0.5, 0.85);
        let mut state = WorldState {
            task,
            agent,
            object: (0.0, 0.0),
            goal: (0.0, 0.0),
            holding: false,
            buttons: [(0.0, 0.0); 3],
            pressed: [None; 3],
            next_button: 0,
            step: 0,
            done: false,
            success: false,
            seed,
        };
        match task {
            TaskKind::PickPlace => {
                let sample = |rng: &mut SplitMix64| {
                    (rng.uniform_in(0.2, 0.8), rng.uniform_in(0.25, 0.6))
                };
                state.object = sample(&mut rng);
                // Solvability margin: goal at least 0.2 away from the object.
                loop {
                    state.goal = sample(&mut rng);
                    if dist(state.goal, state.object) >= 0.2 {
                        break;
                    }
                }
            }
            TaskKind::ButtonOrder => {
                // Sequential rejection: each button at least 0.25 from the
                // earlier ones.
                for i in 0..3 {
                    loop {
                        let candidate =
                            (rng.uniform_in(0.2, 0.8), rng.uniform_in(0.2, 0.8));
                        if state.buttons[..i]
                            .iter()
                            .all(|&b| dist(b, candidate) >= 0.25)
                        {
                            state.buttons[i] = candidate;
                            break;
                        }
                    }
                }
            }
        }
        let image = render(&state);
        (state, image)
    }

    /// Advance one step. Order: move, carry, interact, success/failure,
    /// horizon check, render.
    pub fn step(&self, action: EnvAction) -> Result<(WorldState, ObservationImage, bool, bool)> {
        if self.done {
            return Err(Error::State("step called on a finished episode".into()));
        }
        let dx = action[0].clamp(-1.0, 1.0);
        let dy = action[1].clamp(-1.0, 1.0);
        let interact = action[2].clamp(-1.0, 1.0) > 0.5;

        let mut next = self.clone();
        next.step = self.step + 1;
        next.agent = (
            (self.agent.0 + MOVE_GAIN * dx).clamp(0.0, 1.0),
            (self.agent.1 + MOVE_GAIN * dy).clamp(0.0, 1.0),
        );
        if next.holding {
            next.object = next.agent;
        }

        match self.task {
            TaskKind::PickPlace => {
                if interact {
                    if next.holding {
                        next.holding = false;
                    } else if dist(next.agent, next.object) <= INTERACT_RADIUS {
                        next.holding = true;
                        next.object = next.agent;
                    }
                }
                if dist(next.object, next.goal) <= GOAL_RADIUS {
                    next.success = true;
                    next.done = true;
                }
            }
            TaskKind::ButtonOrder => {
                if interact {
                    let hit = next
                        .buttons
                        .iter()
                        .position(|&b| dist(next.agent, b) <= INTERACT_RADIUS);
                    if let Some(b) = hit {
                        let is_next = b == next.next_button && next.pressed[b].is_none();
                        if is_next {
                            next.pressed[b] = Some(next.step);
                            next.next_button += 1;
                            if next.next_button == 3 {
                                next.success = true;
                                next.done = true;
                            }
                        } else {
                            // Wrong order or re-press: the episode fails.
                            next.done = true;
                            next.success = false;
                        }
                    }
                }
            }
        }

        if !next.done && next.step >= HORIZON {
            next.done = true;
        }
        let image = render(&next);
        Ok((next.clone(), image, next.done, next.success))
    }
}
