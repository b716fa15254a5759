//! Synthetic pixel-based manipulation environment.
//!
//! Two tasks on a 64x64 RGB canvas: `pick_place` (carry an object to a goal)
//! and `button_order` (press three color-coded buttons in a fixed order).
//! `button_order` is deliberately ambiguous from single frames: a pressed
//! button flashes white for exactly two frames and then renders identically
//! to an unpressed one, so only the recent history reveals which buttons are
//! done.

mod dataset;
mod expert;
mod render;
mod world;

pub use dataset::{generate_dataset, window_samples, EpisodeRecord, EpisodeSet, WindowRef};
pub use expert::expert_action;
pub use render::{render, BUTTON_COLORS};
pub use world::{
    EnvAction, TaskKind, WorldState, FLASH_FRAMES, GOAL_RADIUS, HORIZON, INTERACT_RADIUS,
    MOVE_GAIN,
};
