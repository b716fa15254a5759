//! Scripted experts. They read the true world state (policies never do) and
//! are deterministic functions of it.

use crate::simenv::world::{
    EnvAction, TaskKind, WorldState, FLASH_FRAMES, GOAL_RADIUS, INTERACT_RADIUS, MOVE_GAIN,
};

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Per-axis proportional step toward the target, saturating at the move gain.
fn move_toward(from: (f64, f64), to: (f64, f64)) -> (f64, f64) {
    (
        ((to.0 - from.0) / MOVE_GAIN).clamp(-1.0, 1.0),
        ((to.1 - from.1) / MOVE_GAIN).clamp(-1.0, 1.0),
    )
}

/// Proportional controller toward the current subgoal; interact fires only
/// when already in range.
///
/// For `button_order` the expert pauses at a button until its flash has
/// expired (one press step plus two flash frames) before heading to the next
/// one. That keeps the demonstrations' "press" and "leave" decisions visually
/// identical in single frames while the flash is still inside a short history
/// window — the designed single-frame ambiguity.
pub fn expert_action(state: &WorldState) -> EnvAction {
    match state.task {
        TaskKind::PickPlace => {
            if !state.holding {
                if dist(state.agent, state.object) <= INTERACT_RADIUS {
                    return [0.0, 0.0, 1.0];
                }
                let (dx, dy) = move_toward(state.agent, state.object);
                [dx, dy, 0.0]
            } else {
                if dist(state.agent, state.goal) <= GOAL_RADIUS {
                    // Success triggers on proximity; nothing left to do.
                    return [0.0, 0.0, 0.0];
                }
                let (dx, dy) = move_toward(state.agent, state.goal);
                [dx, dy, 0.0]
            }
        }
        TaskKind::ButtonOrder => {
            if state.next_button >= 3 {
                return [0.0, 0.0, 0.0];
            }
            // Hold position while the previous button's flash is visible.
            if state.next_button > 0 {
                let prev = state.next_button - 1;
                if let Some(at) = state.pressed[prev] {
                    if state.step.saturating_sub(at) < FLASH_FRAMES {
                        return [0.0, 0.0, 0.0];
                    }
                }
            }
            let target = state.buttons[state.next_button];
            if dist(state.agent, target) <= INTERACT_RADIUS {
                return [0.0, 0.0, 1.0];
            }
            let (dx, dy) = move_toward(state.agent, target);
            [dx, dy, 0.0]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simenv::world::HORIZON;

    fn rollout(task: TaskKind, seed: u64) -> (bool, u32) {
        let (mut state, _) = WorldState::reset(task, seed);
        loop {
            let action = expert_action(&state);
            let (next, _, done, success) = state.step(action).unwrap();
            state = next;
            if done {
                return (success, state.step);
            }
        }
    }

    #[test]
    fn expert_interacts_when_at_the_object() {
        let (mut state, _) = WorldState::reset(TaskKind::PickPlace, 4);
        state.agent = state.object;
        let action = expert_action(&state);
        assert!(action[2] > 0.5);
    }

    #[test]
    fn expert_is_markov_on_world_state() {
        let (state, _) = WorldState::reset(TaskKind::ButtonOrder, 8);
        assert_eq!(expert_action(&state), expert_action(&state.clone()));
    }

    #[test]
    fn expert_solves_pick_place_from_a_thousand_seeds() {
        for seed in 0..1000 {
            let (success, steps) = rollout(TaskKind::PickPlace, seed);
            assert!(success, "seed {seed} failed after {steps} steps");
            assert!(steps <= HORIZON);
        }
    }

    #[test]
    fn expert_solves_button_order_from_a_thousand_seeds() {
        for seed in 0..1000 {
            let (success, steps) = rollout(TaskKind::ButtonOrder, seed);
            assert!(success, "seed {seed} failed after {steps} steps");
            assert!(steps <= HORIZON);
        }
    }
}
