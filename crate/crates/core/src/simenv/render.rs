//! Flat-shaded rendering. A pure function of the world state: same state,
//! same pixels.

use crate::image::ObservationImage;
use crate::simenv::world::{TaskKind, WorldState, FLASH_FRAMES, IMAGE_SIZE};

const BACKGROUND: [u8; 3] = [28, 28, 34];
const AGENT_COLOR: [u8; 3] = [80, 140, 255];
const OBJECT_COLOR: [u8; 3] = [205, 60, 205];
const GOAL_COLOR: [u8; 3] = [60, 220, 180];
const FLASH_COLOR: [u8; 3] = [255, 255, 255];

/// Red, yellow, green.
pub const BUTTON_COLORS: [[u8; 3]; 3] = [[210, 45, 45], [225, 210, 50], [50, 205, 80]];

const BUTTON_RADIUS: f64 = 5.5;
const OBJECT_RADIUS: f64 = 4.5;
const AGENT_HALF: f64 = 4.0;
const GOAL_HALF_WIDTH: f64 = 6.0;

fn to_px(p: f64, extent: usize) -> f64 {
    p * (extent - 1) as f64
}

fn fill_circle(img: &mut ObservationImage, cx: f64, cy: f64, radius: f64, color: [u8; 3]) {
    let x0 = ((cx - radius).floor().max(0.0)) as usize;
    let x1 = ((cx + radius).ceil().min((img.width - 1) as f64)) as usize;
    let y0 = ((cy - radius).floor().max(0.0)) as usize;
    let y1 = ((cy + radius).ceil().min((img.height - 1) as f64)) as usize;
    for y in y0..=y1 {
        for x in x0..=x1 {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            if dx * dx + dy * dy <= radius * radius {
                img.set(x, y, color);
            }
        }
    }
}

fn fill_square(img: &mut ObservationImage, cx: f64, cy: f64, half: f64, color: [u8; 3]) {
    let x0 = ((cx - half).floor().max(0.0)) as usize;
    let x1 = ((cx + half).ceil().min((img.width - 1) as f64)) as usize;
    let y0 = ((cy - half).floor().max(0.0)) as usize;
    let y1 = ((cy + half).ceil().min((img.height - 1) as f64)) as usize;
    for y in y0..=y1 {
        for x in x0..=x1 {
            if (x as f64 - cx).abs() <= half && (y as f64 - cy).abs() <= half {
                img.set(x, y, color);
            }
        }
    }
}

/// Upward-pointing triangle with apex at (cx, cy - half) and base at
/// (cy + half).
fn fill_triangle(img: &mut ObservationImage, cx: f64, cy: f64, half: f64, color: [u8; 3]) {
    let y0 = ((cy - half).floor().max(0.0)) as usize;
    let y1 = ((cy + half).ceil().min((img.height - 1) as f64)) as usize;
    for y in y0..=y1 {
        let t = ((y as f64 - (cy - half)) / (2.0 * half)).clamp(0.0, 1.0);
        let span = half * t;
        let x0 = ((cx - span).floor().max(0.0)) as usize;
        let x1 = ((cx + span).ceil().min((img.width - 1) as f64)) as usize;
        for x in x0..=x1 {
            if (x as f64 - cx).abs() <= span {
                img.set(x, y, color);
            }
        }
    }
}

pub fn render(state: &WorldState) -> ObservationImage {
    let mut img = ObservationImage::filled(IMAGE_SIZE, IMAGE_SIZE, BACKGROUND);
    let px = |p: (f64, f64)| (to_px(p.0, IMAGE_SIZE), to_px(p.1, IMAGE_SIZE));

    match state.task {
        TaskKind::PickPlace => {
            let (gx, gy) = px(state.goal);
            fill_triangle(&mut img, gx, gy, GOAL_HALF_WIDTH, GOAL_COLOR);
            if !state.holding {
                let (ox, oy) = px(state.object);
                fill_circle(&mut img, ox, oy, OBJECT_RADIUS, OBJECT_COLOR);
            }
            let (ax, ay) = px(state.agent);
            fill_square(&mut img, ax, ay, AGENT_HALF, AGENT_COLOR);
            if state.holding {
                // Held object drawn on top so the carrying state is visible.
                fill_circle(&mut img, ax, ay, OBJECT_RADIUS * 0.7, OBJECT_COLOR);
            }
        }
        TaskKind::ButtonOrder => {
            for (i, &pos) in state.buttons.iter().enumerate() {
                let flashing = matches!(
                    state.pressed[i],
                    Some(at) if state.step.saturating_sub(at) < FLASH_FRAMES
                );
                let color = if flashing { FLASH_COLOR } else { BUTTON_COLORS[i] };
                let (bx, by) = px(pos);
                fill_circle(&mut img, bx, by, BUTTON_RADIUS, color);
            }
            let (ax, ay) = px(state.agent);
            fill_square(&mut img, ax, ay, AGENT_HALF, AGENT_COLOR);
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simenv::world::WorldState;

    #[test]
    fn rendering_is_pure() {
        let (state, _) = WorldState::reset(TaskKind::ButtonOrder, 17);
        assert_eq!(render(&state), render(&state));
    }

    #[test]
    fn button_hues_are_the_fixed_constants() {
        let (state, img) = WorldState::reset(TaskKind::ButtonOrder, 3);
        for (i, &pos) in state.buttons.iter().enumerate() {
            let x = to_px(pos.0, IMAGE_SIZE).round() as usize;
            let y = to_px(pos.1, IMAGE_SIZE).round() as usize;
            assert_eq!(img.get(x, y), BUTTON_COLORS[i], "button {i}");
        }
    }

    #[test]
    fn flash_lasts_exactly_two_frames_then_matches_unpressed() {
        let (reset_state, _) = WorldState::reset(TaskKind::ButtonOrder, 11);
        // Stationary agent parked away from the buttons; directly compare
        // renders of states that differ only in press bookkeeping.
        let mut pre = reset_state.clone();
        pre.agent = (0.05, 0.05);
        pre.step = 10;
        let frame_before = render(&pre);

        let mut pressed = pre.clone();
        pressed.pressed[0] = Some(11);
        pressed.next_button = 1;

        pressed.step = 11; // press frame
        let flash1 = render(&pressed);
        pressed.step = 12;
        let flash2 = render(&pressed);
        pressed.step = 13;
        let after = render(&pressed);

        assert_ne!(flash1, frame_before);
        assert_eq!(flash1, {
            let mut s = pressed.clone();
            s.step = 11;
            render(&s)
        });
        assert_ne!(flash2, frame_before);
        // Two frames of flash, then pixel-identical to the pre-press frame:
        // the state ambiguity the multi-frame policy is supposed to resolve.
        assert_eq!(after, frame_before);
    }
}
