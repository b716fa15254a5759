//! Applying a disturbance spec to one frame.
//!
//! Every family touches only the pixel buffer: no simulator or environment
//! state is involved, and the output always has the input's dimensions.
//! Convolutions accumulate in f64 with reflect-101 borders (index -1 maps to
//! 1, index n to n-2) and quantize once at the end with round-half-away and
//! a clamp to [0, 255].

use crate::disturbance::family::{DisturbanceParams, DisturbanceSpec, JitterDirection};
use crate::error::Result;
use crate::image::ObservationImage;
use crate::rng::SplitMix64;

/// Cross-frame state a disturbance stream needs: the most recent clean frame
/// the policy has seen (for frame dropping).
#[derive(Debug, Clone, Default)]
pub struct DisturbanceContext {
    pub last_clean: Option<ObservationImage>,
}

impl DisturbanceContext {
    pub fn new() -> Self {
        DisturbanceContext::default()
    }

    pub fn record_clean(&mut self, frame: &ObservationImage) {
        self.last_clean = Some(frame.clone());
    }
}

#[inline]
fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Reflect-101 index fold: ..., 2, 1, 0, 1, 2, ... around both borders.
#[inline]
fn reflect(i: i64, n: i64) -> usize {
    debug_assert!(n > 0);
    let mut i = i;
    // A couple of folds suffice for kernel radii below the image size,
    // but loop to stay correct for any offset.
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * (n - 1) - i;
        } else {
            return i as usize;
        }
    }
}

/// Apply one disturbance to one frame.
///
/// `rng` must be the per-frame stream seeded from the plan's `noise_seed`;
/// only the noise families draw from it. For `frame_dropping` without any
/// prior clean frame in `ctx`, the frame passes through unchanged.
pub fn apply_disturbance(
    image: &ObservationImage,
    spec: &DisturbanceSpec,
    ctx: &DisturbanceContext,
    rng: &mut SplitMix64,
) -> Result<ObservationImage> {
    let out = match &spec.params {
        DisturbanceParams::Blur {
            kernel,
            sigma_x,
            sigma_y,
        } => {
            let kx = gaussian_kernel(*kernel, *sigma_x);
            let ky = gaussian_kernel(*kernel, *sigma_y);
            separable_convolve(image, &kx, &ky)
        }
        DisturbanceParams::Jitter { direction, size } => {
            let kernel = vec![1.0 / *size as f64; *size];
            let delta = [1.0];
            match direction {
                JitterDirection::Horizontal => separable_convolve(image, &kernel, &delta),
                JitterDirection::Vertical => separable_convolve(image, &delta, &kernel),
                JitterDirection::Diagonal => diagonal_convolve(image, &kernel),
            }
        }
        DisturbanceParams::FrameDrop {} => match &ctx.last_clean {
            Some(prev) => prev.clone(),
            None => image.clone(),
        },
        DisturbanceParams::FullOcclusion {} => {
            ObservationImage::new(image.height, image.width)
        }
        DisturbanceParams::Overexpose {
            intensity,
            center_x,
            center_y,
        } => overexpose(image, *intensity, *center_x, *center_y),
        DisturbanceParams::PartialOcclusion { center_x } => partial_occlusion(image, *center_x),
        DisturbanceParams::GaussianNoise { std } => gaussian_noise(image, *std, rng),
        DisturbanceParams::ImpulseNoise { amount, salt_ratio } => {
            impulse_noise(image, *amount, *salt_ratio, rng)
        }
    };
    debug_assert_eq!((out.height, out.width), (image.height, image.width));
    Ok(out)
}

/// Normalized 1-D Gaussian taps of the given length; sigma <= 0 degenerates
/// to a delta (identity along that axis).
fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (size / 2) as i64;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|j| (-((j * j) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Horizontal pass with `kx` then vertical pass with `ky`, all in f64.
fn separable_convolve(image: &ObservationImage, kx: &[f64], ky: &[f64]) -> ObservationImage {
    let (h, w) = (image.height as i64, image.width as i64);
    let rx = (kx.len() / 2) as i64;
    let ry = (ky.len() / 2) as i64;

    let mut mid = vec![0.0f64; image.pixels.len()];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..3 {
                let mut acc = 0.0;
                for (j, &kv) in kx.iter().enumerate() {
                    let sx = reflect(x + j as i64 - rx, w);
                    acc += kv * image.pixels[((y as usize * w as usize) + sx) * 3 + ch] as f64;
                }
                mid[((y * w + x) as usize) * 3 + ch] = acc;
            }
        }
    }

    let mut out = ObservationImage::new(image.height, image.width);
    for y in 0..h {
        for x in 0..w {
            for ch in 0..3 {
                let mut acc = 0.0;
                for (j, &kv) in ky.iter().enumerate() {
                    let sy = reflect(y + j as i64 - ry, h);
                    acc += kv * mid[((sy * w as usize) + x as usize) * 3 + ch];
                }
                out.pixels[((y * w + x) as usize) * 3 + ch] = quantize(acc);
            }
        }
    }
    out
}

/// 1-D kernel along the main diagonal (dx = dy).
fn diagonal_convolve(image: &ObservationImage, kernel: &[f64]) -> ObservationImage {
    let (h, w) = (image.height as i64, image.width as i64);
    let r = (kernel.len() / 2) as i64;
    let mut out = ObservationImage::new(image.height, image.width);
    for y in 0..h {
        for x in 0..w {
            for ch in 0..3 {
                let mut acc = 0.0;
                for (j, &kv) in kernel.iter().enumerate() {
                    let o = j as i64 - r;
                    let sx = reflect(x + o, w);
                    let sy = reflect(y + o, h);
                    acc += kv * image.pixels[(sy * w as usize + sx) * 3 + ch] as f64;
                }
                out.pixels[((y * w + x) as usize) * 3 + ch] = quantize(acc);
            }
        }
    }
    out
}

/// Pixels inside a radial falloff disk are pushed toward white:
/// `out = p + intensity * (255 - p) * falloff`, with a linear falloff from 1
/// at the center to 0 at radius `min(h, w) / 3`.
fn overexpose(image: &ObservationImage, intensity: f64, cx: f64, cy: f64) -> ObservationImage {
    let (h, w) = (image.height, image.width);
    let radius = h.min(w) as f64 / 3.0;
    let px = cx * w as f64;
    let py = cy * h as f64;
    let mut out = image.clone();
    for y in 0..h {
        for x in 0..w {
            let dist = ((x as f64 - px).powi(2) + (y as f64 - py).powi(2)).sqrt();
            let falloff = (1.0 - dist / radius).max(0.0);
            if falloff > 0.0 {
                for ch in 0..3 {
                    let idx = (y * w + x) * 3 + ch;
                    let p = image.pixels[idx] as f64;
                    out.pixels[idx] = quantize(p + intensity * (255.0 - p) * falloff);
                }
            }
        }
    }
    out
}

/// Filled black disk of radius `min(h, w) / 4`, vertically centered,
/// horizontal center at `center_x` (fraction of width).
fn partial_occlusion(image: &ObservationImage, center_x: f64) -> ObservationImage {
    let (h, w) = (image.height, image.width);
    let radius = h.min(w) as f64 / 4.0;
    let px = center_x * w as f64;
    let py = h as f64 / 2.0;
    let mut out = image.clone();
    for y in 0..h {
        for x in 0..w {
            let dist = ((x as f64 - px).powi(2) + (y as f64 - py).powi(2)).sqrt();
            if dist <= radius {
                let idx = (y * w + x) * 3;
                out.pixels[idx..idx + 3].fill(0);
            }
        }
    }
    out
}

/// Independent N(0, std) per channel, raster order, channels R,G,B.
fn gaussian_noise(image: &ObservationImage, std: f64, rng: &mut SplitMix64) -> ObservationImage {
    let mut out = image.clone();
    for v in out.pixels.iter_mut() {
        *v = quantize(*v as f64 + rng.normal_with(0.0, std));
    }
    out
}

/// Salt-and-pepper. Per pixel (raster order): one uniform draw decides
/// corruption (`u < amount`); corrupted pixels take a second draw to pick
/// salt (`u < salt_ratio`, all channels 255) or pepper (all channels 0).
fn impulse_noise(
    image: &ObservationImage,
    amount: f64,
    salt_ratio: f64,
    rng: &mut SplitMix64,
) -> ObservationImage {
    let mut out = image.clone();
    for p in 0..image.pixel_count() {
        if rng.uniform() < amount {
            let value = if rng.uniform() < salt_ratio { 255 } else { 0 };
            out.pixels[p * 3..p * 3 + 3].fill(value);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disturbance::family::Family;

    fn test_image() -> ObservationImage {
        // A gradient so blur actually mixes values.
        let mut img = ObservationImage::new(64, 64);
        for y in 0..64 {
            for x in 0..64 {
                img.set(x, y, [(x * 4) as u8, (y * 4) as u8, 128]);
            }
        }
        img
    }

    fn spec(params: DisturbanceParams, family: Family) -> DisturbanceSpec {
        DisturbanceSpec { family, params }
    }

    #[test]
    fn full_occlusion_zeroes_everything() {
        let img = test_image();
        let out = apply_disturbance(
            &img,
            &spec(DisturbanceParams::FullOcclusion {}, Family::FullOcclusion),
            &DisturbanceContext::new(),
            &mut SplitMix64::new(0),
        )
        .unwrap();
        assert!(out.pixels.iter().all(|&p| p == 0));
    }

    #[test]
    fn blur_preserves_constant_images() {
        let img = ObservationImage::filled(64, 64, [57, 111, 203]);
        let out = apply_disturbance(
            &img,
            &spec(
                DisturbanceParams::Blur {
                    kernel: 15,
                    sigma_x: 5.0,
                    sigma_y: 0.0,
                },
                Family::Blurring,
            ),
            &DisturbanceContext::new(),
            &mut SplitMix64::new(0),
        )
        .unwrap();
        assert_eq!(out, img, "normalized kernel must preserve constants");
    }

    #[test]
    fn blur_changes_gradient_images_but_not_their_shape() {
        let img = test_image();
        let out = apply_disturbance(
            &img,
            &spec(
                DisturbanceParams::Blur {
                    kernel: 11,
                    sigma_x: 5.0,
                    sigma_y: 0.0,
                },
                Family::Blurring,
            ),
            &DisturbanceContext::new(),
            &mut SplitMix64::new(0),
        )
        .unwrap();
        assert_ne!(out, img);
        assert_eq!((out.height, out.width), (img.height, img.width));
    }

    #[test]
    fn impulse_salt_fraction_matches_amount() {
        let img = ObservationImage::filled(64, 64, [100, 100, 100]);
        let out = apply_disturbance(
            &img,
            &spec(
                DisturbanceParams::ImpulseNoise {
                    amount: 0.2,
                    salt_ratio: 1.0,
                },
                Family::ImpulseNoise,
            ),
            &DisturbanceContext::new(),
            &mut SplitMix64::new(99),
        )
        .unwrap();
        let salted = (0..out.pixel_count())
            .filter(|&p| out.pixels[p * 3] == 255)
            .count();
        let fraction = salted as f64 / out.pixel_count() as f64;
        assert!(
            (fraction - 0.2).abs() <= 0.02,
            "salt fraction {fraction} outside binomial tolerance"
        );
    }

    #[test]
    fn frame_drop_replays_last_clean_or_passes_through() {
        let img = test_image();
        let clean = ObservationImage::filled(64, 64, [1, 2, 3]);
        let mut ctx = DisturbanceContext::new();
        let s = spec(DisturbanceParams::FrameDrop {}, Family::FrameDropping);

        let passthrough =
            apply_disturbance(&img, &s, &ctx, &mut SplitMix64::new(0)).unwrap();
        assert_eq!(passthrough, img);

        ctx.record_clean(&clean);
        let dropped = apply_disturbance(&img, &s, &ctx, &mut SplitMix64::new(0)).unwrap();
        assert_eq!(dropped, clean);
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let img = test_image();
        let s = spec(
            DisturbanceParams::GaussianNoise { std: 50.0 },
            Family::GaussianNoise,
        );
        let a = apply_disturbance(&img, &s, &DisturbanceContext::new(), &mut SplitMix64::new(5))
            .unwrap();
        let b = apply_disturbance(&img, &s, &DisturbanceContext::new(), &mut SplitMix64::new(5))
            .unwrap();
        let c = apply_disturbance(&img, &s, &DisturbanceContext::new(), &mut SplitMix64::new(6))
            .unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn partial_occlusion_blacks_out_a_disk_only() {
        let img = ObservationImage::filled(64, 64, [200, 200, 200]);
        let out = apply_disturbance(
            &img,
            &spec(
                DisturbanceParams::PartialOcclusion { center_x: 0.5 },
                Family::PartialOcclusion,
            ),
            &DisturbanceContext::new(),
            &mut SplitMix64::new(0),
        )
        .unwrap();
        assert_eq!(out.get(32, 32), [0, 0, 0]);
        assert_eq!(out.get(0, 0), [200, 200, 200]);
        // Radius 16 disk: corner of the image untouched, center gone.
        let black = (0..out.pixel_count())
            .filter(|&p| out.pixels[p * 3..p * 3 + 3] == [0, 0, 0])
            .count();
        let expected_area = std::f64::consts::PI * 16.0 * 16.0;
        assert!((black as f64 - expected_area).abs() < 64.0);
    }

    #[test]
    fn overexposure_brightens_the_disk_center_most() {
        let img = ObservationImage::filled(64, 64, [50, 50, 50]);
        let out = apply_disturbance(
            &img,
            &spec(
                DisturbanceParams::Overexpose {
                    intensity: 1.0,
                    center_x: 0.5,
                    center_y: 0.5,
                },
                Family::Overexposing,
            ),
            &DisturbanceContext::new(),
            &mut SplitMix64::new(0),
        )
        .unwrap();
        assert_eq!(out.get(32, 32), [255, 255, 255]);
        assert_eq!(out.get(0, 0), [50, 50, 50]);
        let mid = out.get(32 + 10, 32);
        assert!(mid[0] > 50 && mid[0] < 255);
    }

    #[test]
    fn jitter_directions_shift_structure_differently() {
        let img = test_image();
        let ctx = DisturbanceContext::new();
        let mk = |direction| {
            apply_disturbance(
                &img,
                &spec(
                    DisturbanceParams::Jitter {
                        direction,
                        size: 15,
                    },
                    Family::Jittering,
                ),
                &ctx,
                &mut SplitMix64::new(0),
            )
            .unwrap()
        };
        let h = mk(JitterDirection::Horizontal);
        let v = mk(JitterDirection::Vertical);
        let d = mk(JitterDirection::Diagonal);
        assert_ne!(h, v);
        assert_ne!(h, d);
        assert_ne!(v, d);
        // Horizontal blur leaves vertical gradient structure intact: the G
        // channel (pure y gradient) is unchanged, the R channel is not.
        assert_eq!(h.get(5, 30)[1], img.get(5, 30)[1]);
    }
}
