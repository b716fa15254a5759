//! Disturbance families, their spatial categories, and parameter grids.

use serde::{Deserialize, Serialize};

use crate::rng::SplitMix64;

/// The eight disturbance families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Blurring,
    Jittering,
    FrameDropping,
    FullOcclusion,
    Overexposing,
    PartialOcclusion,
    GaussianNoise,
    ImpulseNoise,
}

/// Whole-frame, region-confined, or scattered per-pixel corruption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialCategory {
    Global,
    Local,
    Discrete,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Blurring,
        Family::Jittering,
        Family::FrameDropping,
        Family::FullOcclusion,
        Family::Overexposing,
        Family::PartialOcclusion,
        Family::GaussianNoise,
        Family::ImpulseNoise,
    ];

    /// Fixed family-to-category mapping.
    pub fn spatial_category(self) -> SpatialCategory {
        match self {
            Family::Blurring | Family::Jittering | Family::FrameDropping | Family::FullOcclusion => {
                SpatialCategory::Global
            }
            Family::Overexposing | Family::PartialOcclusion => SpatialCategory::Local,
            Family::GaussianNoise | Family::ImpulseNoise => SpatialCategory::Discrete,
        }
    }

    /// Disturbed:clean ratios each family supports in the standard suite.
    /// Families that need a prior clean frame (or whose constant form is
    /// degenerate) run cyclic/sparse only.
    pub fn supported_ratios(self) -> &'static [(u32, u32)] {
        match self {
            Family::Blurring | Family::Jittering | Family::GaussianNoise | Family::ImpulseNoise => {
                &[(1, 0), (1, 1), (1, 3)]
            }
            Family::FrameDropping
            | Family::FullOcclusion
            | Family::Overexposing
            | Family::PartialOcclusion => &[(1, 1), (1, 3), (1, 5)],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Blurring => "blurring",
            Family::Jittering => "jittering",
            Family::FrameDropping => "frame_dropping",
            Family::FullOcclusion => "full_occlusion",
            Family::Overexposing => "overexposing",
            Family::PartialOcclusion => "partial_occlusion",
            Family::GaussianNoise => "gaussian_noise",
            Family::ImpulseNoise => "impulse_noise",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        Family::ALL.iter().copied().find(|f| f.name() == s)
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::fmt::Display for SpatialCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpatialCategory::Global => "global",
            SpatialCategory::Local => "local",
            SpatialCategory::Discrete => "discrete",
        })
    }
}

/// Motion-blur direction: horizontal, vertical, or the main diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JitterDirection {
    Horizontal,
    Vertical,
    Diagonal,
}

/// Family-specific parameters, always drawn from that family's finite grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisturbanceParams {
    /// Separable Gaussian blur. A zero sigma on an axis means no blur along
    /// that axis (delta kernel).
    Blur { kernel: usize, sigma_x: f64, sigma_y: f64 },
    /// 1-D uniform motion-blur kernel.
    Jitter { direction: JitterDirection, size: usize },
    /// Replayed latest clean frame; no parameters.
    FrameDrop {},
    /// Whole frame zeroed; no parameters.
    FullOcclusion {},
    /// Radial bright disk. Center is in fractional image coordinates.
    Overexpose { intensity: f64, center_x: f64, center_y: f64 },
    /// Filled black disk at a fixed vertical center; horizontal center is a
    /// fraction of the width.
    PartialOcclusion { center_x: f64 },
    /// Additive per-channel Gaussian noise.
    GaussianNoise { std: f64 },
    /// Salt-and-pepper: `amount` fraction of pixels forced to white or black.
    ImpulseNoise { amount: f64, salt_ratio: f64 },
}

/// A family together with sampled parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceSpec {
    pub family: Family,
    pub params: DisturbanceParams,
}

impl DisturbanceSpec {
    pub fn spatial_category(&self) -> SpatialCategory {
        self.family.spatial_category()
    }
}

pub const BLUR_KERNELS: [usize; 3] = [11, 15, 29];
pub const BLUR_SIGMAS: [(f64, f64); 2] = [(5.0, 0.0), (0.0, 5.0)];
pub const JITTER_SIZES: [usize; 3] = [15, 25, 50];
pub const OVEREXPOSE_INTENSITIES: [f64; 3] = [0.7, 0.85, 1.0];
pub const PARTIAL_OCCLUSION_CENTERS: [f64; 3] = [0.25, 0.5, 0.75];
pub const GAUSSIAN_STDS: [f64; 3] = [25.0, 50.0, 75.0];
pub const IMPULSE_AMOUNTS: [f64; 3] = [0.2, 0.5, 0.8];
pub const IMPULSE_SALT_RATIOS: [f64; 3] = [0.0, 0.5, 1.0];

/// Draw one parameter set for the family, uniformly over its grid.
///
/// Draw order is pinned per family (it is part of the plan reproducibility
/// contract): blur samples kernel then sigma; jitter samples direction then
/// size; overexposure samples intensity then center-x then center-y (both
/// uniform in the middle half of the image); impulse samples amount then
/// salt ratio. Families with empty grids consume no draws.
pub fn sample_params(family: Family, rng: &mut SplitMix64) -> DisturbanceSpec {
    let params = match family {
        Family::Blurring => {
            let kernel = BLUR_KERNELS[rng.choice(BLUR_KERNELS.len())];
            let (sigma_x, sigma_y) = BLUR_SIGMAS[rng.choice(BLUR_SIGMAS.len())];
            DisturbanceParams::Blur {
                kernel,
                sigma_x,
                sigma_y,
            }
        }
        Family::Jittering => {
            let direction = match rng.choice(3) {
                0 => JitterDirection::Horizontal,
                1 => JitterDirection::Vertical,
                _ => JitterDirection::Diagonal,
            };
            let size = JITTER_SIZES[rng.choice(JITTER_SIZES.len())];
            DisturbanceParams::Jitter { direction, size }
        }
        Family::FrameDropping => DisturbanceParams::FrameDrop {},
        Family::FullOcclusion => DisturbanceParams::FullOcclusion {},
        Family::Overexposing => {
            let intensity = OVEREXPOSE_INTENSITIES[rng.choice(OVEREXPOSE_INTENSITIES.len())];
            let center_x = rng.uniform_in(0.25, 0.75);
            let center_y = rng.uniform_in(0.25, 0.75);
            DisturbanceParams::Overexpose {
                intensity,
                center_x,
                center_y,
            }
        }
        Family::PartialOcclusion => DisturbanceParams::PartialOcclusion {
            center_x: PARTIAL_OCCLUSION_CENTERS[rng.choice(PARTIAL_OCCLUSION_CENTERS.len())],
        },
        Family::GaussianNoise => DisturbanceParams::GaussianNoise {
            std: GAUSSIAN_STDS[rng.choice(GAUSSIAN_STDS.len())],
        },
        Family::ImpulseNoise => {
            let amount = IMPULSE_AMOUNTS[rng.choice(IMPULSE_AMOUNTS.len())];
            let salt_ratio = IMPULSE_SALT_RATIOS[rng.choice(IMPULSE_SALT_RATIOS.len())];
            DisturbanceParams::ImpulseNoise { amount, salt_ratio }
        }
    };
    DisturbanceSpec { family, params }
}
