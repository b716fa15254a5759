//! 8-bit RGB observation frames.

use crate::error::{Error, Result};

/// Row-major, RGB-interleaved 8-bit image. The unit every disturbance acts
/// on and the only thing policies ever observe.
#[derive(Clone, PartialEq, Eq)]
pub struct ObservationImage {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<u8>,
}

impl ObservationImage {
    pub fn new(height: usize, width: usize) -> Self {
        ObservationImage {
            height,
            width,
            pixels: vec![0; height * width * 3],
        }
    }

    pub fn filled(height: usize, width: usize, rgb: [u8; 3]) -> Self {
        let mut pixels = Vec::with_capacity(height * width * 3);
        for _ in 0..height * width {
            pixels.extend_from_slice(&rgb);
        }
        ObservationImage {
            height,
            width,
            pixels,
        }
    }

    pub fn from_pixels(height: usize, width: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != height * width * 3 {
            return Err(Error::dimension(
                "ObservationImage",
                format!("{} bytes", height * width * 3),
                format!("{} bytes", pixels.len()),
            ));
        }
        Ok(ObservationImage {
            height,
            width,
            pixels,
        })
    }

    #[inline]
    fn offset(&self, x: usize, y: usize) -> usize {
        (y * self.width + x) * 3
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let o = self.offset(x, y);
        [self.pixels[o], self.pixels[o + 1], self.pixels[o + 2]]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let o = self.offset(x, y);
        self.pixels[o..o + 3].copy_from_slice(&rgb);
    }

    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }
}

impl std::fmt::Debug for ObservationImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "ObservationImage({}x{}, {} bytes)",
            self.width,
            self.height,
            self.pixels.len()
        )
    }
}
