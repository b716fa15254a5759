//! FIFO ring of the last M learnable features.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// One per-frame feature vector with the step it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub values: Vec<f64>,
    pub step: u64,
}

/// Ring buffer of exactly M features, oldest first. The very first push of
/// an episode fills the whole buffer with copies of that feature
/// (first-frame padding); afterwards each push evicts the oldest entry.
#[derive(Debug, Clone)]
pub struct FeatureChunk {
    dim: usize,
    capacity: usize,
    entries: VecDeque<Feature>,
    pushes: u64,
}

impl FeatureChunk {
    pub fn new(capacity: usize, dim: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("feature chunk capacity must be >= 1".into()));
        }
        Ok(FeatureChunk {
            dim,
            capacity,
            entries: VecDeque::with_capacity(capacity),
            pushes: 0,
        })
    }

    pub fn push(&mut self, values: Vec<f64>) -> Result<()> {
        if values.len() != self.dim {
            return Err(Error::dimension(
                "FeatureChunk::push",
                format!("feature of dim {}", self.dim),
                format!("dim {}", values.len()),
            ));
        }
        let feature = Feature {
            values,
            step: self.pushes,
        };
        if self.entries.is_empty() {
            for _ in 0..self.capacity {
                self.entries.push_back(feature.clone());
            }
        } else {
            self.entries.pop_front();
            self.entries.push_back(feature);
        }
        self.pushes += 1;
        Ok(())
    }

    /// True once anything has been pushed (the buffer is always full after
    /// the first push).
    pub fn is_primed(&self) -> bool {
        !self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pushes(&self) -> u64 {
        self.pushes
    }

    /// Oldest to newest.
    pub fn features(&self) -> impl Iterator<Item = &Feature> {
        self.entries.iter()
    }

    pub fn newest(&self) -> Option<&Feature> {
        self.entries.back()
    }

    /// The M-1 past features (oldest first) and the current one.
    pub fn past_and_current(&self) -> Result<(Vec<&Feature>, &Feature)> {
        if !self.is_primed() {
            return Err(Error::State("feature chunk is empty".into()));
        }
        let mut features: Vec<&Feature> = self.entries.iter().collect();
        let current = features.pop().expect("non-empty chunk");
        Ok((features, current))
    }

    pub fn clear(&mut self) {
        self.entries.clear();
        self.pushes = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(v: f64) -> Vec<f64> {
        vec![v, v]
    }

    fn values(chunk: &FeatureChunk) -> Vec<f64> {
        chunk.features().map(|feat| feat.values[0]).collect()
    }

    #[test]
    fn first_push_pads_with_copies() {
        let mut chunk = FeatureChunk::new(4, 2).unwrap();
        assert!(!chunk.is_primed());
        chunk.push(f(7.0)).unwrap();
        assert_eq!(values(&chunk), vec![7.0, 7.0, 7.0, 7.0]);
    }

    #[test]
    fn fifo_evicts_oldest() {
        let mut chunk = FeatureChunk::new(4, 2).unwrap();
        for v in 0..5 {
            chunk.push(f(v as f64)).unwrap();
        }
        assert_eq!(values(&chunk), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(chunk.newest().unwrap().values[0], 4.0);
    }

    #[test]
    fn single_frame_chunk_keeps_only_the_latest() {
        let mut chunk = FeatureChunk::new(1, 2).unwrap();
        chunk.push(f(1.0)).unwrap();
        chunk.push(f(2.0)).unwrap();
        assert_eq!(values(&chunk), vec![2.0]);
        let (past, current) = chunk.past_and_current().unwrap();
        assert!(past.is_empty());
        assert_eq!(current.values[0], 2.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut chunk = FeatureChunk::new(2, 2).unwrap();
        assert!(chunk.push(vec![1.0]).is_err());
    }
}
