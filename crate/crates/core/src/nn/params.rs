//! Named parameter storage: values, gradient accumulators, optimizer moments,
//! and the checkpoint file format.
//!
//! # Checkpoint layout
//!
//! A checkpoint is a single file:
//!
//! ```text
//! bytes 0..8    magic "FBCKPT01"
//! bytes 8..12   u32 little-endian: length of the JSON index in bytes
//! ...           JSON index
//! ...           f64 little-endian blob
//! ```
//!
//! The JSON index is `{"step": u64, "params": [{"name", "rows", "cols"}, ...]}`
//! with entries in ascending name order; the blob is each tensor's row-major
//! values concatenated in that same order. Optimizer moments are not
//! persisted — loading a checkpoint starts the optimizer fresh.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor2;
use crate::rng::SplitMix64;

const CHECKPOINT_MAGIC: &[u8; 8] = b"FBCKPT01";

#[derive(Debug, Clone)]
struct ParamEntry {
    value: Tensor2,
    grad: Tensor2,
    moment1: Tensor2,
    moment2: Tensor2,
}

impl ParamEntry {
    fn new(value: Tensor2) -> Self {
        let (r, c) = value.shape();
        ParamEntry {
            value,
            grad: Tensor2::zeros(r, c),
            moment1: Tensor2::zeros(r, c),
            moment2: Tensor2::zeros(r, c),
        }
    }
}

/// Named parameter tensors with per-parameter gradient accumulators and
/// Adam moments. Iteration order is always ascending by name.
#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    entries: BTreeMap<String, ParamEntry>,
    step: u64,
}

impl ParamStore {
    pub fn new() -> Self {
        ParamStore::default()
    }

    pub fn define(&mut self, name: impl Into<String>, value: Tensor2) -> Result<()> {
        let name = name.into();
        if self.entries.contains_key(&name) {
            return Err(Error::State(format!("parameter {name} already defined")));
        }
        if !value.is_finite() {
            return Err(Error::Input(format!(
                "parameter {name} has non-finite entries"
            )));
        }
        self.entries.insert(name, ParamEntry::new(value));
        Ok(())
    }

    /// Weights drawn uniformly in +-1/sqrt(fan_in) from the given stream.
    pub fn define_uniform(
        &mut self,
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        fan_in: usize,
        rng: &mut SplitMix64,
    ) -> Result<()> {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        let data: Vec<f64> = (0..rows * cols)
            .map(|_| rng.uniform_in(-bound, bound))
            .collect();
        self.define(name, Tensor2::from_vec(rows, cols, data)?)
    }

    pub fn define_zeros(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> Result<()> {
        self.define(name, Tensor2::zeros(rows, cols))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn value(&self, name: &str) -> Result<&Tensor2> {
        self.entries
            .get(name)
            .map(|e| &e.value)
            .ok_or_else(|| Error::State(format!("unknown parameter {name}")))
    }

    pub(crate) fn value_mut(&mut self, name: &str) -> Result<&mut Tensor2> {
        self.entries
            .get_mut(name)
            .map(|e| &mut e.value)
            .ok_or_else(|| Error::State(format!("unknown parameter {name}")))
    }

    pub fn grad(&self, name: &str) -> Result<&Tensor2> {
        self.entries
            .get(name)
            .map(|e| &e.grad)
            .ok_or_else(|| Error::State(format!("unknown parameter {name}")))
    }

    pub fn accumulate_grad(&mut self, name: &str, delta: &Tensor2) -> Result<()> {
        let entry = self
            .entries
            .get_mut(name)
            .ok_or_else(|| Error::State(format!("unknown parameter {name}")))?;
        if delta.shape() != entry.value.shape() {
            return Err(Error::dimension(
                format!("gradient for {name}"),
                format!("{:?}", entry.value.shape()),
                format!("{:?}", delta.shape()),
            ));
        }
        entry.grad.add_assign(delta);
        Ok(())
    }

    pub fn zero_grads(&mut self) {
        for entry in self.entries.values_mut() {
            entry.grad.fill(0.0);
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn param_count(&self) -> usize {
        self.entries.len()
    }

    /// Total number of scalar coordinates across all parameters.
    pub fn scalar_count(&self) -> usize {
        self.entries.values().map(|e| e.value.len()).sum()
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Snapshot of all gradients, keyed by name.
    pub fn grads_snapshot(&self) -> BTreeMap<String, Tensor2> {
        self.entries
            .iter()
            .map(|(k, e)| (k.clone(), e.grad.clone()))
            .collect()
    }

    /// Map a flat scalar index onto (parameter name, offset within it),
    /// following ascending name order.
    pub fn locate_scalar(&self, mut index: usize) -> Result<(&str, usize)> {
        for (name, entry) in &self.entries {
            if index < entry.value.len() {
                return Ok((name.as_str(), index));
            }
            index -= entry.value.len();
        }
        Err(Error::Input(format!(
            "scalar index out of range (have {})",
            self.scalar_count()
        )))
    }

    pub(crate) fn nudge_scalar(&mut self, name: &str, offset: usize, delta: f64) -> Result<()> {
        let value = self.value_mut(name)?;
        value.data_mut()[offset] += delta;
        Ok(())
    }

    pub(crate) fn adam_state_mut(
        &mut self,
        name: &str,
    ) -> Result<(&mut Tensor2, &Tensor2, &mut Tensor2, &mut Tensor2)> {
        let entry = self
            .entries
            .get_mut(name)
            .ok_or_else(|| Error::State(format!("unknown parameter {name}")))?;
        Ok((
            &mut entry.value,
            &entry.grad,
            &mut entry.moment1,
            &mut entry.moment2,
        ))
    }

    pub(crate) fn clear_grads_and_advance(&mut self) {
        self.zero_grads();
        self.step += 1;
    }

    #[cfg(test)]
    pub(crate) fn inject_test_grad(&mut self, name: &str, v: f64) {
        self.entries.get_mut(name).unwrap().grad.data_mut()[0] = v;
    }

    // --- checkpoint i/o ----------------------------------------------------

    pub fn save(&self, path: &Path) -> Result<()> {
        let index = CheckpointIndex {
            step: self.step,
            params: self
                .entries
                .iter()
                .map(|(name, e)| CheckpointParam {
                    name: name.clone(),
                    rows: e.value.rows(),
                    cols: e.value.cols(),
                })
                .collect(),
        };
        let header = serde_json::to_vec(&index)?;
        let mut file = std::fs::File::create(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let write = |file: &mut std::fs::File, bytes: &[u8]| {
            file.write_all(bytes)
                .map_err(|e| Error::io(path.display().to_string(), e))
        };
        write(&mut file, CHECKPOINT_MAGIC)?;
        write(&mut file, &(header.len() as u32).to_le_bytes())?;
        write(&mut file, &header)?;
        for entry in self.entries.values() {
            for &v in entry.value.data() {
                write(&mut file, &v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ParamStore> {
        let mut file = std::fs::File::open(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        if bytes.len() < 12 || &bytes[0..8] != CHECKPOINT_MAGIC {
            return Err(Error::Input(format!(
                "{} is not a parameter checkpoint",
                path.display()
            )));
        }
        let header_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let header_end = 12 + header_len;
        if bytes.len() < header_end {
            return Err(Error::Input("truncated checkpoint header".into()));
        }
        let index: CheckpointIndex = serde_json::from_slice(&bytes[12..header_end])?;
        let mut store = ParamStore::new();
        store.step = index.step;
        let mut offset = header_end;
        for p in &index.params {
            let count = p.rows * p.cols;
            let end = offset + count * 8;
            if bytes.len() < end {
                return Err(Error::Input(format!(
                    "truncated checkpoint blob at parameter {}",
                    p.name
                )));
            }
            let data: Vec<f64> = bytes[offset..end]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            store.define(&p.name, Tensor2::from_vec(p.rows, p.cols, data)?)?;
            offset = end;
        }
        if offset != bytes.len() {
            return Err(Error::Input("trailing bytes after checkpoint blob".into()));
        }
        Ok(store)
    }
}

#[derive(Serialize, Deserialize)]
struct CheckpointIndex {
    step: u64,
    params: Vec<CheckpointParam>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointParam {
    name: String,
    rows: usize,
    cols: usize,
}
