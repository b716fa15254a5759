//! Desk-scale workbench for multi-frame visuomotor policies and
//! observational-robustness benchmarking.
//!
//! The crate is organized around five subsystems:
//!
//! * [`nn`] — dense f64 tensors, a tape-based reverse-mode autodiff engine,
//!   AdamW, and a finite-difference gradient checker.
//! * [`policy`] — a per-frame encoder producing learnable features, a FIFO
//!   feature-chunk cache, the feature modulator, a cross-frame diffusion
//!   decoder, and the training loop with multi-frame regularization.
//! * [`disturbance`] — eight deterministic observational-disturbance families
//!   with temporal schedulers and hash-seeded per-trial plans.
//! * [`simenv`] — a synthetic 64x64 pixel manipulation environment with
//!   scripted experts and an episode container format.
//! * [`bench`] — the benchmark runner: success rates, R-Score, the attention
//!   cost model, latency accounting, and report emission.
//!
//! Everything is deterministic: all randomness flows through the splitmix64
//! generator in [`rng`], and every file format is byte-stable across runs.

pub mod bench;
pub mod disturbance;
pub mod error;
pub mod image;
pub mod nn;
pub mod policy;
pub mod rng;
pub mod simenv;

pub use error::{Error, Result};
