//! Minimal dense-tensor math with reverse-mode gradients.
//!
//! Everything is 64-bit; there is no fusion, no broadcasting beyond row-bias
//! addition, and the tape is an explicit node list that can be read top to
//! bottom. The point is auditability and tight gradient checks, not speed.

mod gradcheck;
mod layers;
mod optim;
mod params;
mod tape;
mod tensor;

pub use gradcheck::{finite_diff_check, GradCheckReport};
pub use layers::{
    attention_forward, cross_attention_block, init_attention_block, init_linear, init_mlp,
    linear_forward, mlp_forward, self_attention_block,
};
pub use optim::{adamw_step, AdamConfig};
pub use params::ParamStore;
pub use tape::{gelu, gelu_derivative, NodeId, Tape};
pub use tensor::Tensor2;
