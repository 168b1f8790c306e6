//! Minimal differentiable computation: matrices, a reverse-mode tape,
//! dense layers, losses, gradient checking and AdamW.

mod checkpoint;
mod gradcheck;
mod matrix;
pub mod nn;
mod optim;
mod params;
mod tape;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use gradcheck::{finite_diff_check, relative_error, GradCheckConfig, GradCheckReport, REL_ERR_FLOOR};
pub use matrix::Matrix;
pub use nn::{huber, mlp_forward, softmax_cross_entropy};
pub use optim::{adamw_step, AdamWConfig, AdamWState};
pub use params::{Grads, ParamId, ParamStore};
pub use tape::{huber_elem, Tape, Var};
