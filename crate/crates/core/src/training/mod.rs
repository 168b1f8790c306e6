//! Labels, the structured loss, the training loop and the gradient-equivalence check.

mod equivalence;
mod labels;
mod loss;
mod train;

pub use equivalence::{gradient_equivalence, gradient_equivalence_check, model_gradient_check, EquivalenceReport};
pub use labels::{assign_labels, displacement_errors, LabelAssignment};
pub use loss::{ce_terms, structured_losses, LossBreakdown, LossVars, StopGradient};
pub use train::{mean_loss, train, LossRecord, TrainConfig, TrainOutcome};
