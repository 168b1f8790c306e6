//! Joint multi-agent trajectory prediction: a backbone proposes K candidate
//! futures per agent, a learned pairwise MRF scores candidate combinations,
//! and belief propagation produces consistent joint predictions.

pub mod backbone;
pub mod bp;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod graph;
pub mod metrics;
pub mod model;
pub mod pairwise;
pub mod scalar;
pub mod scene;
pub mod tensor;
pub mod training;

pub use error::{Error, Result};
