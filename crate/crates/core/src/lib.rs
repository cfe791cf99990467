//! Regularized gradient tree boosting for losses that need not be convex,
//! and for losses with several parameters fitted jointly (one tree ensemble
//! per parameter).
//!
//! The per-leaf objective keeps only the non-negative part of each sample's
//! second derivative, weighted by `a ∈ [0, ½]`:
//!
//! ```text
//! ω* = −Σg / (2a·Σmax(0, h) + λ)
//! ```
//!
//! With `a = ½` and positive curvature this is the classic second-order
//! update; with `a = 0` it is a pure first-order step. Gradients are clipped
//! to `[−M, M]` and every parameter path is clamped into its closed domain.
//!
//! See `examples/` for one runnable program per capability.

pub mod booster;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod loss;
pub mod model_io;
pub mod special;
pub mod tree;

pub use booster::{predict, train, BoostedModel, ParamTrainConfig, TrainConfig, TrainOutcome};
pub use dataset::{Dataset, Observation};
pub use error::{Error, Result};
pub use eval::{compare, nll_score, EvalReport};
pub use loss::{Loss, ParameterDomain};
pub use tree::{GradPair, RegressionTree, TreeParams};
