//! Model-agnostic feature selection by binary feature-mask optimization.
//!
//! A model is fitted once on all features. Selection then only queries it:
//! columns of a validation matrix are zeroed by a binary mask and the feature
//! whose removal hurts the validation loss least is dropped, one per iteration.
//! [`selectors::gbmo`] stops when the best achievable loss exceeds the previous
//! one by a slack factor; [`selectors::flbmo`] stops at a fixed feature count.
//!
//! The remaining modules supply what an end-to-end experiment needs: reference
//! models ([`models`]), filter and wrapper baselines ([`baselines`]), data
//! generation, loading and splitting ([`data`]), and the experiment runner
//! ([`harness`]).

pub mod baselines;
pub mod data;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod loss;
pub mod mask;
pub mod models;
pub mod predictor;
pub mod selectors;

pub use dataset::{Dataset, Task};
pub use error::{Error, Result};
pub use loss::{evaluate_loss, LossKind, Predictions};
pub use mask::{apply_mask, mask_support, select_columns, Mask};
pub use predictor::Predictor;
