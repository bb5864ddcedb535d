//! The contract a fitted model must satisfy to be masked by the selectors.

use ndarray::ArrayView2;

use crate::dataset::Task;
use crate::error::Result;
use crate::loss::{evaluate_loss, LossKind, Predictions};

/// A fitted model that can only be queried.
///
/// `predict` must be a pure function of its input. For classification, every
/// probability row lies in `[0, 1]` and sums to 1.
pub trait Predictor: Send + Sync {
    fn task(&self) -> Task;

    /// Number of columns the model was fitted on.
    fn input_width(&self) -> usize;

    /// Fails with a dimension error when `features.ncols() != input_width()`.
    fn predict(&self, features: ArrayView2<'_, f64>) -> Result<Predictions>;

    fn loss_on(
        &self,
        features: ArrayView2<'_, f64>,
        targets: ndarray::ArrayView1<'_, f64>,
        loss: LossKind,
    ) -> Result<f64> {
        evaluate_loss(&self.predict(features)?, targets, loss)
    }
}
