//! Normalized losses: mean squared error for regression and log loss for classification.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::dataset::Task;
use crate::error::{Error, Result};

/// Default clipping for log loss; probabilities are clamped to `[eps, 1 - eps]`.
pub const LOG_LOSS_EPSILON: f64 = 1e-15;

/// Model output for a batch of rows.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictions {
    /// One real value per row (regression).
    Values(Array1<f64>),
    /// One probability row per input row (classification), columns are classes.
    Probabilities(Array2<f64>),
}

impl Predictions {
    pub fn len(&self) -> usize {
        match self {
            Predictions::Values(v) => v.len(),
            Predictions::Probabilities(p) => p.nrows(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum LossKind {
    MeanSquaredError,
    LogLoss { epsilon: f64 },
}

impl LossKind {
    pub fn log_loss() -> Self {
        LossKind::LogLoss {
            epsilon: LOG_LOSS_EPSILON,
        }
    }

    /// The loss used for `task`: MSE for regression, log loss for classification.
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Regression => LossKind::MeanSquaredError,
            Task::Classification { .. } => Self::log_loss(),
        }
    }

    pub fn check_task(&self, task: Task) -> Result<()> {
        match (self, task) {
            (LossKind::MeanSquaredError, Task::Regression)
            | (LossKind::LogLoss { .. }, Task::Classification { .. }) => Ok(()),
            _ => Err(Error::Config(format!("loss {self:?} cannot score a {task:?} task"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossKind::MeanSquaredError => "mse",
            LossKind::LogLoss { .. } => "log_loss",
        }
    }
}

/// `(1/N) Σ l(ŷ_i, y_i)` over the batch.
pub fn evaluate_loss(predictions: &Predictions, targets: ArrayView1<'_, f64>, loss: LossKind) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if targets.is_empty() {
        return Err(Error::Dimension("cannot evaluate loss on zero samples".into()));
    }
    let n = targets.len() as f64;
    match (loss, predictions) {
        (LossKind::MeanSquaredError, Predictions::Values(values)) => Ok(values
            .iter()
            .zip(targets.iter())
            .map(|(p, y)| (p - y) * (p - y))
            .sum::<f64>()
            / n),
        (LossKind::LogLoss { epsilon }, Predictions::Probabilities(probs)) => {
            let n_classes = probs.ncols();
            let mut total = 0.0;
            for (row, &y) in probs.rows().into_iter().zip(targets.iter()) {
                if y < 0.0 || y.fract() != 0.0 || y as usize >= n_classes {
                    return Err(Error::LabelRange { label: y, n_classes });
                }
                let p = row[y as usize].clamp(epsilon, 1.0 - epsilon);
                total -= p.ln();
            }
            Ok(total / n)
        }
        (loss, _) => Err(Error::Config(format!(
            "loss {} does not match the prediction kind",
            loss.name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn mse_examples() {
        let y = array![1.0, 2.0];
        let mse = LossKind::MeanSquaredError;
        assert_eq!(
            evaluate_loss(&Predictions::Values(array![1.0, 2.0]), y.view(), mse).unwrap(),
            0.0
        );
        let y = array![1.0, 1.0];
        assert_eq!(
            evaluate_loss(&Predictions::Values(array![0.0, 1.0]), y.view(), mse).unwrap(),
            0.5
        );
    }

    #[test]
    fn log_loss_clips_certain_prediction() {
        let p = Predictions::Probabilities(array![[1.0, 0.0]]);
        let got = evaluate_loss(&p, array![0.0].view(), LossKind::log_loss()).unwrap();
        // -ln(1 - 1e-15) = 1e-15 + O(1e-30); f64 rounding of 1 - 1e-15 gives ~1.11e-15 granularity.
        assert_relative_eq!(got, -(1.0f64 - 1e-15).ln(), max_relative = 1e-12);
        assert!(got > 9.0e-16 && got < 1.2e-15);

        let wrong = evaluate_loss(&p, array![1.0].view(), LossKind::log_loss()).unwrap();
        assert_relative_eq!(wrong, -(1e-15f64).ln(), max_relative = 1e-12);
    }

    #[test]
    fn errors() {
        let p = Predictions::Values(array![1.0]);
        assert!(matches!(
            evaluate_loss(&p, array![1.0, 2.0].view(), LossKind::MeanSquaredError),
            Err(Error::Dimension(_))
        ));
        let probs = Predictions::Probabilities(array![[0.5, 0.5]]);
        assert!(matches!(
            evaluate_loss(&probs, array![2.0].view(), LossKind::log_loss()),
            Err(Error::LabelRange { .. })
        ));
        assert!(evaluate_loss(&p, array![1.0].view(), LossKind::log_loss()).is_err());
    }

    #[test]
    fn task_pairing() {
        assert!(LossKind::MeanSquaredError.check_task(Task::Regression).is_ok());
        assert!(LossKind::MeanSquaredError
            .check_task(Task::Classification { n_classes: 2 })
            .is_err());
        assert!(LossKind::log_loss().check_task(Task::Regression).is_err());
    }

    proptest::proptest! {
        #[test]
        fn mse_nonnegative_and_zero_iff_equal(
            pairs in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..20)
        ) {
            let p: Array1<f64> = pairs.iter().map(|x| x.0).collect();
            let y: Array1<f64> = pairs.iter().map(|x| x.1).collect();
            let l = evaluate_loss(&Predictions::Values(p.clone()), y.view(), LossKind::MeanSquaredError).unwrap();
            proptest::prop_assert!(l >= 0.0);
            proptest::prop_assert_eq!(l == 0.0, p == y);
        }
    }
}
