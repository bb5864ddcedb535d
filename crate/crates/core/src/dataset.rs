//! Feature matrix plus targets, the unit every other module consumes.
//!
//! Classification labels are stored as integer-valued `f64` in `0..n_classes`.
//! The class count is carried by [`Task`] rather than inferred from the data so
//! that a split or fold missing a class still produces full-width probability rows.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Task {
    Regression,
    Classification { n_classes: usize },
}

impl Task {
    pub fn is_classification(&self) -> bool {
        matches!(self, Task::Classification { .. })
    }

    pub fn n_classes(&self) -> Option<usize> {
        match self {
            Task::Regression => None,
            Task::Classification { n_classes } => Some(*n_classes),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    targets: Array1<f64>,
    task: Task,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, targets: Array1<f64>, task: Task) -> Result<Self> {
        Self::with_names(features, targets, task, None)
    }

    pub fn with_names(
        features: Array2<f64>,
        targets: Array1<f64>,
        task: Task,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if features.nrows() != targets.len() {
            return Err(Error::Dimension(format!(
                "{} feature rows but {} targets",
                features.nrows(),
                targets.len()
            )));
        }
        if features.ncols() == 0 {
            return Err(Error::Data("dataset has no feature columns".into()));
        }
        if let Some(names) = &feature_names {
            if names.len() != features.ncols() {
                return Err(Error::Dimension(format!(
                    "{} feature names for {} columns",
                    names.len(),
                    features.ncols()
                )));
            }
        }
        if let Some((i, j)) = features.indexed_iter().find(|(_, v)| !v.is_finite()).map(|(ij, _)| ij) {
            return Err(Error::Data(format!("non-finite feature at row {i}, column {j}")));
        }
        if let Some(i) = targets.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite target at row {i}")));
        }
        if let Task::Classification { n_classes } = task {
            if n_classes < 2 {
                return Err(Error::Data(format!(
                    "classification needs at least 2 classes, got {n_classes}"
                )));
            }
            if let Some(&label) = targets
                .iter()
                .find(|&&y| y < 0.0 || y.fract() != 0.0 || y >= n_classes as f64)
            {
                return Err(Error::LabelRange { label, n_classes });
            }
        }
        Ok(Self {
            features,
            targets,
            task,
            feature_names,
        })
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn targets(&self) -> ArrayView1<'_, f64> {
        self.targets.view()
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), indices),
            targets: self.targets.select(Axis(0), indices),
            task: self.task,
            feature_names: self.feature_names.clone(),
        }
    }

    /// Row-wise concatenation of `self` followed by `other`.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.n_features() != other.n_features() || self.task != other.task {
            return Err(Error::Dimension(
                "cannot concatenate datasets with different layouts".into(),
            ));
        }
        let features = ndarray::concatenate(Axis(0), &[self.features.view(), other.features.view()])
            .map_err(|e| Error::Dimension(e.to_string()))?;
        let targets = ndarray::concatenate(Axis(0), &[self.targets.view(), other.targets.view()])
            .map_err(|e| Error::Dimension(e.to_string()))?;
        Ok(Dataset {
            features,
            targets,
            task: self.task,
            feature_names: self.feature_names.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_row_mismatch() {
        let err = Dataset::new(array![[1.0], [2.0]], array![1.0], Task::Regression).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn rejects_bad_labels_and_nan() {
        let task = Task::Classification { n_classes: 2 };
        assert!(matches!(
            Dataset::new(array![[1.0], [2.0]], array![0.0, 2.0], task),
            Err(Error::LabelRange { .. })
        ));
        assert!(matches!(
            Dataset::new(array![[f64::NAN], [2.0]], array![0.0, 1.0], task),
            Err(Error::Data(_))
        ));
        assert!(Dataset::new(
            array![[1.0], [2.0]],
            array![0.0, 0.0],
            Task::Classification { n_classes: 1 }
        )
        .is_err());
    }

    #[test]
    fn subset_and_concat() {
        let d = Dataset::new(
            array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]],
            array![1.0, 2.0, 3.0],
            Task::Regression,
        )
        .unwrap();
        let a = d.subset(&[2, 0]);
        assert_eq!(a.features(), array![[5.0, 6.0], [1.0, 2.0]]);
        let b = a.concat(&d.subset(&[1])).unwrap();
        assert_eq!(b.targets(), array![3.0, 1.0, 2.0]);
    }
}
