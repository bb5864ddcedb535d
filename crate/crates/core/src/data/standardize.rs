use ndarray::{Array1, ArrayView2, Axis};

use crate::dataset::{Dataset, Task};

use super::split::SplitBundle;

/// Per-column mean and standard deviation estimated on the training split.
///
/// A standard deviation of 0 flags a constant column, which transforms to all zeros.
/// Regression targets are standardized as well; classification labels are left alone.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub feature_mean: Array1<f64>,
    pub feature_std: Array1<f64>,
    /// `(mean, std)` of the regression target, if any.
    pub target: Option<(f64, f64)>,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std <= 1e-12 * mean.abs().max(1.0) {
        (mean, 0.0)
    } else {
        (mean, std)
    }
}

impl Standardizer {
    pub fn fit(train: &Dataset) -> Self {
        let x = train.features();
        let (means, stds): (Vec<f64>, Vec<f64>) = x.axis_iter(Axis(1)).map(|c| mean_std(c.iter().copied())).unzip();
        let target = match train.task() {
            Task::Regression => {
                let (m, s) = mean_std(train.targets().iter().copied());
                Some((m, if s == 0.0 { 1.0 } else { s }))
            }
            Task::Classification { .. } => None,
        };
        Self {
            feature_mean: Array1::from(means),
            feature_std: Array1::from(stds),
            target,
        }
    }

    pub fn transform_features(&self, x: ArrayView2<'_, f64>) -> ndarray::Array2<f64> {
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.feature_mean[j], self.feature_std[j]);
            if s == 0.0 {
                col.fill(0.0);
            } else {
                col.mapv_inplace(|v| (v - m) / s);
            }
        }
        out
    }

    /// Undo [`Self::transform_features`]. Constant columns come back as their training mean.
    pub fn inverse_transform_features(&self, x: ArrayView2<'_, f64>) -> ndarray::Array2<f64> {
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.feature_mean[j], self.feature_std[j]);
            col.mapv_inplace(|v| v * s + m);
        }
        out
    }

    pub fn transform(&self, data: &Dataset) -> Dataset {
        let x = self.transform_features(data.features());
        let y = match self.target {
            Some((m, s)) => data.targets().mapv(|v| (v - m) / s),
            None => data.targets().to_owned(),
        };
        Dataset::with_names(x, y, data.task(), data.feature_names().map(<[String]>::to_vec))
            .expect("standardization preserves dataset invariants")
    }
}

/// Fits on the training split and applies the same transform to all four splits.
pub fn standardize(bundle: &SplitBundle) -> (SplitBundle, Standardizer) {
    let st = Standardizer::fit(&bundle.train);
    (bundle.map(|d| st.transform(d)), st)
}
