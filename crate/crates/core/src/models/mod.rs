//! Reference models behind the [`Predictor`] contract, plus grid-search tuning.
//!
//! Ridge and k-NN are cheap test oracles; the MLP and boosted trees expose the
//! hyperparameters of the usual neural-network and LightGBM search spaces.

mod cv;
mod gbt;
mod knn;
mod mlp;
mod ridge;
mod spec;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use ndarray::{ArrayView1, ArrayView2};

pub use cv::{cross_validate, fold_assignments, CV_FOLDS};
pub use gbt::{GbtModel, Tree};
pub use knn::KnnModel;
pub use mlp::{Layer, MlpModel};
pub use ridge::RidgeModel;
pub use spec::{
    Activation, GbtParams, HyperparameterGrid, KnnParams, MlpParams, ModelKind, ModelSpec, ParamValue, RidgeParams,
};

use crate::dataset::Task;
use crate::error::{Error, Result};
use crate::loss::Predictions;
use crate::predictor::Predictor;
use spec::ResolvedParams;

#[derive(Debug, Clone, PartialEq)]
enum Fitted {
    Ridge(RidgeModel),
    Knn(KnnModel),
    Mlp(MlpModel),
    Gbt(GbtModel),
}

/// A fitted reference model. Immutable; prediction takes `&self`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    spec: ModelSpec,
    task: Task,
    width: usize,
    inner: Fitted,
}

/// Per-feature importance of a fitted model, aligned with its input columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceVector(Vec<f64>);

impl ImportanceVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Fits `spec` on `(features, targets)`. Deterministic in `(spec, data)`.
pub fn fit(
    spec: &ModelSpec,
    features: ArrayView2<'_, f64>,
    targets: ArrayView1<'_, f64>,
    task: Task,
) -> Result<TrainedModel> {
    let params = spec.resolve()?;
    if features.nrows() != targets.len() {
        return Err(Error::Dimension(format!(
            "{} rows but {} targets",
            features.nrows(),
            targets.len()
        )));
    }
    if features.nrows() < 2 {
        return Err(Error::Fit("need at least 2 samples".into()));
    }
    if features.ncols() == 0 {
        return Err(Error::Fit("no feature columns".into()));
    }
    if let Task::Classification { n_classes } = task {
        if let Some(&label) = targets
            .iter()
            .find(|&&y| y < 0.0 || y.fract() != 0.0 || y >= n_classes as f64)
        {
            return Err(Error::LabelRange { label, n_classes });
        }
        let first = targets[0];
        if targets.iter().all(|&y| y == first) {
            return Err(Error::Fit("classification targets contain a single class".into()));
        }
    }
    let inner = match params {
        ResolvedParams::Ridge(p) => {
            if task.is_classification() {
                return Err(Error::Spec("ridge supports regression only".into()));
            }
            Fitted::Ridge(RidgeModel::fit(&p, features, targets)?)
        }
        ResolvedParams::Knn(p) => Fitted::Knn(KnnModel::new(p.k, features, targets)),
        ResolvedParams::Mlp(p) => Fitted::Mlp(MlpModel::fit(&p, features, targets, task, spec.seed)),
        ResolvedParams::Gbt(p) => Fitted::Gbt(GbtModel::fit(&p, features, targets, task, spec.seed)),
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        task,
        width: features.ncols(),
        inner,
    })
}

/// Intrinsic importances, or `None` for kinds that have none (k-NN, MLP).
///
/// Boosted trees report total split gain per feature. Ridge reports `|coefficient|`,
/// which is only comparable across features when the inputs were standardized.
pub fn feature_importances(model: &TrainedModel) -> Option<ImportanceVector> {
    match &model.inner {
        Fitted::Gbt(g) => Some(ImportanceVector(g.gains().to_vec())),
        Fitted::Ridge(r) => Some(ImportanceVector(r.coefficients().iter().map(|c| c.abs()).collect())),
        Fitted::Knn(_) | Fitted::Mlp(_) => None,
    }
}

impl TrainedModel {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    pub fn as_ridge(&self) -> Option<&RidgeModel> {
        match &self.inner {
            Fitted::Ridge(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_mlp(&self) -> Option<&MlpModel> {
        match &self.inner {
            Fitted::Mlp(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_gbt(&self) -> Option<&GbtModel> {
        match &self.inner {
            Fitted::Gbt(g) => Some(g),
            _ => None,
        }
    }

    /// Hash of the complete fitted state; equal fingerprints mean bit-identical parameters.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        format!("{:?}", self.inner).hash(&mut h);
        self.width.hash(&mut h);
        h.finish()
    }
}

impl Predictor for TrainedModel {
    fn task(&self) -> Task {
        self.task
    }

    fn input_width(&self) -> usize {
        self.width
    }

    fn predict(&self, features: ArrayView2<'_, f64>) -> Result<Predictions> {
        if features.ncols() != self.width {
            return Err(Error::Dimension(format!(
                "model expects {} columns, got {}",
                self.width,
                features.ncols()
            )));
        }
        Ok(match (&self.inner, self.task) {
            (Fitted::Ridge(r), _) => Predictions::Values(r.predict(features)),
            (Fitted::Knn(k), Task::Regression) => Predictions::Values(k.predict_values(features)),
            (Fitted::Knn(k), task) => Predictions::Probabilities(k.predict_proba(features, task)),
            (Fitted::Mlp(m), Task::Regression) => Predictions::Values(m.output(features).column(0).to_owned()),
            (Fitted::Mlp(m), _) => Predictions::Probabilities(m.output(features)),
            (Fitted::Gbt(g), Task::Regression) => Predictions::Values(g.predict_values(features)),
            (Fitted::Gbt(g), _) => Predictions::Probabilities(g.predict_proba(features)),
        })
    }
}
