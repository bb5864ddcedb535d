use ndarray::{ArrayView1, ArrayView2};

use crate::dataset::Task;
use crate::error::{Error, Result};
use crate::mask::select_columns;
use crate::models::{self, feature_importances, ModelSpec, TrainedModel};

#[derive(Debug, Clone, PartialEq)]
pub struct RfeConfig {
    /// Number of features to keep.
    pub eta: usize,
    /// Must be a kind with intrinsic importances.
    pub spec: ModelSpec,
}

#[derive(Debug, Clone)]
pub struct RfeOutcome {
    /// Kept feature indices, ascending.
    pub selected: Vec<usize>,
    /// Removed feature indices, in removal order.
    pub eliminated: Vec<usize>,
    /// Total number of model fits, including the initial one.
    pub fits: usize,
    /// The model fitted on `selected`.
    pub model: TrainedModel,
}

/// Recursive feature elimination: fit, drop the least important feature, refit, until `eta` remain.
/// Importance ties drop the lowest index.
pub fn rfe(
    features: ArrayView2<'_, f64>,
    targets: ArrayView1<'_, f64>,
    task: Task,
    config: &RfeConfig,
) -> Result<RfeOutcome> {
    let m = features.ncols();
    if config.eta < 1 || config.eta > m {
        return Err(Error::Config(format!("eta={} outside [1, {m}]", config.eta)));
    }
    if !config.spec.kind.supports_importances() {
        return Err(Error::Config(format!(
            "RFE needs intrinsic feature importances, which {} does not provide",
            config.spec.kind.name()
        )));
    }
    let mut remaining: Vec<usize> = (0..m).collect();
    let mut eliminated = Vec::with_capacity(m - config.eta);
    let mut fits = 0;
    loop {
        let x = select_columns(features, &remaining)?;
        let model = models::fit(&config.spec, x.view(), targets, task)?;
        fits += 1;
        if remaining.len() <= config.eta {
            return Ok(RfeOutcome {
                selected: remaining,
                eliminated,
                fits,
                model,
            });
        }
        let importances =
            feature_importances(&model).ok_or_else(|| Error::Config("fitted model reports no importances".into()))?;
        let weakest =
            importances
                .values()
                .iter()
                .enumerate()
                .fold(0, |best, (i, &v)| if v < importances.values()[best] { i } else { best });
        eliminated.push(remaining.remove(weakest));
    }
}
