//! Greedy backward elimination over a binary feature mask, driven by a fixed model.
//!
//! The model is never refitted here. At each step every still-active column of
//! the validation matrix is zeroed in turn, the model is queried, and the column
//! whose absence gives the lowest validation loss is eliminated ([`sluf`]).
//! [`gbmo`] stops as soon as that lowest loss exceeds the previous step's by more
//! than a factor `1 + mu`; [`flbmo`] stops when exactly `eta` features remain.
//! Zeroing a column of standardized data is equivalent to imputing its training mean.

use ndarray::{ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::mask::{apply_mask, select_columns, Mask};
use crate::models::{self, ModelSpec, TrainedModel};
use crate::predictor::Predictor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbmoConfig {
    /// Slack: an elimination is accepted while its loss is at most `previous · (1 + mu)`.
    pub mu: f64,
    /// Elimination never goes below this many features.
    pub min_features: usize,
}

impl GbmoConfig {
    pub fn new(mu: f64) -> Self {
        Self { mu, min_features: 1 }
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(Error::Config(format!(
                "mu must be a finite non-negative number, got {}",
                self.mu
            )));
        }
        if self.min_features < 1 || self.min_features > n_features {
            return Err(Error::Config(format!(
                "min_features={} outside [1, {n_features}]",
                self.min_features
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlbmoConfig {
    /// Number of features to keep.
    pub eta: usize,
}

impl FlbmoConfig {
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.eta < 1 || self.eta > n_features {
            return Err(Error::Config(format!("eta={} outside [1, {n_features}]", self.eta)));
        }
        Ok(())
    }
}

/// The least useful active feature and the validation loss once it is zeroed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlufResult {
    pub j_star: usize,
    pub loss_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The best elimination raised the loss beyond the slack threshold.
    SlackExceeded,
    /// The support reached the configured floor.
    FeatureFloor,
    /// The support reached the requested size.
    TargetReached,
}

/// One row of a selection trace. `eliminated` is `None` on the terminal stop record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub eliminated: Option<usize>,
    pub loss_min: f64,
    pub remaining: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionTrace {
    pub initial_features: usize,
    /// Elimination records in order, followed by exactly one stop record.
    pub records: Vec<TraceRecord>,
    pub stop: StopReason,
    pub terminal_mask: Mask,
}

impl SelectionTrace {
    pub fn eliminations(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(|r| r.eliminated.is_some())
    }

    pub fn eliminated_indices(&self) -> Vec<usize> {
        self.eliminations().filter_map(|r| r.eliminated).collect()
    }

    pub fn stop_record(&self) -> &TraceRecord {
        self.records.last().expect("trace always ends with a stop record")
    }

    /// Structural checks: one feature per elimination record, remaining count
    /// decreasing by one each time, and the terminal mask matching the eliminations.
    pub fn check_structure(&self) -> Result<()> {
        let mut remaining = self.initial_features;
        let mut expected = Mask::ones(self.initial_features);
        let (last, body) = self
            .records
            .split_last()
            .ok_or_else(|| Error::Selection("empty trace".into()))?;
        for r in body {
            let j = r
                .eliminated
                .ok_or_else(|| Error::Selection(format!("iteration {} has no elimination", r.iteration)))?;
            if j >= expected.len() || !expected.is_set(j) {
                return Err(Error::Selection(format!(
                    "feature {j} eliminated twice or out of range"
                )));
            }
            expected.clear(j);
            remaining -= 1;
            if r.remaining != remaining {
                return Err(Error::Selection(format!(
                    "iteration {}: remaining {} but expected {remaining}",
                    r.iteration, r.remaining
                )));
            }
        }
        if last.eliminated.is_some() || last.remaining != remaining {
            return Err(Error::Selection("malformed stop record".into()));
        }
        if expected != self.terminal_mask {
            return Err(Error::Selection("terminal mask does not match eliminations".into()));
        }
        Ok(())
    }
}

fn check_widths(model: &dyn Predictor, train: &Dataset, val: &Dataset, loss: LossKind) -> Result<()> {
    if train.n_features() != val.n_features() || model.input_width() != val.n_features() {
        return Err(Error::Dimension(format!(
            "model width {}, train width {}, validation width {}",
            model.input_width(),
            train.n_features(),
            val.n_features()
        )));
    }
    if val.n_samples() == 0 {
        return Err(Error::Dimension("validation split is empty".into()));
    }
    loss.check_task(val.task())
}

/// Validation loss for every active feature `j` when it is additionally zeroed, in support order.
pub fn candidate_losses(
    mask: &Mask,
    val_features: ArrayView2<'_, f64>,
    val_targets: ArrayView1<'_, f64>,
    model: &dyn Predictor,
    loss: LossKind,
) -> Result<Vec<(usize, f64)>> {
    if model.input_width() != val_features.ncols() {
        return Err(Error::Dimension(format!(
            "model expects {} columns, validation matrix has {}",
            model.input_width(),
            val_features.ncols()
        )));
    }
    let base = apply_mask(val_features, mask)?;
    mask.support()
        .into_par_iter()
        .map(|j| {
            let mut masked = base.clone();
            masked.column_mut(j).fill(0.0);
            let l = model.loss_on(masked.view(), val_targets, loss)?;
            if l.is_nan() {
                return Err(Error::Scoring(format!(
                    "validation loss is NaN with feature {j} masked"
                )));
            }
            Ok((j, l))
        })
        .collect()
}

/// Selects the least useful feature: the active index whose zeroing minimizes the
/// validation loss. Ties go to the lowest index.
pub fn sluf(
    mask: &Mask,
    val_features: ArrayView2<'_, f64>,
    val_targets: ArrayView1<'_, f64>,
    model: &dyn Predictor,
    loss: LossKind,
) -> Result<SlufResult> {
    if mask.count_ones() == 0 {
        return Err(Error::Selection("mask has no active features".into()));
    }
    let losses = candidate_losses(mask, val_features, val_targets, model, loss)?;
    let (j_star, loss_min) = losses
        .into_iter()
        .reduce(|best, cand| if cand.1 < best.1 { cand } else { best })
        .expect("support is non-empty");
    Ok(SlufResult { j_star, loss_min })
}

/// General binary mask optimization: eliminate until the slack test fails or the floor is hit.
pub fn gbmo(
    train: &Dataset,
    val: &Dataset,
    model: &dyn Predictor,
    loss: LossKind,
    config: &GbmoConfig,
) -> Result<(Mask, SelectionTrace)> {
    check_widths(model, train, val, loss)?;
    let n = val.n_features();
    config.validate(n)?;

    let mut mask = Mask::ones(n);
    let mut previous = f64::INFINITY;
    let mut records = Vec::new();
    let mut iteration = 1;
    let stop = loop {
        if mask.count_ones() <= config.min_features {
            let loss_min = if previous.is_finite() {
                previous
            } else {
                model.loss_on(val.features(), val.targets(), loss)?
            };
            records.push(TraceRecord {
                iteration,
                eliminated: None,
                loss_min,
                remaining: mask.count_ones(),
            });
            break StopReason::FeatureFloor;
        }
        let step = sluf(&mask, val.features(), val.targets(), model, loss)?;
        if step.loss_min > previous * (1.0 + config.mu) {
            records.push(TraceRecord {
                iteration,
                eliminated: None,
                loss_min: step.loss_min,
                remaining: mask.count_ones(),
            });
            break StopReason::SlackExceeded;
        }
        mask.clear(step.j_star);
        records.push(TraceRecord {
            iteration,
            eliminated: Some(step.j_star),
            loss_min: step.loss_min,
            remaining: mask.count_ones(),
        });
        previous = step.loss_min;
        iteration += 1;
    };
    let trace = SelectionTrace {
        initial_features: n,
        records,
        stop,
        terminal_mask: mask.clone(),
    };
    Ok((mask, trace))
}

/// Fixed-length binary mask optimization: eliminate until exactly `eta` features remain.
pub fn flbmo(
    train: &Dataset,
    val: &Dataset,
    model: &dyn Predictor,
    loss: LossKind,
    config: &FlbmoConfig,
) -> Result<(Mask, SelectionTrace)> {
    check_widths(model, train, val, loss)?;
    let n = val.n_features();
    config.validate(n)?;

    let mut mask = Mask::ones(n);
    let mut records = Vec::new();
    let mut last_loss = None;
    let mut iteration = 1;
    while mask.count_ones() > config.eta {
        let step = sluf(&mask, val.features(), val.targets(), model, loss)?;
        mask.clear(step.j_star);
        records.push(TraceRecord {
            iteration,
            eliminated: Some(step.j_star),
            loss_min: step.loss_min,
            remaining: mask.count_ones(),
        });
        last_loss = Some(step.loss_min);
        iteration += 1;
    }
    let loss_min = match last_loss {
        Some(l) => l,
        None => model.loss_on(val.features(), val.targets(), loss)?,
    };
    records.push(TraceRecord {
        iteration,
        eliminated: None,
        loss_min,
        remaining: mask.count_ones(),
    });
    let trace = SelectionTrace {
        initial_features: n,
        records,
        stop: StopReason::TargetReached,
        terminal_mask: mask.clone(),
    };
    Ok((mask, trace))
}

/// Keeps the masked-in columns of the training split and refits `spec` on them.
pub fn finalize_selection(train: &Dataset, mask: &Mask, spec: &ModelSpec) -> Result<(Vec<usize>, TrainedModel)> {
    if mask.len() != train.n_features() {
        return Err(Error::Dimension(format!(
            "mask of length {} for {} features",
            mask.len(),
            train.n_features()
        )));
    }
    let selected = mask.support();
    if selected.is_empty() {
        return Err(Error::Selection("mask selects no features".into()));
    }
    let x = select_columns(train.features(), &selected)?;
    let model = models::fit(spec, x.view(), train.targets(), train.task())?;
    Ok((selected, model))
}
