//! K-fold grid search.

use ndarray::{ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::Task;
use crate::error::{Error, Result};
use crate::loss::{evaluate_loss, LossKind};
use crate::predictor::Predictor;

use super::spec::{HyperparameterGrid, ModelSpec};

/// Default fold count for model tuning.
pub const CV_FOLDS: usize = 3;

/// Fold index per sample. The samples are shuffled by `seed`, grouped by class for
/// classification, then dealt round-robin so fold sizes differ by at most one.
pub fn fold_assignments(targets: ArrayView1<'_, f64>, task: Task, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    if task.is_classification() {
        order.sort_by(|&a, &b| targets[a].total_cmp(&targets[b]));
    }
    let mut assignment = vec![0; targets.len()];
    for (pos, &i) in order.iter().enumerate() {
        assignment[i] = pos % folds;
    }
    assignment
}

/// Returns the candidate with the lowest mean out-of-fold loss; ties go to the earlier candidate.
///
/// Candidates are evaluated in parallel; the reduction is by `(mean loss, grid index)` so the
/// winner matches a sequential scan.
pub fn cross_validate(
    grid: &HyperparameterGrid,
    features: ArrayView2<'_, f64>,
    targets: ArrayView1<'_, f64>,
    task: Task,
    loss: LossKind,
    folds: usize,
    seed: u64,
) -> Result<ModelSpec> {
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    if features.nrows() < folds {
        return Err(Error::Config(format!(
            "{} samples cannot be split into {folds} folds",
            features.nrows()
        )));
    }
    loss.check_task(task)?;
    let assignment = fold_assignments(targets, task, folds, seed);
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..folds)
        .map(|f| {
            let (held, kept): (Vec<usize>, Vec<usize>) = (0..assignment.len()).partition(|&i| assignment[i] == f);
            (kept, held)
        })
        .collect();

    let scores: Vec<Result<f64>> = grid
        .candidates()
        .par_iter()
        .map(|spec| {
            let mut total = 0.0;
            for (train, held) in &splits {
                let x_train = features.select(Axis(0), train);
                let y_train = targets.select(Axis(0), train);
                let model = super::fit(spec, x_train.view(), y_train.view(), task)?;
                let preds = model.predict(features.select(Axis(0), held).view())?;
                total += evaluate_loss(&preds, targets.select(Axis(0), held).view(), loss)?;
            }
            Ok(total / folds as f64)
        })
        .collect();

    let mut best: Option<(f64, usize)> = None;
    for (i, score) in scores.into_iter().enumerate() {
        let s = score?;
        let s = if s.is_nan() { f64::INFINITY } else { s };
        if best.is_none_or(|(b, _)| s < b) {
            best = Some((s, i));
        }
    }
    let (_, idx) = best.expect("grid is non-empty");
    Ok(grid.candidates()[idx].clone())
}
