use ndarray::{ArrayView1, ArrayView2};
use rayon::prelude::*;

use crate::dataset::Task;
use crate::error::{Error, Result};

/// Equal-width bin count for continuous variables in the MI estimator.
pub const MI_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMethod {
    Correlation,
    MutualInformation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub method: FilterMethod,
    pub scores: Vec<f64>,
}

impl ScoreVector {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// `|r|` between each feature and the target. Constant features score 0.
pub fn pearson_scores(features: ArrayView2<'_, f64>, targets: ArrayView1<'_, f64>) -> Result<ScoreVector> {
    let n = targets.len();
    if n < 2 || features.nrows() != n {
        return Err(Error::Dimension(format!(
            "need at least 2 aligned samples, got {} rows and {n} targets",
            features.nrows()
        )));
    }
    let y_mean = targets.sum() / n as f64;
    let yc: Vec<f64> = targets.iter().map(|v| v - y_mean).collect();
    let syy: f64 = yc.iter().map(|v| v * v).sum();
    if syy <= 0.0 {
        return Err(Error::Scoring("target has zero variance".into()));
    }
    let scores = (0..features.ncols())
        .into_par_iter()
        .map(|j| {
            let col = features.column(j);
            let mean = col.sum() / n as f64;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (x, y) in col.iter().zip(&yc) {
                let d = x - mean;
                sxy += d * y;
                sxx += d * d;
            }
            if sxx <= 1e-24 * (1.0 + mean * mean) * n as f64 {
                0.0
            } else {
                (sxy / (sxx.sqrt() * syy.sqrt())).abs().min(1.0)
            }
        })
        .collect();
    Ok(ScoreVector {
        method: FilterMethod::Correlation,
        scores,
    })
}

/// Equal-width binning over the observed range; a constant input maps to a single bin.
pub fn discretize(values: ArrayView1<'_, f64>, bins: usize) -> Vec<usize> {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let width = hi - lo;
    values
        .iter()
        .map(|&v| {
            if width <= 0.0 {
                0
            } else {
                (((v - lo) / width * bins as f64) as usize).min(bins - 1)
            }
        })
        .collect()
}

/// Plug-in mutual information (nats) between two discrete codings of equal length.
///
/// Cell terms are summed in sorted order, so swapping the arguments gives a bit-identical result.
pub fn mutual_information(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let na = a.iter().max().map_or(0, |m| m + 1);
    let nb = b.iter().max().map_or(0, |m| m + 1);
    let mut joint = vec![0usize; na * nb];
    let mut ca = vec![0usize; na];
    let mut cb = vec![0usize; nb];
    for (&i, &j) in a.iter().zip(b) {
        joint[i * nb + j] += 1;
        ca[i] += 1;
        cb[j] += 1;
    }
    let mut terms: Vec<f64> = Vec::new();
    for i in 0..na {
        for j in 0..nb {
            let c = joint[i * nb + j];
            if c == 0 {
                continue;
            }
            let pab = c as f64 / n;
            let prod = (ca[i] as f64 / n) * (cb[j] as f64 / n);
            terms.push(pab * (pab / prod).ln());
        }
    }
    terms.sort_by(f64::total_cmp);
    terms.iter().sum::<f64>().max(0.0)
}

pub fn mutual_information_scores(
    features: ArrayView2<'_, f64>,
    targets: ArrayView1<'_, f64>,
    task: Task,
) -> Result<ScoreVector> {
    mutual_information_scores_with_bins(features, targets, task, MI_BINS)
}

/// Histogram MI between each feature and the target. Classification labels are used as-is.
pub fn mutual_information_scores_with_bins(
    features: ArrayView2<'_, f64>,
    targets: ArrayView1<'_, f64>,
    task: Task,
    bins: usize,
) -> Result<ScoreVector> {
    let n = targets.len();
    if n < 2 || features.nrows() != n {
        return Err(Error::Dimension(format!(
            "need at least 2 aligned samples, got {} rows and {n} targets",
            features.nrows()
        )));
    }
    if bins < 2 {
        return Err(Error::Config("MI needs at least 2 bins".into()));
    }
    let y_codes: Vec<usize> = match task {
        Task::Regression => discretize(targets, bins),
        Task::Classification { .. } => targets.iter().map(|&v| v as usize).collect(),
    };
    let scores = (0..features.ncols())
        .into_par_iter()
        .map(|j| mutual_information(&discretize(features.column(j), bins), &y_codes))
        .collect();
    Ok(ScoreVector {
        method: FilterMethod::MutualInformation,
        scores,
    })
}

/// Indices of the `k` highest scores, ties to the lower index, returned ascending.
pub fn select_top_k(scores: &ScoreVector, k: usize) -> Result<Vec<usize>> {
    let m = scores.len();
    if k < 1 || k > m {
        return Err(Error::Config(format!("k={k} outside [1, {m}]")));
    }
    let key = |v: f64| if v.is_nan() { f64::NEG_INFINITY } else { v };
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| key(scores.scores[b]).total_cmp(&key(scores.scores[a])).then(a.cmp(&b)));
    let mut top = order[..k].to_vec();
    top.sort_unstable();
    Ok(top)
}
