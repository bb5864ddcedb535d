#![allow(dead_code)]

use featmask::models::{fit, ModelKind, ModelSpec, TrainedModel};
use featmask::{apply_mask, Dataset, LossKind, Mask, Predictor, Task};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn noise_matrix(n: usize, m: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, m), |_| rng.random_range(-1.0..1.0))
}

/// Exhaustive least-useful-feature search: zero each active column in turn and keep the
/// first strictly smaller loss.
pub fn brute_force_sluf(
    mask: &Mask,
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    model: &dyn Predictor,
    loss: LossKind,
) -> (usize, f64) {
    let mut best: Option<(usize, f64)> = None;
    for j in 0..mask.len() {
        if !mask.is_set(j) {
            continue;
        }
        let masked = apply_mask(x, &mask.without(j)).unwrap();
        let l = model.loss_on(masked.view(), y, loss).unwrap();
        if best.is_none_or(|(_, b)| l < b) {
            best = Some((j, l));
        }
    }
    best.unwrap()
}

pub struct Instance {
    pub model: TrainedModel,
    pub val: Dataset,
    pub mask: Mask,
    pub loss: LossKind,
}

/// A random selection problem with at most 8 features, a ridge or k-NN model, and a
/// non-empty random mask.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..=8);
    let n = rng.random_range(12..40);
    let k = rng.random_range(4..20);
    let weights: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
    let target = |x: &Array2<f64>, rng: &mut ChaCha8Rng| -> Array1<f64> {
        x.rows()
            .into_iter()
            .map(|r| r.iter().zip(&weights).map(|(a, w)| a * w).sum::<f64>() + 0.1 * rng.random_range(-1.0..1.0))
            .collect()
    };
    let x_train = noise_matrix(n, m, rng.random());
    let y_train = target(&x_train, &mut rng);
    let x_val = noise_matrix(k, m, rng.random());
    let y_val = target(&x_val, &mut rng);
    let classify = rng.random_bool(0.3);
    let (task, loss, y_train, y_val) = if classify {
        let to_label = |y: Array1<f64>| y.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
        let (a, b) = (to_label(y_train), to_label(y_val));
        let a = if a.iter().all(|&v| v == a[0]) {
            let mut a = a;
            a[0] = 1.0 - a[0];
            a
        } else {
            a
        };
        (Task::Classification { n_classes: 2 }, LossKind::log_loss(), a, b)
    } else {
        (Task::Regression, LossKind::MeanSquaredError, y_train, y_val)
    };
    let spec = if classify || rng.random_bool(0.5) {
        ModelSpec::new(ModelKind::KNearestNeighbors, 0).with("k", rng.random_range(1i64..6))
    } else {
        ModelSpec::new(ModelKind::Ridge, 0).with("alpha", rng.random_range(0.0..2.0))
    };
    let model = fit(&spec, x_train.view(), y_train.view(), task).unwrap();
    let mut mask = Mask::ones(m);
    for j in 0..m {
        if rng.random_bool(0.3) {
            mask.clear(j);
        }
    }
    if mask.count_ones() == 0 {
        mask = Mask::ones(m);
    }
    Instance {
        model,
        val: Dataset::new(x_val, y_val, task).unwrap(),
        mask,
        loss,
    }
}

/// `y = x0 + small noise` with a second, pure-noise column, split into train and validation.
pub fn ridge_toy(seed: u64) -> (Dataset, Dataset, TrainedModel) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let make = |n: usize, rng: &mut ChaCha8Rng| {
        let x = noise_matrix(n, 2, rng.random());
        let y: Array1<f64> = x
            .column(0)
            .iter()
            .map(|v| v + 0.01 * rng.random_range(-1.0..1.0))
            .collect();
        Dataset::new(x, y, Task::Regression).unwrap()
    };
    let train = make(60, &mut rng);
    let val = make(40, &mut rng);
    let model = fit(
        &ModelSpec::new(ModelKind::Ridge, 0).with("alpha", 0.0),
        train.features(),
        train.targets(),
        Task::Regression,
    )
    .unwrap();
    (train, val, model)
}
