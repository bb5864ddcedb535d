use ndarray::{Array1, Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_informative: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_samples: 300,
            n_features: 100,
            n_informative: 10,
        }
    }
}

/// `y_i = Σ_{j < n_informative} (x_ij² + sin x_ij)`.
pub fn synthetic_target(features: ArrayView2<'_, f64>, n_informative: usize) -> Array1<f64> {
    features
        .rows()
        .into_iter()
        .map(|row| row.iter().take(n_informative).map(|&v| v * v + v.sin()).sum())
        .collect()
}

/// i.i.d. standard normal features; only the first `n_informative` columns enter the target.
pub fn generate_synthetic(n_samples: usize, n_features: usize, n_informative: usize, seed: u64) -> Result<Dataset> {
    if n_samples == 0 || n_features == 0 {
        return Err(Error::Config(
            "synthetic data needs at least one sample and one feature".into(),
        ));
    }
    if n_informative > n_features {
        return Err(Error::Config(format!(
            "{n_informative} informative features exceed {n_features} total"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = Array2::from_shape_simple_fn((n_samples, n_features), || StandardNormal.sample(&mut rng));
    let targets = synthetic_target(features.view(), n_informative);
    let names = (0..n_features)
        .map(|j| {
            if j < n_informative {
                format!("informative_{j}")
            } else {
                format!("redundant_{j}")
            }
        })
        .collect();
    Dataset::with_names(features, targets, Task::Regression, Some(names))
}
