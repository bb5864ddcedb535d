//! Four-way split: model training, feature-selection validation, selection-model validation, test.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// `(train, fs_validation, model_validation, test)`.
    pub fractions: [f64; 4],
    pub seed: u64,
}

impl SplitSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            fractions: [0.45, 0.30, 0.10, 0.15],
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fractions.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
            return Err(Error::Config(format!(
                "split fractions must be non-negative: {:?}",
                self.fractions
            )));
        }
        let sum: f64 = self.fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split fractions sum to {sum}, not 1")));
        }
        Ok(())
    }

    /// Split sizes for `n` samples by largest-remainder rounding; ties favour the earlier split.
    pub fn sizes(&self, n: usize) -> Result<[usize; 4]> {
        self.validate()?;
        let exact: Vec<f64> = self.fractions.iter().map(|f| f * n as f64).collect();
        let mut sizes = [0usize; 4];
        for (s, e) in sizes.iter_mut().zip(&exact) {
            *s = e.floor() as usize;
        }
        let assigned: usize = sizes.iter().sum();
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &s in order.iter().take(n.saturating_sub(assigned)) {
            sizes[s] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::Config(format!(
                "split {} would be empty for {n} samples (fractions {:?})",
                SplitBundle::NAMES[empty],
                self.fractions
            )));
        }
        Ok(sizes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitBundle {
    pub train: Dataset,
    pub fs_val: Dataset,
    pub model_val: Dataset,
    pub test: Dataset,
    /// Source row indices of each split, in split order.
    pub indices: [Vec<usize>; 4],
}

impl SplitBundle {
    pub const NAMES: [&'static str; 4] = ["train", "fs_validation", "model_validation", "test"];

    /// Training rows followed by feature-selection validation rows, for methods that
    /// have no separate selection split.
    pub fn merged_train(&self) -> Dataset {
        self.train.concat(&self.fs_val).expect("splits share a layout")
    }

    pub(crate) fn map(&self, mut f: impl FnMut(&Dataset) -> Dataset) -> SplitBundle {
        SplitBundle {
            train: f(&self.train),
            fs_val: f(&self.fs_val),
            model_val: f(&self.model_val),
            test: f(&self.test),
            indices: self.indices.clone(),
        }
    }
}

/// Shuffles by seed and partitions into four disjoint splits.
///
/// Regression rows are cut contiguously from the permutation. Classification rows
/// are grouped by class (each class in permutation order) and dealt so every split
/// receives each class close to its fraction, with split sizes still exact.
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<SplitBundle> {
    let n = dataset.n_samples();
    let sizes = spec.sizes(n)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));

    let mut parts: [Vec<usize>; 4] = Default::default();
    if dataset.task().is_classification() {
        let position: Vec<usize> = {
            let mut p = vec![0; n];
            for (pos, &i) in order.iter().enumerate() {
                p[i] = pos;
            }
            p
        };
        let y = dataset.targets();
        let mut grouped = order.clone();
        grouped.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
        let mut counts = [0usize; 4];
        for (i, &row) in grouped.iter().enumerate() {
            let s = (0..4)
                .filter(|&s| counts[s] < sizes[s])
                .max_by(|&a, &b| {
                    let da = (sizes[a] * (i + 1)) as i64 - (counts[a] * n) as i64;
                    let db = (sizes[b] * (i + 1)) as i64 - (counts[b] * n) as i64;
                    da.cmp(&db).then(b.cmp(&a))
                })
                .expect("sizes sum to n");
            counts[s] += 1;
            parts[s].push(row);
        }
        for p in &mut parts {
            p.sort_by_key(|&i| position[i]);
        }
    } else {
        let mut start = 0;
        for (p, &size) in parts.iter_mut().zip(&sizes) {
            p.extend_from_slice(&order[start..start + size]);
            start += size;
        }
    }

    Ok(SplitBundle {
        train: dataset.subset(&parts[0]),
        fs_val: dataset.subset(&parts[1]),
        model_val: dataset.subset(&parts[2]),
        test: dataset.subset(&parts[3]),
        indices: parts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Task;
    use ndarray::{Array1, Array2};

    fn regression(n: usize) -> Dataset {
        Dataset::new(
            Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64),
            Array1::from_shape_fn(n, |i| i as f64),
            Task::Regression,
        )
        .unwrap()
    }

    #[test]
    fn default_sizes_for_100() {
        let b = split(&regression(100), &SplitSpec::with_seed(1)).unwrap();
        let sizes: Vec<usize> = b.indices.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![45, 30, 10, 15]);
    }

    #[test]
    fn largest_remainder_sizes() {
        // 208 * (0.45, 0.30, 0.10, 0.15) = (93.6, 62.4, 20.8, 31.2)
        assert_eq!(SplitSpec::with_seed(0).sizes(208).unwrap(), [94, 62, 21, 31]);
        // 372 → (167.4, 111.6, 37.2, 55.8)
        assert_eq!(SplitSpec::with_seed(0).sizes(372).unwrap(), [167, 112, 37, 56]);
    }

    #[test]
    fn rejects_empty_splits_and_bad_sums() {
        let spec = SplitSpec {
            fractions: [1.0, 0.0, 0.0, 0.0],
            seed: 0,
        };
        assert!(matches!(split(&regression(10), &spec), Err(Error::Config(_))));
        let spec = SplitSpec {
            fractions: [0.5, 0.5, 0.5, 0.0],
            seed: 0,
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn seeds_and_partition() {
        let d = regression(50);
        let a = split(&d, &SplitSpec::with_seed(3)).unwrap();
        let b = split(&d, &SplitSpec::with_seed(3)).unwrap();
        let c = split(&d, &SplitSpec::with_seed(4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.indices, c.indices);
        let mut all: Vec<usize> = a.indices.concat();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
        let merged = a.merged_train();
        assert_eq!(merged.n_samples(), a.train.n_samples() + a.fs_val.n_samples());
    }

    #[test]
    fn stratified_classification_keeps_every_class() {
        let n = 208;
        let y = Array1::from_shape_fn(n, |i| if i < 111 { 0.0 } else { 1.0 });
        let d = Dataset::new(Array2::zeros((n, 1)), y, Task::Classification { n_classes: 2 }).unwrap();
        let b = split(&d, &SplitSpec::with_seed(9)).unwrap();
        let sizes: Vec<usize> = b.indices.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![94, 62, 21, 31]);
        for (part, expected) in b.indices.iter().zip(sizes) {
            let ones = part.iter().filter(|&&i| i >= 111).count();
            let share = ones as f64 / expected as f64;
            assert!((share - 97.0 / 208.0).abs() < 0.05, "share {share}");
        }
    }
}
