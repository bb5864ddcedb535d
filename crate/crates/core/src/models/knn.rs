//! Brute-force k-nearest-neighbour regression and classification (Euclidean distance).

use ndarray::{Array1, Array2, ArrayView2};

use crate::dataset::Task;

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub(crate) k: usize,
    pub(crate) train_x: Array2<f64>,
    pub(crate) train_y: Array1<f64>,
}

impl KnnModel {
    pub fn new(k: usize, x: ArrayView2<'_, f64>, y: ndarray::ArrayView1<'_, f64>) -> Self {
        Self {
            k: k.min(x.nrows()),
            train_x: x.to_owned(),
            train_y: y.to_owned(),
        }
    }

    /// Training indices of the `k` nearest rows; ties resolve to the lower training index.
    fn neighbours(&self, row: ndarray::ArrayView1<'_, f64>) -> Vec<usize> {
        let mut dist: Vec<(f64, usize)> = self
            .train_x
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                let d: f64 = t.iter().zip(row.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        let k = self.k;
        dist.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut head = dist[..k].to_vec();
        head.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        head.into_iter().map(|(_, i)| i).collect()
    }

    pub(crate) fn predict_values(&self, x: ArrayView2<'_, f64>) -> Array1<f64> {
        x.rows()
            .into_iter()
            .map(|row| {
                let nb = self.neighbours(row);
                nb.iter().map(|&i| self.train_y[i]).sum::<f64>() / nb.len() as f64
            })
            .collect()
    }

    pub(crate) fn predict_proba(&self, x: ArrayView2<'_, f64>, task: Task) -> Array2<f64> {
        let n_classes = task.n_classes().expect("classification task");
        let mut out = Array2::zeros((x.nrows(), n_classes));
        for (r, row) in x.rows().into_iter().enumerate() {
            let nb = self.neighbours(row);
            let w = 1.0 / nb.len() as f64;
            for i in nb {
                out[[r, self.train_y[i] as usize]] += w;
            }
        }
        out
    }
}
