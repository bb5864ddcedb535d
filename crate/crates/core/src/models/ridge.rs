//! L2-penalized least squares with an unpenalized intercept.

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

use super::spec::RidgeParams;

/// Relative variance below which a column is treated as constant and given a zero weight.
const CONSTANT_COLUMN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub(crate) coefficients: Array1<f64>,
    pub(crate) intercept: f64,
}

impl RidgeModel {
    pub fn fit(params: &RidgeParams, x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<Self> {
        let n = x.nrows() as f64;
        let x_mean = x.mean_axis(Axis(0)).expect("non-empty");
        let y_mean = y.sum() / n;
        let xc = &x - &x_mean;
        let yc = &y - y_mean;

        let active: Vec<usize> = (0..x.ncols())
            .filter(|&j| {
                let col = xc.column(j);
                let var = col.dot(&col) / n;
                var > CONSTANT_COLUMN_TOL * (1.0 + x_mean[j] * x_mean[j])
            })
            .collect();

        let mut coefficients = Array1::zeros(x.ncols());
        if !active.is_empty() {
            let xa = xc.select(Axis(1), &active);
            let mut gram = xa.t().dot(&xa);
            for d in 0..active.len() {
                gram[[d, d]] += params.alpha;
            }
            let rhs = xa.t().dot(&yc);
            let w = solve(gram.into_raw_vec_and_offset().0, rhs.to_vec(), active.len())?;
            for (&j, wj) in active.iter().zip(w) {
                coefficients[j] = wj;
            }
        }
        let intercept = y_mean - x_mean.dot(&coefficients);
        Ok(Self {
            coefficients,
            intercept,
        })
    }

    pub fn coefficients(&self) -> ArrayView1<'_, f64> {
        self.coefficients.view()
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub(crate) fn predict(&self, x: ArrayView2<'_, f64>) -> Array1<f64> {
        x.dot(&self.coefficients) + self.intercept
    }
}

/// Solves the dense `n x n` row-major system `a x = b` by Gaussian elimination with partial pivoting.
pub(crate) fn solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .expect("non-empty range");
        if a[pivot * n + col].abs() <= 1e-13 * scale {
            return Err(Error::Fit("singular normal equations; add a ridge penalty".into()));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row * n + row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn solve_small_system() {
        let x = solve(vec![2.0, 1.0, 1.0, 3.0], vec![3.0, 5.0], 2).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
        assert!(solve(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 2.0], 2).is_err());
    }

    #[test]
    fn constant_column_gets_zero_weight() {
        let x = Array2::from_shape_fn((10, 2), |(i, j)| if j == 0 { i as f64 } else { 4.0 });
        let y = x.column(0).mapv(|v| 3.0 * v - 1.0);
        let m = RidgeModel::fit(&RidgeParams { alpha: 0.0 }, x.view(), y.view()).unwrap();
        assert!((m.coefficients[0] - 3.0).abs() < 1e-10);
        assert_eq!(m.coefficients[1], 0.0);
        assert!((m.intercept + 1.0).abs() < 1e-9);
    }
}
