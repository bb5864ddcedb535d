//! Fully connected network trained by mini-batch Adam.
//!
//! Regression uses one linear output and the objective `mean(½(ŷ−y)²)`;
//! classification uses a softmax over all classes and mean cross-entropy.
//! Both add `alpha / (2·batch) · Σ‖W‖²` over weight matrices (biases are not penalized).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Task;

use super::spec::{Activation, MlpParams};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// Shape `(inputs, outputs)`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub(crate) layers: Vec<Layer>,
    pub(crate) activation: Activation,
    pub(crate) alpha: f64,
    pub(crate) task: Task,
}

impl MlpModel {
    /// Glorot-uniform initialization, as used by common MLP implementations.
    pub fn init(
        input_width: usize,
        hidden: &[usize],
        activation: Activation,
        alpha: f64,
        task: Task,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let outputs = task.n_classes().unwrap_or(1);
        let mut sizes = vec![input_width];
        sizes.extend_from_slice(hidden);
        sizes.push(outputs);
        let factor = match activation {
            Activation::Logistic => 2.0,
            Activation::Relu => 6.0,
        };
        let layers = sizes
            .windows(2)
            .map(|w| {
                let bound = (factor / (w[0] + w[1]) as f64).sqrt();
                Layer {
                    weights: Array2::from_shape_fn((w[0], w[1]), |_| rng.random_range(-bound..bound)),
                    bias: Array1::from_shape_fn(w[1], |_| rng.random_range(-bound..bound)),
                }
            })
            .collect();
        Self {
            layers,
            activation,
            alpha,
            task,
        }
    }

    pub fn fit(params: &MlpParams, x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, task: Task, seed: u64) -> Self {
        let mut model = Self::init(
            x.ncols(),
            &params.hidden_layer_sizes,
            params.activation,
            params.alpha,
            task,
            seed,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let n_params = model.n_params();
        let mut m = vec![0.0; n_params];
        let mut v = vec![0.0; n_params];
        let mut step = 0i32;
        let mut order: Vec<usize> = (0..x.nrows()).collect();
        for _ in 0..params.max_epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(params.batch_size) {
                let bx = x.select(Axis(0), batch);
                let by = y.select(Axis(0), batch);
                let (_, grad) = model.loss_and_gradient(bx.view(), by.view());
                step += 1;
                let lr =
                    params.learning_rate_init * (1.0 - ADAM_BETA2.powi(step)).sqrt() / (1.0 - ADAM_BETA1.powi(step));
                let mut theta = model.parameters();
                for i in 0..n_params {
                    m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * grad[i];
                    v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * grad[i] * grad[i];
                    theta[i] -= lr * m[i] / (v[i].sqrt() + ADAM_EPS);
                }
                model.set_parameters(&theta);
            }
        }
        model
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All weights then biases, layer by layer, row-major.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend(l.weights.iter());
            out.extend(l.bias.iter());
        }
        out
    }

    pub fn set_parameters(&mut self, theta: &[f64]) {
        assert_eq!(theta.len(), self.n_params());
        let mut offset = 0;
        for l in &mut self.layers {
            for w in l.weights.iter_mut() {
                *w = theta[offset];
                offset += 1;
            }
            for b in l.bias.iter_mut() {
                *b = theta[offset];
                offset += 1;
            }
        }
    }

    fn activate(&self, z: &mut Array2<f64>) {
        match self.activation {
            Activation::Relu => z.mapv_inplace(|v| v.max(0.0)),
            Activation::Logistic => z.mapv_inplace(logistic),
        }
    }

    /// Hidden activations per layer (index 0 is the input) and the raw output scores.
    fn forward(&self, x: ArrayView2<'_, f64>) -> (Vec<Array2<f64>>, Array2<f64>) {
        let mut acts = vec![x.to_owned()];
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = acts[i].dot(&l.weights) + &l.bias;
            if i == last {
                return (acts, z);
            }
            self.activate(&mut z);
            acts.push(z);
        }
        unreachable!("network has at least one layer")
    }

    pub(crate) fn output(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let (_, mut out) = self.forward(x);
        if self.task.is_classification() {
            softmax_rows(&mut out);
        }
        out
    }

    /// Objective on the batch and its gradient in [`Self::parameters`] order.
    pub fn loss_and_gradient(&self, x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> (f64, Vec<f64>) {
        let n = x.nrows() as f64;
        let (acts, mut out) = self.forward(x);
        let mut loss;
        let mut delta = match self.task {
            Task::Regression => {
                let diff = &out.column(0) - &y;
                loss = 0.5 * diff.dot(&diff) / n;
                diff.insert_axis(Axis(1)) / n
            }
            Task::Classification { .. } => {
                softmax_rows(&mut out);
                loss = 0.0;
                for (r, &label) in y.iter().enumerate() {
                    let c = label as usize;
                    loss -= out[[r, c]].max(f64::MIN_POSITIVE).ln();
                    out[[r, c]] -= 1.0;
                }
                loss /= n;
                out / n
            }
        };
        let penalty: f64 = self
            .layers
            .iter()
            .map(|l| l.weights.iter().map(|w| w * w).sum::<f64>())
            .sum();
        loss += 0.5 * self.alpha * penalty / n;

        let mut grads: Vec<(Array2<f64>, Array1<f64>)> = Vec::with_capacity(self.layers.len());
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let gw = acts[i].t().dot(&delta) + &(&layer.weights * (self.alpha / n));
            let gb = delta.sum_axis(Axis(0));
            if i > 0 {
                let mut back = delta.dot(&layer.weights.t());
                let a = &acts[i];
                match self.activation {
                    Activation::Relu => back.zip_mut_with(a, |d, &av| {
                        if av <= 0.0 {
                            *d = 0.0
                        }
                    }),
                    Activation::Logistic => back.zip_mut_with(a, |d, &av| *d *= av * (1.0 - av)),
                }
                delta = back;
            }
            grads.push((gw, gb));
        }
        grads.reverse();
        let mut flat = Vec::with_capacity(self.n_params());
        for (gw, gb) in grads {
            flat.extend(gw.iter());
            flat.extend(gb.iter());
        }
        (loss, flat)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }
}

fn logistic(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
}
