//! Gradient-boosted regression trees grown leaf-wise.
//!
//! Each round fits one tree per output score to the gradients of the loss:
//! squared error for regression, log-odds with a sigmoid for two classes, and
//! softmax scores for more. Trees grow best-first until `num_leaves` is reached
//! or no split has positive gain. Splits need `min_child_samples` rows per side.
//! Rows are bagged per round (`subsample`) and columns per tree (`colsample_bytree`).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Task;

use super::spec::GbtParams;

const MIN_SUM_HESSIAN: f64 = 1e-3;
const MIN_SPLIT_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict_row(&self, row: ArrayView1<'_, f64>) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbtModel {
    /// `rounds[r][k]` is the tree for output score `k` at round `r`.
    pub(crate) rounds: Vec<Vec<Tree>>,
    pub(crate) init: Vec<f64>,
    pub(crate) task: Task,
    pub(crate) gains: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct SplitCandidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

struct Leaf {
    node: usize,
    rows: Vec<u32>,
    depth: i64,
    best: Option<SplitCandidate>,
}

/// Growth context for one tree: per-feature row orders are shared across trees.
struct Grower<'a> {
    x: ArrayView2<'a, f64>,
    sorted: &'a [Vec<u32>],
    grad: &'a [f64],
    hess: &'a [f64],
    params: &'a GbtParams,
    features: Vec<usize>,
    leaf_of: Vec<u32>,
}

impl Grower<'_> {
    fn sums(&self, rows: &[u32]) -> (f64, f64) {
        rows.iter().fold((0.0, 0.0), |(g, h), &r| {
            (g + self.grad[r as usize], h + self.hess[r as usize])
        })
    }

    fn best_split(&self, leaf_id: u32, rows: &[u32]) -> Option<SplitCandidate> {
        let min_child = self.params.min_child_samples;
        if rows.len() < 2 * min_child {
            return None;
        }
        let (g_total, h_total) = self.sums(rows);
        let parent = g_total * g_total / h_total;
        let mut best: Option<SplitCandidate> = None;
        for &f in &self.features {
            let (mut gl, mut hl, mut count) = (0.0, 0.0, 0usize);
            let mut prev: Option<f64> = None;
            for &r in &self.sorted[f] {
                if self.leaf_of[r as usize] != leaf_id {
                    continue;
                }
                let v = self.x[[r as usize, f]];
                if let Some(pv) = prev {
                    if v > pv && count >= min_child && rows.len() - count >= min_child {
                        let (gr, hr) = (g_total - gl, h_total - hl);
                        if hl >= MIN_SUM_HESSIAN && hr >= MIN_SUM_HESSIAN {
                            let gain = gl * gl / hl + gr * gr / hr - parent;
                            if gain > MIN_SPLIT_GAIN && best.is_none_or(|b| gain > b.gain) {
                                best = Some(SplitCandidate {
                                    gain,
                                    feature: f,
                                    threshold: pv + (v - pv) / 2.0,
                                });
                            }
                        }
                    }
                }
                gl += self.grad[r as usize];
                hl += self.hess[r as usize];
                count += 1;
                prev = Some(v);
            }
        }
        best
    }

    fn leaf_value(&self, rows: &[u32]) -> f64 {
        let (g, h) = self.sums(rows);
        if h <= 0.0 {
            0.0
        } else {
            -g / h * self.params.learning_rate
        }
    }

    fn grow(mut self, bag: &[u32], gains: &mut [f64]) -> Tree {
        let mut nodes = vec![Node::Leaf(0.0)];
        for &r in bag {
            self.leaf_of[r as usize] = 0;
        }
        let root_best = self.best_split(0, bag);
        let mut leaves = vec![Leaf {
            node: 0,
            rows: bag.to_vec(),
            depth: 0,
            best: root_best,
        }];
        while leaves.len() < self.params.num_leaves {
            let pick = leaves
                .iter()
                .enumerate()
                .filter(|(_, l)| l.best.is_some())
                .filter(|(_, l)| self.params.max_depth < 0 || l.depth < self.params.max_depth)
                .max_by(|a, b| {
                    let (ga, gb) = (a.1.best.unwrap().gain, b.1.best.unwrap().gain);
                    ga.total_cmp(&gb).then(b.0.cmp(&a.0))
                })
                .map(|(i, _)| i);
            let Some(i) = pick else { break };
            let leaf = leaves.swap_remove(i);
            let split = leaf.best.expect("filtered");
            gains[split.feature] += split.gain;

            let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = leaf
                .rows
                .iter()
                .partition(|&&r| self.x[[r as usize, split.feature]] <= split.threshold);
            let left = nodes.len();
            let right = left + 1;
            nodes.push(Node::Leaf(0.0));
            nodes.push(Node::Leaf(0.0));
            nodes[leaf.node] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
            for &r in &left_rows {
                self.leaf_of[r as usize] = left as u32;
            }
            for &r in &right_rows {
                self.leaf_of[r as usize] = right as u32;
            }
            for (node, rows) in [(left, left_rows), (right, right_rows)] {
                let best = self.best_split(node as u32, &rows);
                leaves.push(Leaf {
                    node,
                    rows,
                    depth: leaf.depth + 1,
                    best,
                });
            }
        }
        for leaf in &leaves {
            nodes[leaf.node] = Node::Leaf(self.leaf_value(&leaf.rows));
        }
        Tree { nodes }
    }
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

impl GbtModel {
    pub fn fit(params: &GbtParams, x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, task: Task, seed: u64) -> Self {
        let n = x.nrows();
        let m = x.ncols();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let sorted: Vec<Vec<u32>> = (0..m)
            .map(|f| {
                let mut idx: Vec<u32> = (0..n as u32).collect();
                idx.sort_by(|&a, &b| x[[a as usize, f]].total_cmp(&x[[b as usize, f]]).then(a.cmp(&b)));
                idx
            })
            .collect();

        let n_scores = match task {
            Task::Regression => 1,
            Task::Classification { n_classes: 2 } => 1,
            Task::Classification { n_classes } => n_classes,
        };
        let init: Vec<f64> = match task {
            Task::Regression => {
                let mean = y.sum() / n as f64;
                // one correction step so a constant target is reproduced exactly
                vec![mean + y.iter().map(|v| v - mean).sum::<f64>() / n as f64]
            }
            Task::Classification { n_classes: 2 } => {
                let p = (y.sum() / n as f64).clamp(1e-15, 1.0 - 1e-15);
                vec![(p / (1.0 - p)).ln()]
            }
            Task::Classification { n_classes } => (0..n_classes)
                .map(|c| {
                    let count = y.iter().filter(|&&v| v as usize == c).count();
                    ((count as f64 / n as f64).max(1e-15)).ln()
                })
                .collect(),
        };

        let mut scores = Array2::from_shape_fn((n, n_scores), |(_, k)| init[k]);
        let mut gains = vec![0.0; m];
        let bag_size = ((params.subsample * n as f64).round() as usize).clamp(1, n);
        let col_count = ((params.colsample_bytree * m as f64).round() as usize).clamp(1, m);
        let mut rounds = Vec::with_capacity(params.n_estimators);
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n];

        for _ in 0..params.n_estimators {
            let mut bag: Vec<u32> = if bag_size == n {
                (0..n as u32).collect()
            } else {
                sample(&mut rng, n, bag_size).into_iter().map(|i| i as u32).collect()
            };
            bag.sort_unstable();

            let probs = match task {
                Task::Classification { n_classes } if n_classes > 2 => Some(softmax(&scores)),
                _ => None,
            };
            let mut trees = Vec::with_capacity(n_scores);
            for k in 0..n_scores {
                for i in 0..n {
                    let (g, h) = match task {
                        Task::Regression => (scores[[i, 0]] - y[i], 1.0),
                        Task::Classification { n_classes: 2 } => {
                            let p = sigmoid(scores[[i, 0]]);
                            (p - y[i], (p * (1.0 - p)).max(1e-16))
                        }
                        Task::Classification { n_classes } => {
                            let p = probs.as_ref().expect("multiclass")[[i, k]];
                            let target = if y[i] as usize == k { 1.0 } else { 0.0 };
                            let factor = n_classes as f64 / (n_classes as f64 - 1.0);
                            (p - target, (factor * p * (1.0 - p)).max(1e-16))
                        }
                    };
                    grad[i] = g;
                    hess[i] = h;
                }
                let mut features: Vec<usize> = if col_count == m {
                    (0..m).collect()
                } else {
                    sample(&mut rng, m, col_count).into_vec()
                };
                features.sort_unstable();
                let grower = Grower {
                    x,
                    sorted: &sorted,
                    grad: &grad,
                    hess: &hess,
                    params,
                    features,
                    leaf_of: vec![u32::MAX; n],
                };
                let tree = grower.grow(&bag, &mut gains);
                for (i, row) in x.rows().into_iter().enumerate() {
                    scores[[i, k]] += tree.predict_row(row);
                }
                trees.push(tree);
            }
            rounds.push(trees);
        }

        Self {
            rounds,
            init,
            task,
            gains,
        }
    }

    /// Raw additive scores, one column per output score.
    pub(crate) fn raw_scores(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let k = self.init.len();
        let mut out = Array2::from_shape_fn((x.nrows(), k), |(_, c)| self.init[c]);
        for (i, row) in x.rows().into_iter().enumerate() {
            for trees in &self.rounds {
                for (c, tree) in trees.iter().enumerate() {
                    out[[i, c]] += tree.predict_row(row);
                }
            }
        }
        out
    }

    pub fn predict_values(&self, x: ArrayView2<'_, f64>) -> Array1<f64> {
        self.raw_scores(x).column(0).to_owned()
    }

    pub fn predict_proba(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let raw = self.raw_scores(x);
        match self.task {
            Task::Classification { n_classes: 2 } => {
                let mut out = Array2::zeros((x.nrows(), 2));
                for (i, &s) in raw.column(0).iter().enumerate() {
                    let p = sigmoid(s);
                    out[[i, 0]] = 1.0 - p;
                    out[[i, 1]] = p;
                }
                out
            }
            _ => softmax(&raw),
        }
    }

    pub fn n_rounds(&self) -> usize {
        self.rounds.len()
    }

    /// Total split gain accumulated by each feature.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// A copy truncated to the first `rounds` boosting rounds.
    pub fn truncated(&self, rounds: usize) -> GbtModel {
        GbtModel {
            rounds: self.rounds[..rounds.min(self.rounds.len())].to_vec(),
            ..self.clone()
        }
    }
}

fn softmax(scores: &Array2<f64>) -> Array2<f64> {
    let mut out = scores.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    out
}
