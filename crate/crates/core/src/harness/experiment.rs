use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{DatasetSource, ExperimentConfig, Method, TaskKind};
use crate::baselines::{
    mutual_information_scores_with_bins, pearson_scores, rfe, select_top_k, RfeConfig, ScoreVector,
};
use crate::data::{generate_synthetic, load_csv, split, standardize, SplitBundle};
use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::mask::{select_columns, Mask};
use crate::models::{self, cross_validate, ModelSpec, TrainedModel};
use crate::predictor::Predictor;
use crate::selectors::{finalize_selection, flbmo, gbmo, FlbmoConfig, GbmoConfig, SelectionTrace};

/// The selector hyperparameter a row was validated with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Hyperparameter {
    Mu(f64),
    Eta(usize),
}

impl Hyperparameter {
    /// Filesystem-friendly form, e.g. `mu_0.01`.
    pub fn slug(&self) -> String {
        match self {
            Hyperparameter::Mu(mu) => format!("mu_{mu}"),
            Hyperparameter::Eta(eta) => format!("eta_{eta}"),
        }
    }
}

impl fmt::Display for Hyperparameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hyperparameter::Mu(mu) => write!(f, "mu={mu}"),
            Hyperparameter::Eta(eta) => write!(f, "eta={eta}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub method: Method,
    /// `None` when the method was skipped.
    pub n_selected: Option<usize>,
    pub hyperparameter: Option<Hyperparameter>,
    pub val_loss: Option<f64>,
    pub test_loss: Option<f64>,
    /// Selected column indices, ascending.
    pub selected: Vec<usize>,
    pub note: Option<String>,
}

impl ReportRow {
    pub fn is_skipped(&self) -> bool {
        self.test_loss.is_none()
    }
}

/// One selector run, labelled by method and candidate hyperparameter.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRun {
    pub method: Method,
    pub hyperparameter: Hyperparameter,
    pub trace: SelectionTrace,
}

impl TraceRun {
    pub fn file_stem(&self) -> String {
        format!("{}_{}", self.method, self.hyperparameter.slug())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub task: Task,
    pub loss: &'static str,
    pub n_samples: usize,
    pub n_features: usize,
    pub split_sizes: [usize; 4],
    /// Tuned spec used by the mask selectors, if any ran.
    pub selection_model: Option<String>,
    /// Tuned spec used by the baselines and the all-features row, if any ran.
    pub baseline_model: Option<String>,
    pub test_evaluations: usize,
    pub started_unix: u64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub traces: Vec<TraceRun>,
    pub metadata: RunMetadata,
}

impl ExperimentReport {
    pub fn row(&self, method: Method) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

/// Test rows behind a counter so every read is accounted for.
struct TestSplit {
    data: Dataset,
    reads: AtomicUsize,
}

impl TestSplit {
    fn evaluate(&self, model: &TrainedModel, selected: &[usize], loss: LossKind) -> Result<f64> {
        self.reads.fetch_add(1, Ordering::SeqCst);
        let x = select_columns(self.data.features(), selected)?;
        model.loss_on(x.view(), self.data.targets(), loss)
    }
}

struct Candidate {
    hyperparameter: Hyperparameter,
    selected: Vec<usize>,
    model: TrainedModel,
    val_loss: f64,
    trace: Option<SelectionTrace>,
}

/// Scores a model fitted on `selected` columns against the model-validation split.
fn validation_loss(model: &TrainedModel, selected: &[usize], val: &Dataset, loss: LossKind) -> Result<f64> {
    let x = select_columns(val.features(), selected)?;
    model.loss_on(x.view(), val.targets(), loss)
}

/// Lowest validation loss, ties to the earliest candidate.
fn pick(candidates: Vec<Candidate>) -> Candidate {
    let key = |c: &Candidate| if c.val_loss.is_nan() { f64::INFINITY } else { c.val_loss };
    let mut best: Option<Candidate> = None;
    for c in candidates {
        if best.as_ref().is_none_or(|b| key(&c) < key(b)) {
            best = Some(c);
        }
    }
    best.expect("candidate grids are non-empty")
}

fn load(config: &ExperimentConfig) -> Result<Dataset> {
    match &config.dataset {
        DatasetSource::Synthetic {
            n_samples,
            n_features,
            n_informative,
        } => generate_synthetic(*n_samples, *n_features, *n_informative, config.seed),
        DatasetSource::Csv {
            path,
            target,
            task,
            header,
        } => {
            let task = match task {
                TaskKind::Regression => Task::Regression,
                TaskKind::Classification => Task::Classification { n_classes: 2 },
            };
            load_csv(path, target, task, *header)
        }
    }
}

/// Runs the full protocol: split, standardize, tune, select per candidate, validate, test once.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    config.validate().map_err(|e| e.in_stage("config"))?;

    let dataset = load(config).map_err(|e| e.in_stage("load"))?;
    let task = dataset.task();
    let loss = config.loss.resolve(task).map_err(|e| e.in_stage("config"))?;
    let m = dataset.n_features();

    let raw = split(&dataset, &config.split_spec()).map_err(|e| e.in_stage("split"))?;
    let (bundle, _) = standardize(&raw);
    let SplitBundle {
        train,
        fs_val,
        model_val,
        test,
        ..
    } = &bundle;
    let merged = bundle.merged_train();
    let test = TestSplit {
        data: test.clone(),
        reads: AtomicUsize::new(0),
    };

    let grid = config.model.grid(config.seed).map_err(|e| e.in_stage("tune"))?;
    let tune = |data: &Dataset| {
        cross_validate(
            &grid,
            data.features(),
            data.targets(),
            task,
            loss,
            config.cv_folds,
            config.seed,
        )
        .map_err(|e| e.in_stage("tune"))
    };
    let wants = |pred: fn(&Method) -> bool| config.methods.iter().any(pred);
    let selection_spec = if wants(Method::uses_selection_split) {
        Some(tune(train)?)
    } else {
        None
    };
    let baseline_spec = if wants(|m| !m.uses_selection_split()) {
        Some(tune(&merged)?)
    } else {
        None
    };

    let needs_eta = wants(|m| matches!(m, Method::Flbmo | Method::Cc | Method::Mi | Method::Rfe));
    let eta_grid = if needs_eta {
        config.eta_candidates(m).map_err(|e| e.in_stage("config"))?
    } else {
        Vec::new()
    };

    let mut rows = Vec::with_capacity(config.methods.len());
    let mut traces = Vec::new();
    for &method in &config.methods {
        let stage = method.name();
        let tagged = |e: Error| e.in_stage(stage);
        let candidates = match method {
            Method::AllFeatures => {
                let spec = baseline_spec.as_ref().expect("tuned above");
                let model = models::fit(spec, merged.features(), merged.targets(), task).map_err(tagged)?;
                let selected: Vec<usize> = (0..m).collect();
                let val_loss = validation_loss(&model, &selected, model_val, loss).map_err(tagged)?;
                let test_loss = test.evaluate(&model, &selected, loss).map_err(tagged)?;
                rows.push(ReportRow {
                    method,
                    n_selected: Some(m),
                    hyperparameter: None,
                    val_loss: Some(val_loss),
                    test_loss: Some(test_loss),
                    selected,
                    note: None,
                });
                continue;
            }
            Method::Gbmo | Method::Flbmo => {
                let spec = selection_spec.as_ref().expect("tuned above");
                let model = models::fit(spec, train.features(), train.targets(), task).map_err(tagged)?;
                let hypers: Vec<Hyperparameter> = if method == Method::Gbmo {
                    config.mu_grid.iter().map(|&mu| Hyperparameter::Mu(mu)).collect()
                } else {
                    eta_grid.iter().map(|&eta| Hyperparameter::Eta(eta)).collect()
                };
                hypers
                    .into_par_iter()
                    .map(|h| mask_candidate(h, config, train, fs_val, model_val, &model, spec, loss))
                    .collect::<Result<Vec<_>>>()
                    .map_err(tagged)?
            }
            Method::Cc | Method::Mi => {
                let spec = baseline_spec.as_ref().expect("tuned above");
                let scores = if method == Method::Cc {
                    pearson_scores(merged.features(), merged.targets())
                } else {
                    mutual_information_scores_with_bins(merged.features(), merged.targets(), task, config.mi_bins)
                }
                .map_err(tagged)?;
                eta_grid
                    .par_iter()
                    .map(|&k| filter_candidate(k, &scores, &merged, model_val, spec, loss))
                    .collect::<Result<Vec<_>>>()
                    .map_err(tagged)?
            }
            Method::Rfe => {
                let spec = baseline_spec.as_ref().expect("tuned above");
                if !spec.kind.supports_importances() {
                    rows.push(ReportRow {
                        method,
                        n_selected: None,
                        hyperparameter: None,
                        val_loss: None,
                        test_loss: None,
                        selected: Vec::new(),
                        note: Some(format!(
                            "skipped: {} has no intrinsic feature importances",
                            spec.kind.name()
                        )),
                    });
                    continue;
                }
                eta_grid
                    .par_iter()
                    .map(|&eta| {
                        let config = RfeConfig {
                            eta,
                            spec: spec.clone(),
                        };
                        let out = rfe(merged.features(), merged.targets(), task, &config)?;
                        let val_loss = validation_loss(&out.model, &out.selected, model_val, loss)?;
                        Ok(Candidate {
                            hyperparameter: Hyperparameter::Eta(eta),
                            selected: out.selected,
                            model: out.model,
                            val_loss,
                            trace: None,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
                    .map_err(tagged)?
            }
        };

        for c in &candidates {
            if let Some(trace) = &c.trace {
                traces.push(TraceRun {
                    method,
                    hyperparameter: c.hyperparameter,
                    trace: trace.clone(),
                });
            }
        }
        let best = pick(candidates);
        let test_loss = test.evaluate(&best.model, &best.selected, loss).map_err(tagged)?;
        rows.push(ReportRow {
            method,
            n_selected: Some(best.selected.len()),
            hyperparameter: Some(best.hyperparameter),
            val_loss: Some(best.val_loss),
            test_loss: Some(test_loss),
            selected: best.selected,
            note: None,
        });
    }

    let metadata = RunMetadata {
        seed: config.seed,
        task,
        loss: loss.name(),
        n_samples: dataset.n_samples(),
        n_features: m,
        split_sizes: [
            bundle.train.n_samples(),
            bundle.fs_val.n_samples(),
            bundle.model_val.n_samples(),
            bundle.test.n_samples(),
        ],
        selection_model: selection_spec.as_ref().map(ModelSpec::describe),
        baseline_model: baseline_spec.as_ref().map(ModelSpec::describe),
        test_evaluations: test.reads.load(Ordering::SeqCst),
        started_unix,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    };
    Ok(ExperimentReport { rows, traces, metadata })
}

#[allow(clippy::too_many_arguments)]
fn mask_candidate(
    hyperparameter: Hyperparameter,
    config: &ExperimentConfig,
    train: &Dataset,
    fs_val: &Dataset,
    model_val: &Dataset,
    model: &TrainedModel,
    spec: &ModelSpec,
    loss: LossKind,
) -> Result<Candidate> {
    let (mask, trace): (Mask, SelectionTrace) = match hyperparameter {
        Hyperparameter::Mu(mu) => gbmo(
            train,
            fs_val,
            model,
            loss,
            &GbmoConfig {
                mu,
                min_features: config.min_features,
            },
        )?,
        Hyperparameter::Eta(eta) => flbmo(train, fs_val, model, loss, &FlbmoConfig { eta })?,
    };
    let (selected, refit) = finalize_selection(train, &mask, spec)?;
    let val_loss = validation_loss(&refit, &selected, model_val, loss)?;
    Ok(Candidate {
        hyperparameter,
        selected,
        model: refit,
        val_loss,
        trace: Some(trace),
    })
}

fn filter_candidate(
    k: usize,
    scores: &ScoreVector,
    merged: &Dataset,
    model_val: &Dataset,
    spec: &ModelSpec,
    loss: LossKind,
) -> Result<Candidate> {
    let selected = select_top_k(scores, k)?;
    let x = select_columns(merged.features(), &selected)?;
    let model = models::fit(spec, x.view(), merged.targets(), merged.task())?;
    let val_loss = validation_loss(&model, &selected, model_val, loss)?;
    Ok(Candidate {
        hyperparameter: Hyperparameter::Eta(k),
        selected,
        model,
        val_loss,
        trace: None,
    })
}
