use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::data::{SplitSpec, SyntheticSpec, TargetColumn};
use crate::dataset::Task;
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::models::{HyperparameterGrid, ModelKind, ParamValue, CV_FOLDS};

/// Slack values searched for GBMO.
pub const DEFAULT_MU_GRID: [f64; 4] = [0.00025, 0.001, 0.01, 0.05];
/// `M/6, M/5, M/4, M/2` as `[numerator, denominator]`.
pub const DEFAULT_ETA_FRACTIONS: [[u64; 2]; 4] = [[1, 6], [1, 5], [1, 4], [1, 2]];
/// Literal feature-count grid of the synthetic experiment.
pub const SYNTHETIC_ETA_GRID: [usize; 4] = [6, 10, 15, 20];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    AllFeatures,
    Gbmo,
    Flbmo,
    Cc,
    Mi,
    Rfe,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::AllFeatures,
        Method::Gbmo,
        Method::Flbmo,
        Method::Cc,
        Method::Mi,
        Method::Rfe,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::AllFeatures => "all_features",
            Method::Gbmo => "gbmo",
            Method::Flbmo => "flbmo",
            Method::Cc => "cc",
            Method::Mi => "mi",
            Method::Rfe => "rfe",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Method::AllFeatures => "All features",
            Method::Gbmo => "GBMO",
            Method::Flbmo => "FLBMO",
            Method::Cc => "CC",
            Method::Mi => "MI",
            Method::Rfe => "RFE",
        }
    }

    /// Mask-based selectors tune and query their model on the selection split only.
    pub fn uses_selection_split(&self) -> bool {
        matches!(self, Method::Gbmo | Method::Flbmo)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Regression,
    Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Synthetic {
        #[serde(default = "default_synthetic_samples")]
        n_samples: usize,
        #[serde(default = "default_synthetic_features")]
        n_features: usize,
        #[serde(default = "default_synthetic_informative")]
        n_informative: usize,
    },
    Csv {
        path: PathBuf,
        target: TargetColumn,
        task: TaskKind,
        #[serde(default = "yes")]
        header: bool,
    },
}

impl DatasetSource {
    pub fn synthetic(spec: SyntheticSpec) -> Self {
        DatasetSource::Synthetic {
            n_samples: spec.n_samples,
            n_features: spec.n_features,
            n_informative: spec.n_informative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(deserialize_with = "model_kind_from_str", serialize_with = "model_kind_to_str")]
    pub kind: ModelKind,
    /// Per-parameter candidate lists. Absent means the built-in search space for `kind`.
    #[serde(default)]
    pub grid: Option<BTreeMap<String, Vec<ParamValue>>>,
}

impl ModelSection {
    pub fn new(kind: ModelKind) -> Self {
        Self { kind, grid: None }
    }

    pub fn grid(&self, seed: u64) -> Result<HyperparameterGrid> {
        match &self.grid {
            None => Ok(HyperparameterGrid::default_for(self.kind, seed)),
            Some(axes) => {
                let axes: Vec<(&str, Vec<ParamValue>)> = axes.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
                HyperparameterGrid::cartesian(self.kind, &axes, seed)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossChoice {
    /// Squared error for regression, log loss for classification.
    #[default]
    Auto,
    Mse,
    LogLoss,
}

impl LossChoice {
    pub fn resolve(&self, task: Task) -> Result<LossKind> {
        let kind = match self {
            LossChoice::Auto => LossKind::for_task(task),
            LossChoice::Mse => LossKind::MeanSquaredError,
            LossChoice::LogLoss => LossKind::log_loss(),
        };
        kind.check_task(task)
            .map_err(|_| Error::Config(format!("loss {} does not fit a {task:?} task", kind.name())))?;
        Ok(kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    #[serde(default = "default_fractions")]
    pub fractions: [f64; 4],
    /// Defaults to the experiment seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for SplitSection {
    fn default() -> Self {
        Self {
            fractions: default_fractions(),
            seed: None,
        }
    }
}

/// Everything needed to run one experiment end to end. Reads from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub dataset: DatasetSource,
    pub model: ModelSection,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_mu_grid")]
    pub mu_grid: Vec<f64>,
    #[serde(default = "one")]
    pub min_features: usize,
    /// Feature-count grid as fractions of M. Ignored when `eta_grid` is set.
    #[serde(default = "default_eta_fractions")]
    pub eta_fractions: Vec<[u64; 2]>,
    #[serde(default)]
    pub eta_grid: Option<Vec<usize>>,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub loss: LossChoice,
    #[serde(default = "default_cv_folds")]
    pub cv_folds: usize,
    #[serde(default = "default_mi_bins")]
    pub mi_bins: usize,
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetSource, model: ModelSection) -> Self {
        Self {
            seed: 0,
            output_dir: default_output_dir(),
            dataset,
            model,
            methods: default_methods(),
            mu_grid: default_mu_grid(),
            min_features: 1,
            eta_fractions: default_eta_fractions(),
            eta_grid: None,
            split: SplitSection::default(),
            loss: LossChoice::Auto,
            cv_folds: CV_FOLDS,
            mi_bins: crate::baselines::MI_BINS,
        }
    }

    /// The 300 × 100 synthetic experiment with boosted trees and the literal η grid.
    pub fn synthetic(seed: u64) -> Self {
        Self {
            seed,
            eta_grid: Some(SYNTHETIC_ETA_GRID.to_vec()),
            ..Self::new(
                DatasetSource::synthetic(SyntheticSpec::default()),
                ModelSection::new(ModelKind::GradientBoostedTrees),
            )
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a TOML file. Relative dataset and output paths resolve against the file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::Config(format!("{}: config file not found", path.display())),
            _ => Error::io(path, e),
        })?;
        let mut config = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let DatasetSource::Csv { path: data, .. } = &mut config.dataset {
            if data.is_relative() {
                *data = base.join(&*data);
            }
        }
        if config.output_dir.is_relative() {
            config.output_dir = base.join(&config.output_dir);
        }
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is representable as TOML")
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            fractions: self.split.fractions,
            seed: self.split.seed.unwrap_or(self.seed),
        }
    }

    /// Checks everything that does not depend on the loaded data.
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("no methods configured".into()));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::Config(format!("method {m} listed twice")));
            }
        }
        let has = |m: Method| self.methods.contains(&m);
        if has(Method::Gbmo) {
            if self.mu_grid.is_empty() {
                return Err(Error::Config("mu grid is empty".into()));
            }
            if let Some(mu) = self.mu_grid.iter().find(|mu| !(mu.is_finite() && **mu >= 0.0)) {
                return Err(Error::Config(format!("mu must be finite and non-negative, got {mu}")));
            }
            if self.min_features == 0 {
                return Err(Error::Config("min_features must be at least 1".into()));
            }
        }
        if [Method::Flbmo, Method::Cc, Method::Mi, Method::Rfe]
            .iter()
            .any(|&m| has(m))
        {
            match &self.eta_grid {
                Some(grid) if grid.is_empty() => return Err(Error::Config("eta grid is empty".into())),
                Some(grid) if grid.contains(&0) => return Err(Error::Config("eta must be at least 1".into())),
                Some(_) => {}
                None if self.eta_fractions.is_empty() => {
                    return Err(Error::Config("eta fraction grid is empty".into()))
                }
                None => {
                    if let Some(f) = self.eta_fractions.iter().find(|f| f[0] == 0 || f[1] == 0) {
                        return Err(Error::Config(format!("eta fraction {}/{} is not positive", f[0], f[1])));
                    }
                }
            }
        }
        if self.cv_folds < 2 {
            return Err(Error::Config(format!(
                "cv_folds must be at least 2, got {}",
                self.cv_folds
            )));
        }
        if self.mi_bins < 2 {
            return Err(Error::Config(format!(
                "mi_bins must be at least 2, got {}",
                self.mi_bins
            )));
        }
        if let DatasetSource::Synthetic {
            n_samples,
            n_features,
            n_informative,
        } = self.dataset
        {
            if n_samples == 0 || n_features == 0 || n_informative > n_features {
                return Err(Error::Config(format!(
                    "synthetic dataset {n_samples} × {n_features} with {n_informative} informative is invalid"
                )));
            }
        }
        self.split_spec().validate()?;
        self.model.grid(self.seed)?;
        Ok(())
    }

    /// The feature-count grid for `n_features` columns.
    pub fn eta_candidates(&self, n_features: usize) -> Result<Vec<usize>> {
        match &self.eta_grid {
            Some(grid) => {
                if let Some(eta) = grid.iter().find(|&&e| e == 0 || e > n_features) {
                    return Err(Error::Config(format!("eta={eta} outside [1, {n_features}]")));
                }
                let mut out: Vec<usize> = Vec::new();
                for &e in grid {
                    if !out.contains(&e) {
                        out.push(e);
                    }
                }
                Ok(out)
            }
            None => resolve_eta_grid(&self.eta_fractions, n_features),
        }
    }
}

/// Rounds each `num/den · M` half up, clamps to `[1, M − 1]`, and drops repeats, keeping first-seen order.
pub fn resolve_eta_grid(fractions: &[[u64; 2]], n_features: usize) -> Result<Vec<usize>> {
    if n_features < 2 {
        return Err(Error::Config(format!(
            "need at least 2 features to size a selection, got {n_features}"
        )));
    }
    let m = n_features as u64;
    let mut out = Vec::with_capacity(fractions.len());
    for &[num, den] in fractions {
        if den == 0 {
            return Err(Error::Config("eta fraction with zero denominator".into()));
        }
        let rounded = (2 * num * m + den) / (2 * den);
        let eta = rounded.clamp(1, m - 1) as usize;
        if !out.contains(&eta) {
            out.push(eta);
        }
    }
    Ok(out)
}

fn model_kind_from_str<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ModelKind, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

fn model_kind_to_str<S: serde::Serializer>(kind: &ModelKind, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(kind.name())
}

fn default_synthetic_samples() -> usize {
    SyntheticSpec::default().n_samples
}

fn default_synthetic_features() -> usize {
    SyntheticSpec::default().n_features
}

fn default_synthetic_informative() -> usize {
    SyntheticSpec::default().n_informative
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_mu_grid() -> Vec<f64> {
    DEFAULT_MU_GRID.to_vec()
}

fn default_eta_fractions() -> Vec<[u64; 2]> {
    DEFAULT_ETA_FRACTIONS.to_vec()
}

fn default_fractions() -> [f64; 4] {
    SplitSpec::with_seed(0).fractions
}

fn default_cv_folds() -> usize {
    CV_FOLDS
}

fn default_mi_bins() -> usize {
    crate::baselines::MI_BINS
}
