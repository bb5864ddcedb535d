//! Model specifications, per-kind hyperparameter schemas, and Cartesian grids.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ridge,
    KNearestNeighbors,
    MultiLayerPerceptron,
    GradientBoostedTrees,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Ridge => "ridge",
            ModelKind::KNearestNeighbors => "knn",
            ModelKind::MultiLayerPerceptron => "mlp",
            ModelKind::GradientBoostedTrees => "gbt",
        }
    }

    /// Whether fitted models of this kind expose intrinsic feature importances.
    pub fn supports_importances(&self) -> bool {
        matches!(self, ModelKind::Ridge | ModelKind::GradientBoostedTrees)
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ridge" => Ok(ModelKind::Ridge),
            "knn" | "k_nearest_neighbors" => Ok(ModelKind::KNearestNeighbors),
            "mlp" | "multi_layer_perceptron" => Ok(ModelKind::MultiLayerPerceptron),
            "gbt" | "gradient_boosted_trees" | "lightgbm" => Ok(ModelKind::GradientBoostedTrees),
            other => Err(Error::Config(format!("unknown model kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Text(String),
    Layers(Vec<usize>),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Float(v) => write!(f, "{v}"),
            ParamValue::Text(v) => f.write_str(v),
            ParamValue::Layers(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
        }
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Float(v)
    }
}

impl From<i64> for ParamValue {
    fn from(v: i64) -> Self {
        ParamValue::Int(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

impl From<Vec<usize>> for ParamValue {
    fn from(v: Vec<usize>) -> Self {
        ParamValue::Layers(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        Self {
            kind,
            params: BTreeMap::new(),
            seed,
        }
    }

    pub fn with(mut self, name: &str, value: impl Into<ParamValue>) -> Self {
        self.params.insert(name.to_string(), value.into());
        self
    }

    /// Compact `name=value` rendering, in key order.
    pub fn describe(&self) -> String {
        let body: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}[{}]", self.kind.name(), body.join(";"))
    }

    pub fn validate(&self) -> Result<()> {
        self.resolve().map(|_| ())
    }

    pub(crate) fn resolve(&self) -> Result<ResolvedParams> {
        let mut p = Params::new(self);
        let resolved = match self.kind {
            ModelKind::Ridge => ResolvedParams::Ridge(RidgeParams {
                alpha: p.float("alpha", 1.0, |v| v >= 0.0)?,
            }),
            ModelKind::KNearestNeighbors => ResolvedParams::Knn(KnnParams {
                k: p.int("k", 5, |v| v >= 1)? as usize,
            }),
            ModelKind::MultiLayerPerceptron => ResolvedParams::Mlp(MlpParams {
                hidden_layer_sizes: p.layers("hidden_layer_sizes", vec![100])?,
                activation: match p.text("activation", "relu")?.as_str() {
                    "relu" => Activation::Relu,
                    "logistic" => Activation::Logistic,
                    other => return Err(Error::Spec(format!("unknown activation `{other}`"))),
                },
                alpha: p.float("alpha", 1e-4, |v| v >= 0.0)?,
                learning_rate_init: p.float("learning_rate_init", 1e-3, |v| v > 0.0)?,
                max_epochs: p.int("max_epochs", 200, |v| v >= 1)? as usize,
                batch_size: p.int("batch_size", 32, |v| v >= 1)? as usize,
            }),
            ModelKind::GradientBoostedTrees => ResolvedParams::Gbt(GbtParams {
                num_leaves: p.int("num_leaves", 31, |v| v >= 2)? as usize,
                learning_rate: p.float("learning_rate", 0.1, |v| v > 0.0)?,
                n_estimators: p.int("n_estimators", 100, |v| v >= 0)? as usize,
                subsample: p.float("subsample", 1.0, |v| v > 0.0 && v <= 1.0)?,
                colsample_bytree: p.float("colsample_bytree", 1.0, |v| v > 0.0 && v <= 1.0)?,
                min_child_samples: p.int("min_child_samples", 20, |v| v >= 1)? as usize,
                max_depth: p.int("max_depth", -1, |v| v == -1 || v >= 1)?,
            }),
        };
        p.finish()?;
        Ok(resolved)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Logistic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeParams {
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnParams {
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub hidden_layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub alpha: f64,
    pub learning_rate_init: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbtParams {
    pub num_leaves: usize,
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub subsample: f64,
    pub colsample_bytree: f64,
    pub min_child_samples: usize,
    /// -1 means unlimited.
    pub max_depth: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum ResolvedParams {
    Ridge(RidgeParams),
    Knn(KnnParams),
    Mlp(MlpParams),
    Gbt(GbtParams),
}

macro_rules! defaults_from_schema {
    ($($ty:ident => $kind:ident / $variant:ident),*) => {$(
        impl Default for $ty {
            fn default() -> Self {
                match ModelSpec::new(ModelKind::$kind, 0).resolve() {
                    Ok(ResolvedParams::$variant(p)) => p,
                    _ => unreachable!("empty spec resolves to defaults"),
                }
            }
        }
    )*};
}

defaults_from_schema!(
    RidgeParams => Ridge / Ridge,
    KnnParams => KNearestNeighbors / Knn,
    MlpParams => MultiLayerPerceptron / Mlp,
    GbtParams => GradientBoostedTrees / Gbt
);

/// Schema reader that tracks which keys were consumed so unknown names are reported.
struct Params<'a> {
    spec: &'a ModelSpec,
    seen: Vec<&'static str>,
}

impl<'a> Params<'a> {
    fn new(spec: &'a ModelSpec) -> Self {
        Self { spec, seen: Vec::new() }
    }

    fn get(&mut self, name: &'static str) -> Option<&'a ParamValue> {
        self.seen.push(name);
        self.spec.params.get(name)
    }

    fn float(&mut self, name: &'static str, default: f64, ok: impl Fn(f64) -> bool) -> Result<f64> {
        let v = match self.get(name) {
            None => default,
            Some(ParamValue::Float(v)) => *v,
            Some(ParamValue::Int(v)) => *v as f64,
            Some(other) => return Err(type_error(name, "a number", other)),
        };
        if !v.is_finite() || !ok(v) {
            return Err(Error::Spec(format!("{name}={v} is out of range")));
        }
        Ok(v)
    }

    fn int(&mut self, name: &'static str, default: i64, ok: impl Fn(i64) -> bool) -> Result<i64> {
        let v = match self.get(name) {
            None => default,
            Some(ParamValue::Int(v)) => *v,
            Some(other) => return Err(type_error(name, "an integer", other)),
        };
        if !ok(v) {
            return Err(Error::Spec(format!("{name}={v} is out of range")));
        }
        Ok(v)
    }

    fn text(&mut self, name: &'static str, default: &str) -> Result<String> {
        match self.get(name) {
            None => Ok(default.to_string()),
            Some(ParamValue::Text(v)) => Ok(v.clone()),
            Some(other) => Err(type_error(name, "a string", other)),
        }
    }

    fn layers(&mut self, name: &'static str, default: Vec<usize>) -> Result<Vec<usize>> {
        let v = match self.get(name) {
            None => default,
            Some(ParamValue::Layers(v)) => v.clone(),
            Some(ParamValue::Int(v)) if *v >= 1 => vec![*v as usize],
            Some(other) => return Err(type_error(name, "a list of layer sizes", other)),
        };
        if v.contains(&0) {
            return Err(Error::Spec(format!("{name} contains an empty layer")));
        }
        Ok(v)
    }

    fn finish(self) -> Result<()> {
        match self.spec.params.keys().find(|k| !self.seen.contains(&k.as_str())) {
            Some(unknown) => Err(Error::Spec(format!(
                "unknown hyperparameter `{unknown}` for {}",
                self.spec.kind.name()
            ))),
            None => Ok(()),
        }
    }
}

fn type_error(name: &str, expected: &str, got: &ParamValue) -> Error {
    Error::Spec(format!("{name} must be {expected}, got `{got}`"))
}

/// Candidate specs of a single kind, in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperparameterGrid {
    candidates: Vec<ModelSpec>,
}

impl HyperparameterGrid {
    pub fn new(candidates: Vec<ModelSpec>) -> Result<Self> {
        let first = candidates
            .first()
            .ok_or_else(|| Error::Config("hyperparameter grid is empty".into()))?;
        if candidates.iter().any(|c| c.kind != first.kind) {
            return Err(Error::Config("grid mixes model kinds".into()));
        }
        for c in &candidates {
            c.validate()?;
        }
        Ok(Self { candidates })
    }

    /// Cartesian product of the per-parameter lists. The last axis varies fastest.
    pub fn cartesian(kind: ModelKind, axes: &[(&str, Vec<ParamValue>)], seed: u64) -> Result<Self> {
        let mut specs = vec![ModelSpec::new(kind, seed)];
        for (name, values) in axes {
            if values.is_empty() {
                return Err(Error::Config(format!("grid axis `{name}` is empty")));
            }
            specs = specs
                .into_iter()
                .flat_map(|s| values.iter().map(move |v| s.clone().with(name, v.clone())))
                .collect();
        }
        Self::new(specs)
    }

    /// 48-point MLP search space: hidden sizes, activation, alpha, initial learning rate.
    pub fn mlp_default(seed: u64) -> Self {
        Self::cartesian(
            ModelKind::MultiLayerPerceptron,
            &[
                (
                    "hidden_layer_sizes",
                    vec![vec![20].into(), vec![40].into(), vec![10].into(), vec![20, 10].into()],
                ),
                ("activation", vec!["relu".into(), "logistic".into()]),
                ("alpha", vec![1e-4.into(), 1e-3.into(), 1e-2.into()]),
                ("learning_rate_init", vec![1e-3.into(), 1e-2.into()]),
            ],
            seed,
        )
        .expect("static grid is valid")
    }

    /// 96-point boosted-tree search space mirroring the LightGBM grid.
    pub fn gbt_default(seed: u64) -> Self {
        Self::cartesian(
            ModelKind::GradientBoostedTrees,
            &[
                ("num_leaves", vec![7i64.into(), 15i64.into()]),
                ("learning_rate", vec![0.01.into(), 0.025.into(), 0.05.into()]),
                ("n_estimators", vec![10i64.into(), 20i64.into()]),
                ("subsample", vec![0.6.into(), 0.8.into()]),
                ("colsample_bytree", vec![0.6.into(), 0.8.into()]),
                ("min_child_samples", vec![5i64.into(), 10i64.into()]),
            ],
            seed,
        )
        .expect("static grid is valid")
    }

    pub fn default_for(kind: ModelKind, seed: u64) -> Self {
        match kind {
            ModelKind::MultiLayerPerceptron => Self::mlp_default(seed),
            ModelKind::GradientBoostedTrees => Self::gbt_default(seed),
            ModelKind::Ridge => Self::cartesian(
                kind,
                &[("alpha", vec![0.01.into(), 0.1.into(), 1.0.into(), 10.0.into()])],
                seed,
            )
            .expect("static grid is valid"),
            ModelKind::KNearestNeighbors => Self::cartesian(
                kind,
                &[("k", vec![1i64.into(), 3i64.into(), 5i64.into(), 9i64.into()])],
                seed,
            )
            .expect("static grid is valid"),
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.candidates[0].kind
    }

    pub fn candidates(&self) -> &[ModelSpec] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grids_have_expected_sizes() {
        assert_eq!(HyperparameterGrid::mlp_default(0).len(), 4 * 2 * 3 * 2);
        assert_eq!(HyperparameterGrid::gbt_default(0).len(), 2 * 3 * 2 * 2 * 2 * 2);
    }

    #[test]
    fn schema_rejects_unknown_and_mistyped() {
        let bad = ModelSpec::new(ModelKind::Ridge, 0).with("lambda", 1.0);
        assert!(matches!(bad.validate(), Err(Error::Spec(_))));
        let bad = ModelSpec::new(ModelKind::KNearestNeighbors, 0).with("k", "three");
        assert!(matches!(bad.validate(), Err(Error::Spec(_))));
        let bad = ModelSpec::new(ModelKind::GradientBoostedTrees, 0).with("subsample", 1.5);
        assert!(bad.validate().is_err());
        let bad = ModelSpec::new(ModelKind::MultiLayerPerceptron, 0).with("activation", "tanh");
        assert!(bad.validate().is_err());
    }

    #[test]
    fn grid_rejects_empty_and_mixed() {
        assert!(HyperparameterGrid::new(vec![]).is_err());
        assert!(HyperparameterGrid::new(vec![
            ModelSpec::new(ModelKind::Ridge, 0),
            ModelSpec::new(ModelKind::KNearestNeighbors, 0),
        ])
        .is_err());
    }

    #[test]
    fn cartesian_order_last_axis_fastest() {
        let g = HyperparameterGrid::cartesian(
            ModelKind::KNearestNeighbors,
            &[("k", vec![1i64.into(), 2i64.into()])],
            3,
        )
        .unwrap();
        assert_eq!(g.candidates()[0].params["k"], ParamValue::Int(1));
        assert_eq!(g.candidates()[1].seed, 3);
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let spec = ModelSpec::new(ModelKind::MultiLayerPerceptron, 9)
            .with("hidden_layer_sizes", vec![20usize, 10])
            .with("alpha", 0.01)
            .with("activation", "logistic");
        let text = toml::to_string(&spec).unwrap();
        let back: ModelSpec = toml::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}
