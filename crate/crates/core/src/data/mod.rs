//! Dataset sources, the four-way split, and train-fitted standardization.

mod csv_source;
mod split;
mod standardize;
mod synthetic;

pub use csv_source::{load_csv, TargetColumn};
pub use split::{split, SplitBundle, SplitSpec};
pub use standardize::{standardize, Standardizer};
pub use synthetic::{generate_synthetic, synthetic_target, SyntheticSpec};
