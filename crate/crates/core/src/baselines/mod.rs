//! Comparison methods: Pearson and mutual-information filters, and recursive feature elimination.

mod filter;
mod rfe;

pub use filter::{
    discretize, mutual_information, mutual_information_scores, mutual_information_scores_with_bins, pearson_scores,
    select_top_k, FilterMethod, ScoreVector, MI_BINS,
};
pub use rfe::{rfe, RfeConfig, RfeOutcome};
