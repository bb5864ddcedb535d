//! Experiment orchestration: configuration, the tuning and evaluation protocol, and report export.

mod config;
mod experiment;
mod export;

pub use config::{
    resolve_eta_grid, DatasetSource, ExperimentConfig, LossChoice, Method, ModelSection, SplitSection, TaskKind,
    DEFAULT_ETA_FRACTIONS, DEFAULT_MU_GRID, SYNTHETIC_ETA_GRID,
};
pub use experiment::{run_experiment, ExperimentReport, Hyperparameter, ReportRow, RunMetadata, TraceRun};
pub use export::{
    export_report, export_traces, report_csv, report_markdown, trace_csv, trace_svg, ReportFormat,
    REGRESSION_DISPLAY_SCALE,
};
