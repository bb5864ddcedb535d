use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::experiment::{ExperimentReport, TraceRun};
use crate::error::{Error, Result};
use crate::selectors::SelectionTrace;

/// Regression losses are shown in units of 1e-4 in the markdown table.
pub const REGRESSION_DISPLAY_SCALE: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// `report.csv` body. Losses are written unscaled with full precision.
pub fn report_csv(report: &ExperimentReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "n_selected", "hyperparameter", "val_loss", "test_loss"])
        .expect("in-memory write");
    for row in &report.rows {
        let hyper = match (&row.hyperparameter, &row.note) {
            (Some(h), _) => h.to_string(),
            (None, Some(_)) => "skipped".to_string(),
            (None, None) => String::new(),
        };
        w.write_record([
            row.method.name().to_string(),
            opt(row.n_selected),
            hyper,
            opt(row.val_loss),
            opt(row.test_loss),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

/// `report.md` body. Every row tied for the lowest test loss is bold.
pub fn report_markdown(report: &ExperimentReport) -> String {
    let meta = &report.metadata;
    let regression = !meta.task.is_classification();
    let scale = if regression { REGRESSION_DISPLAY_SCALE } else { 1.0 };
    let unit = if regression {
        format!("{} (×1e-4)", meta.loss)
    } else {
        meta.loss.to_string()
    };
    let best = report
        .rows
        .iter()
        .filter_map(|r| r.test_loss)
        .filter(|v| !v.is_nan())
        .fold(f64::INFINITY, f64::min);

    let mut out = String::new();
    let _ = writeln!(out, "# Feature selection report\n");
    let _ = writeln!(
        out,
        "N = {}, M = {}, seed = {}, split = {:?}\n",
        meta.n_samples, meta.n_features, meta.seed, meta.split_sizes
    );
    let _ = writeln!(
        out,
        "| Method | Selected | Hyperparameter | Validation {unit} | Test {unit} |"
    );
    let _ = writeln!(out, "|---|---:|---|---:|---:|");
    for row in &report.rows {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{:.4}", v * scale));
        let mut test = fmt(row.test_loss);
        if row.test_loss == Some(best) {
            test = format!("**{test}**");
        }
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            row.method.label(),
            row.n_selected.map_or("-".to_string(), |n| n.to_string()),
            row.hyperparameter.map_or("-".to_string(), |h| h.to_string()),
            fmt(row.val_loss),
            test
        );
    }
    let notes: Vec<String> = report
        .rows
        .iter()
        .filter_map(|r| r.note.as_ref().map(|n| format!("- {}: {n}", r.method.label())))
        .collect();
    if !notes.is_empty() {
        let _ = writeln!(out, "\n{}", notes.join("\n"));
    }
    out
}

/// Writes the requested report files plus `metadata.json`; returns the paths written.
///
/// Run timing lives only in the metadata file, so report files are byte-stable across reruns.
pub fn export_report(report: &ExperimentReport, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    for format in formats {
        written.push(match format {
            ReportFormat::Csv => write(dir.join("report.csv"), &report_csv(report))?,
            ReportFormat::Markdown => write(dir.join("report.md"), &report_markdown(report))?,
        });
    }
    let meta = serde_json::to_string_pretty(&report.metadata).expect("metadata serializes");
    written.push(write(dir.join("metadata.json"), &meta)?);
    Ok(written)
}

/// Trace CSV body: one row per elimination and a final stop row with an empty index.
pub fn trace_csv(trace: &SelectionTrace) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iteration", "eliminated_index", "loss_min", "remaining_features"])
        .expect("in-memory write");
    for r in &trace.records {
        w.write_record([
            r.iteration.to_string(),
            opt(r.eliminated),
            r.loss_min.to_string(),
            r.remaining.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

fn panel(out: &mut String, x0: f64, title: &str, points: &[(f64, f64)]) {
    const W: f64 = 360.0;
    const H: f64 = 240.0;
    const TOP: f64 = 40.0;
    let (xmin, xmax) = bounds(points.iter().map(|p| p.0));
    let (ymin, ymax) = bounds(points.iter().map(|p| p.1));
    let sx = |x: f64| x0 + (x - xmin) / (xmax - xmin) * W;
    let sy = |y: f64| TOP + H - (y - ymin) / (ymax - ymin) * H;
    let _ = writeln!(
        out,
        r##"<rect x="{x0}" y="{TOP}" width="{W}" height="{H}" fill="none" stroke="#888"/>"##
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{title}</text>"#,
        x0 + W / 2.0,
        TOP - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">iteration</text>"#,
        x0 + W / 2.0,
        TOP + H + 32.0
    );
    for (v, y) in [(ymax, TOP + 4.0), (ymin, TOP + H)] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{y}" text-anchor="end" font-size="10">{}</text>"#,
            x0 - 4.0,
            tick(v)
        );
    }
    for (v, anchor) in [(xmin, "start"), (xmax, "end")] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="{anchor}" font-size="10">{}</text>"#,
            sx(v),
            TOP + H + 14.0,
            tick(v)
        );
    }
    let path: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let _ = writeln!(
        out,
        r##"<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{}"/>"##,
        path.join(" ")
    );
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn tick(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e6 {
        format!("{v}")
    } else {
        format!("{v:.4}")
    }
}

/// Two-panel line chart: remaining features and validation loss against iteration.
pub fn trace_svg(run: &TraceRun) -> String {
    let records = &run.trace.records;
    let mut remaining = vec![(0.0, run.trace.initial_features as f64)];
    remaining.extend(
        records
            .iter()
            .filter(|r| r.eliminated.is_some())
            .map(|r| (r.iteration as f64, r.remaining as f64)),
    );
    let losses: Vec<(f64, f64)> = records.iter().map(|r| (r.iteration as f64, r.loss_min)).collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="880" height="330" viewBox="0 0 880 330">"#
    );
    let _ = writeln!(out, r#"<rect width="880" height="330" fill="white"/>"#);
    panel(
        &mut out,
        60.0,
        &format!("{} {}: remaining features", run.method.label(), run.hyperparameter),
        &remaining,
    );
    panel(
        &mut out,
        500.0,
        &format!("{} {}: validation loss", run.method.label(), run.hyperparameter),
        &losses,
    );
    out.push_str("</svg>\n");
    out
}

/// One CSV and one SVG per selector run, named `<method>_<hyperparameter>`.
pub fn export_traces(traces: &[TraceRun], dir: &Path) -> Result<Vec<PathBuf>> {
    if traces.is_empty() {
        return Err(Error::Config("no selection traces to export".into()));
    }
    ensure_dir(dir)?;
    let mut written = Vec::with_capacity(2 * traces.len());
    for run in traces {
        let stem = run.file_stem();
        written.push(write(dir.join(format!("{stem}.csv")), &trace_csv(&run.trace))?);
        written.push(write(dir.join(format!("{stem}.svg")), &trace_svg(run))?);
    }
    Ok(written)
}
