//! Comma-separated numeric tables with one target column.

use std::collections::HashMap;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};

/// Which column holds the target: a header name or a 0-based position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetColumn {
    Index(usize),
    Name(String),
}

/// Loads a CSV file. For classification the target is label-encoded in order of first
/// appearance and the class count is taken from the file; the `n_classes` in `task` is ignored.
pub fn load_csv(path: impl AsRef<Path>, target: &TargetColumn, task: Task, header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Data(format!("{}: {other:?}", path.display())),
        })?;

    let mut records = reader.records();
    let header_row: Option<Vec<String>> = if header {
        match records.next() {
            Some(r) => Some(
                r.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?
                    .iter()
                    .map(str::to_string)
                    .collect(),
            ),
            None => return Err(Error::Data(format!("{}: empty file", path.display()))),
        }
    } else {
        None
    };

    let mut width = header_row.as_ref().map(Vec::len);
    let mut rows: Vec<Vec<String>> = Vec::new();
    for (i, rec) in records.enumerate() {
        let line = i + 1 + usize::from(header);
        let rec = rec.map_err(|e| Error::Data(format!("{}: line {line}: {e}", path.display())))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        match width {
            Some(w) if w != rec.len() => {
                return Err(Error::Data(format!(
                    "{}: line {line}: expected {w} fields, found {}",
                    path.display(),
                    rec.len()
                )))
            }
            None => width = Some(rec.len()),
            _ => {}
        }
        rows.push(rec.iter().map(str::to_string).collect());
    }
    let width = width.unwrap_or(0);
    if rows.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }

    let target_idx = match target {
        TargetColumn::Index(i) if *i < width => *i,
        TargetColumn::Index(i) => {
            return Err(Error::Data(format!(
                "target column {i} missing (file has {width} columns)"
            )))
        }
        TargetColumn::Name(name) => header_row
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::Data(format!("target column `{name}` not found in header")))?,
    };
    if width < 2 {
        return Err(Error::Data(
            "need at least one feature column besides the target".into(),
        ));
    }

    let n = rows.len();
    let m = width - 1;
    let mut features = Array2::zeros((n, m));
    let mut targets = Array1::zeros(n);
    let mut labels: HashMap<String, usize> = HashMap::new();
    for (i, row) in rows.iter().enumerate() {
        let line = i + 1 + usize::from(header);
        let mut col = 0;
        for (j, cell) in row.iter().enumerate() {
            if j == target_idx {
                continue;
            }
            features[[i, col]] = parse_cell(cell).ok_or_else(|| {
                Error::Data(format!(
                    "{}: line {line}, column {}: `{cell}` is not a number",
                    path.display(),
                    j + 1
                ))
            })?;
            col += 1;
        }
        let cell = &row[target_idx];
        targets[i] = match task {
            Task::Regression => parse_cell(cell).ok_or_else(|| {
                Error::Data(format!(
                    "{}: line {line}: target `{cell}` is not a number",
                    path.display()
                ))
            })?,
            Task::Classification { .. } => {
                let next = labels.len();
                *labels.entry(cell.clone()).or_insert(next) as f64
            }
        };
    }

    let task = match task {
        Task::Regression => Task::Regression,
        Task::Classification { .. } => {
            if labels.len() < 2 {
                return Err(Error::Data(format!(
                    "{}: classification target has a single class",
                    path.display()
                )));
            }
            Task::Classification {
                n_classes: labels.len(),
            }
        }
    };
    let names = header_row.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(j, _)| *j != target_idx)
            .map(|(_, name)| name)
            .collect()
    });
    Dataset::with_names(features, targets, task, names)
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}
