use std::fs;

use featmask::harness::{
    export_report, export_traces, report_csv, report_markdown, run_experiment, trace_csv, DatasetSource,
    ExperimentConfig, ExperimentReport, Hyperparameter, LossChoice, Method, ModelSection, ReportFormat, ReportRow,
    RunMetadata,
};
use featmask::models::ModelKind;
use featmask::selectors::StopReason;
use featmask::{Error, Task};

fn small_config(kind: ModelKind, seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(
        DatasetSource::Synthetic {
            n_samples: 120,
            n_features: 12,
            n_informative: 3,
        },
        ModelSection::new(kind),
    );
    c.seed = seed;
    c
}

fn row(method: Method, test: Option<f64>) -> ReportRow {
    ReportRow {
        method,
        n_selected: test.map(|_| 3),
        hyperparameter: test.map(|_| Hyperparameter::Eta(3)),
        val_loss: test.map(|t| t + 1.0),
        test_loss: test,
        selected: vec![0, 1, 2],
        note: None,
    }
}

fn report(task: Task, rows: Vec<ReportRow>) -> ExperimentReport {
    ExperimentReport {
        rows,
        traces: Vec::new(),
        metadata: RunMetadata {
            seed: 1,
            task,
            loss: "mse",
            n_samples: 10,
            n_features: 4,
            split_sizes: [4, 3, 1, 2],
            selection_model: None,
            baseline_model: None,
            test_evaluations: 0,
            started_unix: 0,
            elapsed_seconds: 0.0,
        },
    }
}

#[test]
fn every_method_yields_one_row_and_one_test_read() {
    let r = run_experiment(&small_config(ModelKind::Ridge, 3)).unwrap();
    let methods: Vec<Method> = r.rows.iter().map(|r| r.method).collect();
    assert_eq!(methods, Method::ALL.to_vec());
    assert_eq!(r.metadata.test_evaluations, 6);
    assert_eq!(r.metadata.n_features, 12);
    assert_eq!(r.metadata.split_sizes, [54, 36, 12, 18]);
    assert_eq!(r.row(Method::AllFeatures).unwrap().n_selected, Some(12));
    let flbmo = r.row(Method::Flbmo).unwrap();
    let Some(Hyperparameter::Eta(eta)) = flbmo.hyperparameter else {
        panic!("flbmo validates eta")
    };
    assert_eq!(flbmo.n_selected, Some(eta));
    assert!([2, 3, 6].contains(&eta));
    assert_eq!(r.traces.iter().filter(|t| t.method == Method::Gbmo).count(), 4);
    assert_eq!(r.traces.iter().filter(|t| t.method == Method::Flbmo).count(), 3);
    for t in &r.traces {
        t.trace.check_structure().unwrap();
    }
}

#[test]
fn all_features_only() {
    let mut c = small_config(ModelKind::KNearestNeighbors, 1);
    c.methods = vec![Method::AllFeatures];
    let r = run_experiment(&c).unwrap();
    assert_eq!(r.rows.len(), 1);
    assert_eq!(r.rows[0].n_selected, Some(12));
    assert!(r.traces.is_empty());
    assert!(r.metadata.selection_model.is_none());
    assert_eq!(r.metadata.test_evaluations, 1);
}

#[test]
fn rfe_is_skipped_for_models_without_importances() {
    let mut c = small_config(ModelKind::KNearestNeighbors, 2);
    c.methods = vec![Method::Rfe, Method::Cc];
    let r = run_experiment(&c).unwrap();
    let rfe = r.row(Method::Rfe).unwrap();
    assert!(rfe.is_skipped());
    assert!(rfe.note.as_deref().unwrap().contains("skipped"));
    assert_eq!(r.metadata.test_evaluations, 1);
    let csv = report_csv(&r);
    assert!(csv.lines().nth(1).unwrap().starts_with("rfe,,skipped,,"));
}

#[test]
fn reruns_are_byte_identical() {
    let c = small_config(ModelKind::GradientBoostedTrees, 5);
    let mut c = c;
    c.model.grid = Some(
        [
            ("n_estimators".to_string(), vec![5i64.into()]),
            ("min_child_samples".to_string(), vec![3i64.into(), 6i64.into()]),
        ]
        .into_iter()
        .collect(),
    );
    let a = run_experiment(&c).unwrap();
    let b = run_experiment(&c).unwrap();
    assert_eq!(report_csv(&a), report_csv(&b));
    assert_eq!(report_markdown(&a), report_markdown(&b));
    assert_eq!(a.traces.len(), b.traces.len());
    for (x, y) in a.traces.iter().zip(&b.traces) {
        assert_eq!(trace_csv(&x.trace), trace_csv(&y.trace));
    }
}

#[test]
fn csv_rows_follow_header() {
    let r = report(
        Task::Regression,
        vec![row(Method::Gbmo, Some(0.25)), row(Method::Cc, Some(0.5))],
    );
    let csv = report_csv(&r);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines,
        vec![
            "method,n_selected,hyperparameter,val_loss,test_loss",
            "gbmo,3,eta=3,1.25,0.25",
            "cc,3,eta=3,1.5,0.5"
        ]
    );
}

#[test]
fn markdown_bolds_every_tied_best_row_and_scales_regression() {
    let r = report(
        Task::Regression,
        vec![
            row(Method::Gbmo, Some(0.25)),
            row(Method::Flbmo, Some(0.25)),
            row(Method::Cc, Some(0.5)),
            row(Method::Rfe, None),
        ],
    );
    let md = report_markdown(&r);
    assert_eq!(md.matches("**2500.0000**").count(), 2);
    assert!(md.contains("| 5000.0000 |"));
    let unique = report(
        Task::Classification { n_classes: 2 },
        vec![row(Method::Gbmo, Some(0.25)), row(Method::Cc, Some(0.5))],
    );
    let md = report_markdown(&unique);
    assert_eq!(md.matches("**").count(), 2);
    assert!(md.contains("**0.2500**"));
}

#[test]
fn exports_write_reports_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&small_config(ModelKind::Ridge, 4)).unwrap();
    let written = export_report(&r, dir.path(), &[ReportFormat::Csv, ReportFormat::Markdown]).unwrap();
    assert_eq!(written.len(), 3);
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(dir.path().join("metadata.json").exists());

    let traces = dir.path().join("traces");
    let files = export_traces(&r.traces, &traces).unwrap();
    assert_eq!(files.len(), 2 * r.traces.len());
    for t in &r.traces {
        let body = fs::read_to_string(traces.join(format!("{}.csv", t.file_stem()))).unwrap();
        let rows: Vec<Vec<String>> = body
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect();
        let k = t.trace.eliminations().count();
        assert_eq!(rows.len(), k + 1);
        for (i, r) in rows.iter().take(k).enumerate() {
            assert_eq!(r[3].parse::<usize>().unwrap(), 12 - i - 1);
        }
        assert_eq!(rows[k][1], "");
        let svg = fs::read_to_string(traces.join(format!("{}.svg", t.file_stem()))).unwrap();
        assert!(svg.starts_with("<svg") && svg.matches("<polyline").count() == 2);
    }
    assert!(export_traces(&[], dir.path()).is_err());
}

#[test]
fn errors_carry_stage_and_exit_code() {
    let mut c = small_config(ModelKind::Ridge, 0);
    c.dataset = DatasetSource::Csv {
        path: "/nonexistent/data.csv".into(),
        target: featmask::data::TargetColumn::Index(0),
        task: featmask::harness::TaskKind::Regression,
        header: true,
    };
    let err = run_experiment(&c).unwrap_err();
    assert!(matches!(err, Error::Stage { stage: "load", .. }), "{err}");
    assert_eq!(err.exit_code(), 2);

    let mut c = small_config(ModelKind::Ridge, 0);
    c.loss = LossChoice::LogLoss;
    let err = run_experiment(&c).unwrap_err();
    assert_eq!(err.exit_code(), 1);

    let mut c = small_config(ModelKind::Ridge, 0);
    c.mu_grid.clear();
    assert_eq!(run_experiment(&c).unwrap_err().exit_code(), 1);
}

#[test]
fn classification_csv_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy.csv");
    let mut body = String::from("a,b,c,noise,label\n");
    for i in 0..90 {
        let t = i as f64 / 90.0;
        let label = if (i * 7) % 10 < 5 { "yes" } else { "no" };
        let shift = if label == "yes" { 1.0 } else { -1.0 };
        body += &format!(
            "{},{},{},{},{label}\n",
            shift + t.sin(),
            (t * 13.0).cos(),
            shift * 0.5 + t,
            (i * 31 % 17) as f64
        );
    }
    fs::write(&path, body).unwrap();
    let text = format!(
        "seed = 2\nmethods = [\"all_features\", \"gbmo\", \"mi\"]\n[dataset]\nsource = \"csv\"\npath = \"{}\"\ntarget = \"label\"\ntask = \"classification\"\n[model]\nkind = \"knn\"\n",
        path.display()
    );
    let c = ExperimentConfig::from_toml_str(&text).unwrap();
    let r = run_experiment(&c).unwrap();
    assert_eq!(r.metadata.loss, "log_loss");
    assert_eq!(r.metadata.n_features, 4);
    assert_eq!(r.rows.len(), 3);
    assert!(r.rows.iter().all(|row| row.test_loss.unwrap().is_finite()));
}

#[test]
fn synthetic_loss_trace_has_a_plateau() {
    let mut c = ExperimentConfig::synthetic(0);
    c.methods = vec![Method::Gbmo];
    c.mu_grid = vec![0.05];
    let r = run_experiment(&c).unwrap();
    let trace = &r.traces[0].trace;
    let losses: Vec<f64> = trace.records.iter().map(|r| r.loss_min).collect();
    let min = losses.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(losses[0] > min, "loss should first decrease");
    let longest_flat = losses
        .windows(2)
        .fold((0usize, 0usize), |(best, cur), w| {
            let cur = if w[0] == w[1] { cur + 1 } else { 0 };
            (best.max(cur), cur)
        })
        .0;
    assert!(longest_flat >= 10, "plateau of {longest_flat}");
    assert!(matches!(
        trace.stop,
        StopReason::SlackExceeded | StopReason::FeatureFloor
    ));
}
