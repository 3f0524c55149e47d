//! End-to-end runs through the file-based entry point.

mod common;

use std::fs;

use kgraph_core::metrics::ari;
use kgraph_core::pipeline::{
    run, PipelineError, RunArtifact, RunConfig, ARTIFACT_FILE, TIMINGS_FILE,
};
use kgraph_core::series::DatasetFormat;
use kgraph_core::Error;

fn write_fixture(dir: &std::path::Path) -> std::path::PathBuf {
    let ds = common::sine_square(8, 96, 0.1, 2);
    let path = dir.join("sines.tsv");
    ds.write_ucr_tsv(fs::File::create(&path).unwrap()).unwrap();
    path
}

#[test]
fn run_writes_valid_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_fixture(dir.path());
    let mut cfg = RunConfig::new(&data, 2, dir.path().join("out"));
    cfg.num_lengths = 5;
    cfg.export_features = true;
    let out = run(&cfg).unwrap();

    let bytes = fs::read(cfg.out.join(ARTIFACT_FILE)).unwrap();
    let art = RunArtifact::from_json(&bytes).unwrap();
    assert_eq!(art, out.artifact);
    art.validate().unwrap();
    assert_eq!(art.candidate_lengths.len(), 5);
    assert_eq!(art.graphoids.len(), 3 * art.k);
    let truth = art.dataset.true_labels.clone().unwrap();
    let kg = art.metrics.kgraph.unwrap();
    assert_eq!(kg.ari, ari(&art.final_labels, &truth).unwrap());
    assert!(kg.ari >= 0.9);

    let timings: serde_json::Value =
        serde_json::from_slice(&fs::read(cfg.out.join(TIMINGS_FILE)).unwrap()).unwrap();
    assert!(timings["total_ms"].as_f64().unwrap() >= 0.0);
    for l in &art.candidate_lengths {
        let csv = fs::read_to_string(cfg.out.join(format!("features_l{l}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 17);
        assert!(csv.starts_with("series,node:0"));
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_fixture(dir.path());
    let cfg = RunConfig::new(&data, 2, dir.path().join("out"));
    run(&cfg).unwrap();
    let first = fs::read(cfg.out.join(ARTIFACT_FILE)).unwrap();
    run(&cfg).unwrap();
    assert_eq!(first, fs::read(cfg.out.join(ARTIFACT_FILE)).unwrap());
}

#[test]
fn k_above_series_count_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_fixture(dir.path());
    let err = run(&RunConfig::new(&data, 17, dir.path().join("out"))).unwrap_err();
    assert!(err.is_config(), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn bad_thresholds_are_config_errors() {
    let mut cfg = RunConfig::new("x.tsv", 2, "out");
    cfg.gamma = 1.5;
    assert!(run(&cfg).unwrap_err().is_config());
    cfg.gamma = 0.8;
    cfg.num_lengths = 0;
    assert!(run(&cfg).unwrap_err().is_config());
}

#[test]
fn nan_in_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.tsv");
    fs::write(&data, "0\t1\t2\t3\n1\t1\tNaN\t3\n").unwrap();
    let err = run(&RunConfig::new(&data, 2, dir.path().join("out"))).unwrap_err();
    match err {
        PipelineError::Stage {
            source: Error::NonFinite { line, .. },
            ..
        } => assert_eq!(line, 2),
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn short_series_fail_at_lengths_stage() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("short.tsv");
    fs::write(&data, "0\t1\t2\t3\t4\n1\t4\t3\t2\t1\n").unwrap();
    let err = run(&RunConfig::new(&data, 2, dir.path().join("out"))).unwrap_err();
    assert!(!err.is_config());
    assert!(err.to_string().starts_with("[lengths]"), "{err}");
}

#[test]
fn csv_input_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let ds = common::sine_square(4, 64, 0.1, 5);
    let mut text = String::from("label");
    for t in 0..64 {
        text.push_str(&format!(",t{t}"));
    }
    text.push('\n');
    for (s, l) in ds.series.iter().zip(ds.true_labels.as_ref().unwrap()) {
        let vals: Vec<String> = s.values.iter().map(f64::to_string).collect();
        text.push_str(&format!("{l},{}\n", vals.join(",")));
    }
    let data = dir.path().join("d.csv");
    fs::write(&data, text).unwrap();
    let mut cfg = RunConfig::new(&data, 2, dir.path().join("out"));
    cfg.format = DatasetFormat::Csv;
    cfg.num_lengths = 3;
    let art = run(&cfg).unwrap().artifact;
    assert_eq!(art.dataset.series.len(), 8);
    assert_eq!(art.dataset.name, "d");
}
