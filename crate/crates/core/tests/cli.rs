use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use meshsmith::cli::{BenchRow, EXIT_DATA, EXIT_OK, EXIT_USAGE};
use meshsmith::dataset::MANIFEST_FILE;
use meshsmith::quality::HISTOGRAM_BINS;
use tempfile::TempDir;

fn meshsmith(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meshsmith"))
        .args(args)
        .env_remove("MESHSMITH_SEED")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = meshsmith(args);
    assert_eq!(
        out.status.code(),
        Some(EXIT_OK),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_dataset(dir: &TempDir) -> PathBuf {
    let data = dir.path().join("data");
    ok(&[
        "generate",
        "--out",
        s(&data),
        "--count",
        "5",
        "--min-nodes",
        "60",
        "--max-nodes",
        "100",
        "--seed",
        "3",
    ]);
    data
}

#[test]
fn generate_writes_manifest_and_meshes() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir);
    let manifest = std::fs::read_to_string(data.join(MANIFEST_FILE)).unwrap();
    assert!(manifest.contains("meshsmith-dataset-v1"));
    let meshes = std::fs::read_dir(&data)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "m2d"))
        .count();
    assert_eq!(meshes, 5);
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(meshsmith(&["frobnicate"]).status.code(), Some(EXIT_USAGE));
}

#[test]
fn unknown_algorithm_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir);
    let out = meshsmith(&[
        "smooth",
        "--mesh",
        s(&data.join("train_000.m2d")),
        "--algo",
        "magic",
        "--out",
        "x.m2d",
    ]);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
}

#[test]
fn gmsnet_without_model_names_the_flag() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir);
    let out = meshsmith(&[
        "bench",
        "--mesh",
        s(&data.join("train_000.m2d")),
        "--algo",
        "gmsnet",
    ]);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--model"));
}

#[test]
fn missing_mesh_is_data_error() {
    let out = meshsmith(&["report", "--mesh", "/nonexistent/mesh.m2d"]);
    assert_eq!(out.status.code(), Some(EXIT_DATA));
}

#[test]
fn smoothing_improves_reported_quality() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir);
    let mesh = data.join("train_000.m2d");
    let smoothed = dir.path().join("smoothed.m2d");
    ok(&[
        "smooth",
        "--mesh",
        s(&mesh),
        "--algo",
        "laplacian",
        "--out",
        s(&smoothed),
    ]);
    let row = |p: &Path| {
        let out = ok(&["report", "--mesh", s(p), "--summary"]);
        out.lines().find_map(BenchRow::parse_csv).unwrap()
    };
    let before = row(&mesh);
    let after = row(&smoothed);
    assert_eq!(before.algo, "origin");
    assert!(after.weighted_quality > before.weighted_quality);
}

#[test]
fn report_prints_histogram() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir);
    let out = ok(&["report", "--mesh", s(&data.join("train_000.m2d"))]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("bin,f_lo,f_hi,count"));
    assert_eq!(lines.count(), HISTOGRAM_BINS);
}

#[test]
fn bench_reports_origin_and_algorithm() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir);
    let out = ok(&[
        "bench",
        "--mesh",
        s(&data.join("train_000.m2d")),
        s(&data.join("train_001.m2d")),
        "--algo",
        "angle",
        "--runs",
        "2",
        "--origin",
    ]);
    let rows: Vec<BenchRow> = out.lines().filter_map(BenchRow::parse_csv).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows.iter().filter(|r| r.algo == "origin").count(), 2);
}

#[test]
fn render_writes_svg() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir);
    let svg = dir.path().join("mesh.svg");
    ok(&[
        "render",
        "--mesh",
        s(&data.join("train_000.m2d")),
        "--out",
        s(&svg),
    ]);
    let text = std::fs::read_to_string(svg).unwrap();
    assert!(text.starts_with("<svg") || text.starts_with("<?xml"));
    assert!(text.contains("<polygon"));
}

#[test]
fn train_and_smooth_with_both_models() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir);
    let manifest = data.join(MANIFEST_FILE);
    let gms = dir.path().join("gms.json");
    ok(&[
        "train",
        "--dataset",
        s(&manifest),
        "--epochs",
        "2",
        "--hidden",
        "8",
        "--out",
        s(&gms),
    ]);
    let trace = std::fs::read_to_string(gms.with_extension("trace.csv")).unwrap();
    assert_eq!(
        trace.lines().next(),
        Some("epoch,train_loss,val_loss,lr,truncations")
    );
    assert_eq!(trace.lines().count(), 3);
    let nn = dir.path().join("nn.json");
    ok(&[
        "train",
        "--dataset",
        s(&manifest),
        "--arch",
        "nn",
        "--epochs",
        "2",
        "--out",
        s(&nn),
    ]);
    let mesh = data.join("test_000.m2d");
    for (algo, model) in [("gmsnet", &gms), ("nn", &nn)] {
        let out = dir.path().join(format!("{algo}.m2d"));
        ok(&[
            "smooth",
            "--mesh",
            s(&mesh),
            "--algo",
            algo,
            "--model",
            s(model),
            "--sweeps",
            "3",
            "--out",
            s(&out),
        ]);
        assert!(out.exists());
    }
}
