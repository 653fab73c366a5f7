use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tec"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn csv_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(str::to_string)
        .collect()
}

#[test]
fn gain_writes_one_row_per_frequency_and_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = tec(
        dir.path(),
        &["gain", "--path", "ss,mm", "--freq", "1e5:1e6:5", "--plot"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv_rows(&dir.path().join("gain.csv"));
    assert_eq!(rows.len(), 10);
    assert!(rows
        .iter()
        .all(|r| r.contains(",S-S,") || r.contains(",M-M,")));
    assert!(dir.path().join("gain.svg").exists());
    let meta = fs::read_to_string(dir.path().join("gain.config.toml")).unwrap();
    assert!(meta.contains("start_hz"));
}

#[test]
fn sweep_reports_in_millimetres() {
    let dir = tempfile::tempdir().unwrap();
    let out = tec(
        dir.path(),
        &["sweep", "--sweep", "d_mm=20:100:5", "--path", "ss"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv_rows(&dir.path().join("sweep_d.csv"));
    assert_eq!(rows.len(), 5);
    assert!(rows[0].ends_with(",d_mm,20"));
    assert!(rows[4].ends_with(",d_mm,100"));
}

#[test]
fn compare_covers_all_placements() {
    let dir = tempfile::tempdir().unwrap();
    let out = tec(dir.path(), &["compare", "--freq", "100000"]);
    assert!(out.status.success());
    let rows = csv_rows(&dir.path().join("compare.csv"));
    assert_eq!(rows.len(), 4);
    for label in ["S-S", "S-M", "M-S", "M-M"] {
        assert!(rows.iter().any(|r| r.contains(&format!(",{label},"))));
    }
}

#[test]
fn failing_safety_verdict_is_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = tec(
        dir.path(),
        &[
            "safety",
            "--path",
            "ss",
            "--freq",
            "100000",
            "--set",
            "safety.drive_current_ma=2",
        ],
    );
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("verdict fail"));
    let json = fs::read_to_string(dir.path().join("safety.json")).unwrap();
    assert!(json.contains("\"verdict\": \"fail\""));
    assert!(json.contains("contact current"));
}

#[test]
fn invalid_input_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &[
            "gain",
            "--set",
            "stack.thickness_mm=[1.0, -7.0, 15.0, 20.0]",
        ][..],
        &["gain", "--set", "geometry.bogus=1"][..],
        &["sweep", "--sweep", "d_mm=100:20:5"][..],
        &["gain", "--freq", "abc"][..],
    ] {
        let out = tec(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}

#[test]
fn repeated_runs_write_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["sweep", "--sweep", "fat_thickness_mm=1:30:7"];
    assert!(tec(a.path(), &args).status.success());
    assert!(tec(b.path(), &args).status.success());
    let read = |d: &Path| fs::read(d.join("sweep_fat_thickness.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}
