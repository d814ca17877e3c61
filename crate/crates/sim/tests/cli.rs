use std::process::Command;

fn rdars() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rdars"))
}

#[test]
fn invalid_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "a = 0\n").unwrap();
    let out = rdars()
        .args(["run", "--experiment", "power", "--preset", "desk", "--trials", "1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains('a'));
}

#[test]
fn small_run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let status = rdars()
        .args(["run", "--experiment", "power", "--preset", "desk", "--trials", "1", "--grid", "20", "--schemes", "rdars-isac"])
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let records = std::fs::read_to_string(out_dir.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 2);
    for f in ["summary.json", "timing.csv", "failures.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
}
