use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morawetz-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn run_writes_outputs_and_report_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("zero");
    let out_str = out_dir.to_str().unwrap();
    let out = lab(&["run", "--preset", "zero", "--out", out_str, "--override", "t_max=2"]);
    assert_eq!(code(&out), 0, "{}", text(&out.stderr));
    for f in ["timeseries.csv", "report.toml", "manifest.json"] {
        assert!(out_dir.join(f).is_file(), "missing {f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["t_max"], 2.0);
    assert_eq!(manifest["config"]["preset"], "zero");

    let report = lab(&["report", out_str]);
    assert_eq!(code(&report), 0, "{}", text(&report.stderr));
    assert!(text(&report.stdout).contains("preset            zero"));
}

#[test]
fn config_file_then_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "preset = \"file\"\ndata = \"zero\"\nr_max = 10.0\nn = 201\nt_max = 1.0\nradii = [1.0, 2.0]\n").unwrap();
    let out_dir = dir.path().join("o");
    let out = lab(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--override",
        "n=101",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", text(&out.stderr));
    let report = fs::read_to_string(out_dir.join("report.toml")).unwrap();
    let manifest = fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(m["config"]["n"], 101);
    assert_eq!(m["config"]["r_max"], 10.0);
    assert!(!report.is_empty());
}

#[test]
fn invalid_input_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["run", "--preset", "zero", "--override", "p=6", "--out", out],
        vec!["run", "--preset", "zero", "--override", "no_such_key=1", "--out", out],
        vec!["run", "--preset", "no-such-preset", "--out", out],
        vec!["run", "--preset", "zero", "--override", "cfl=1.5", "--out", out],
        vec!["run", "--preset", "morawetz", "--override", "r_max=10", "--out", out],
    ] {
        let res = lab(&args);
        assert_eq!(code(&res), 2, "{args:?}: {}", text(&res.stderr));
        assert!(text(&res.stderr).starts_with("error:"));
    }
}

#[test]
fn missing_files_exit_with_code_4() {
    let res = lab(&["run", "--config", "/nonexistent/run.toml"]);
    assert_eq!(code(&res), 4);
    let res = lab(&["report", "/nonexistent/dir"]);
    assert_eq!(code(&res), 4);
}

#[test]
fn sweep_file_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("sweep.toml");
    fs::write(
        &file,
        "[base]\ndata = \"zero\"\nr_max = 10.0\nn = 201\nt_max = 1.0\nradii = [1.0, 2.0]\n\n\
         [[runs]]\np = 3.2\n\n[[runs]]\np = 4.8\n\n[[runs]]\np = 6.0\n",
    )
    .unwrap();
    let out_dir = dir.path().join("sweep");
    let res = lab(&["sweep", "--config", file.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&res), 0, "{}", text(&res.stderr));
    assert!(text(&res.stdout).contains("3 runs, 1 failed"));

    let mut reader = csv::Reader::from_path(out_dir.join("sweep.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[0][col("kappa_critical_exact")], "27/31");
    assert_eq!(&rows[1][col("kappa_critical_exact")], "1/13");
    assert!(rows[0][col("error")].is_empty());
    assert!(!rows[2][col("error")].is_empty());
    assert!(Path::new(&out_dir.join("run_0/manifest.json")).is_file());
    assert!(!out_dir.join("run_2").exists());
}

#[test]
fn convergence_subcommand_writes_its_table() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("conv");
    let res = lab(&[
        "convergence",
        "--preset",
        "linear-oracle",
        "--override",
        "n=201",
        "--override",
        "t_max=4",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "{}", text(&res.stderr));
    assert!(out_dir.join("convergence.toml").is_file());
    assert!(text(&res.stdout).contains("oracle_error"));
}
