//! End-to-end runs of the `apmqc` binary on small inputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn apmqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apmqc")).args(args).output().unwrap()
}

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Runs the small search and returns the path of the spec it wrote.
fn small_spec(dir: &Path) -> String {
    let spec = path(dir, "small.toml");
    let out = apmqc(&[
        "construct",
        "--config",
        &config("small_search.toml"),
        "--out",
        &spec,
        "--log",
        &path(dir, "log"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    spec
}

#[test]
fn construct_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(dir.path());
    let text = std::fs::read_to_string(&spec).unwrap();
    assert!(text.contains("P = 60") && text.contains("[provenance]"));
    assert!(std::fs::read_to_string(path(dir.path(), "log"))
        .unwrap()
        .contains("backtracks"));

    let summary = path(dir.path(), "summary.json");
    let out = apmqc(&["validate", &spec, "--summary", &summary]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("girth = "));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(json["report"]["n"], 480);
    assert_eq!(json["all_pass"], true);

    let out = apmqc(&["cycles", &spec, "--lengths", "4,6"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("lifted"));
}

#[test]
fn replayed_instance_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let spec = path(dir.path(), "t1.toml");
    let out = apmqc(&[
        "construct",
        "--config",
        &config("reference_replay.toml"),
        "--out",
        &spec,
        "--log",
        &path(dir.path(), "log"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let alist = path(dir.path(), "hz.alist");
    assert_eq!(
        apmqc(&["alist", &spec, "--side", "z", "--out", &alist]).status.code(),
        Some(0)
    );
    let h = qldpc_apm::gf2::read_alist(&std::fs::read_to_string(&alist).unwrap()).unwrap();
    assert_eq!((h.rows(), h.cols()), (2304, 9216));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(apmqc(&["validate", &path(d, "missing.toml")]).status.code(), Some(1));

    std::fs::write(d.join("bad.toml"), "schema_version = 1\nP = [\n").unwrap();
    assert_eq!(apmqc(&["validate", &path(d, "bad.toml")]).status.code(), Some(2));
    assert_eq!(apmqc(&["no-such-command"]).status.code(), Some(2));

    std::fs::write(
        d.join("unit.toml"),
        "schema_version = 1\nP = 8\nJ = 1\nL = 4\nf = [[2, 0], [1, 0]]\ng = [[1, 0], [1, 1]]\n",
    )
    .unwrap();
    assert_eq!(apmqc(&["validate", &path(d, "unit.toml")]).status.code(), Some(3));

    std::fs::write(
        d.join("tight.toml"),
        "schema_version = 1\nP = 5\nJ = 2\nL = 8\ngirth_target = 10\nseed = 1\nmax_backtracks = 3\n\n[table]\nkind = \"gamma\"\nnoncommute = [[0, 2]]\n",
    )
    .unwrap();
    let out = apmqc(&[
        "construct",
        "--config",
        &path(d, "tight.toml"),
        "--out",
        &path(d, "o.toml"),
        "--log",
        &path(d, "log"),
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));

    let out = apmqc(&[
        "construct",
        "--config",
        &config("blocked_p256.toml"),
        "--out",
        &path(d, "o.toml"),
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert!(!d.join("o.toml").exists());
}

#[test]
fn simulation_resumes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let spec = small_spec(d);
    let sim = |name: &str, ps: &str| {
        let cfg = path(d, name);
        std::fs::write(
            &cfg,
            format!("schema_version = 1\np = [{ps}]\nseed = 9\nworkers = 2\n\n[stop]\nmin_error_events = 5\nmax_frames = 40\n"),
        )
        .unwrap();
        cfg
    };
    let first = sim("a.toml", "0.02");
    let both = sim("b.toml", "0.02, 0.05");
    let csv = path(d, "fer.csv");
    let run = |cfg: &str, out: &str| apmqc(&["simulate", "--spec", &spec, "--config", cfg, "--out", out]);

    assert_eq!(run(&first, &csv).status.code(), Some(0));
    let partial = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(partial.lines().count(), 2);
    let out = run(&both, &csv);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("already complete"));
    let resumed = std::fs::read_to_string(&csv).unwrap();
    assert!(resumed.starts_with(&partial));
    assert_eq!(resumed.lines().count(), 3);

    let fresh = path(d, "fresh.csv");
    assert_eq!(run(&both, &fresh).status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&fresh).unwrap(), resumed);
}

#[test]
fn density_evolution_bracket_errors() {
    let out = apmqc(&[
        "de",
        "--model",
        "bsc",
        "--j",
        "3",
        "--l",
        "6",
        "--population",
        "2000",
        "--iterations",
        "50",
        "--bracket",
        "0.2,0.3",
    ]);
    assert_eq!(out.status.code(), Some(3));
}
