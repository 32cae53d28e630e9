use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use frugal_core::aslib::write_scenario;
use frugal_core::harness::{collect_logs, ratio_grid};
use frugal_core::synthetic::SyntheticSpec;

fn frugal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frugal"))
        .args(args)
        .env_remove("FRUGAL_SEED")
        .output()
        .unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn fixture(root: &Path) -> PathBuf {
    let dir = root.join("scenario");
    write_scenario(&SyntheticSpec::small(2).generate(), &dir).unwrap();
    dir
}

/// Keeps the runs in these tests short.
fn quick_config(root: &Path) -> PathBuf {
    let p = root.join("quick.conf");
    fs::write(&p, "n_trees = 10\nfolds = 1\nseeds = 1\n").unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn stats_prints_the_labelled_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = fixture(tmp.path());
    let out = frugal(&["stats", s(&dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    for field in ["instances   60", "algorithms  3", "features", "total_h", "vbs_h", "sbs_h"] {
        assert!(stdout.contains(field), "{field} missing from\n{stdout}");
    }
}

#[test]
fn missing_description_is_a_data_error_naming_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = fixture(tmp.path());
    fs::remove_file(dir.join("description.txt")).unwrap();
    let out = frugal(&["stats", s(&dir)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("description.txt"));
}

#[test]
fn malformed_arff_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = fixture(tmp.path());
    let runs = dir.join("algorithm_runs.arff");
    let body = fs::read_to_string(&runs).unwrap();
    fs::write(&runs, format!("{body}broken,row\n")).unwrap();
    let out = frugal(&["stats", s(&dir)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("algorithm_runs.arff"), "{}", text(&out.stderr));
}

#[test]
fn bad_flags_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = fixture(tmp.path());
    let out = frugal(&["run", s(&dir), "--selection", "greedy"]);
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr);
    assert!(err.contains("greedy") && err.contains("Usage:"), "{err}");

    assert_eq!(frugal(&["run", s(&dir), "--folds", "x"]).status.code(), Some(1));
    assert_eq!(frugal(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(frugal(&["--help"]).status.code(), Some(0));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = fixture(tmp.path());
    let conf = tmp.path().join("bad.conf");
    fs::write(&conf, "n_trees = 10\nlearning_rate = 0.1\n").unwrap();
    let out = frugal(&["run", s(&dir), "--config", s(&conf)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("unknown key `learning_rate`"));
}

#[test]
fn exhaustive_random_runs_end_on_the_passive_selector() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = fixture(tmp.path());
    let logs = tmp.path().join("logs");
    let conf = quick_config(tmp.path());
    let out = frugal(&[
        "run",
        s(&dir),
        "--config",
        s(&conf),
        "--selection",
        "random",
        "--timeout-predictor",
        "false",
        "--dynamic-timeout",
        "false",
        "--folds",
        "2",
        "--out",
        s(&logs),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    // the flag beat the file and said so
    assert!(text(&out.stderr).contains("warning: --folds"));
    let stdout = text(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("random fold")).count(), 2);

    let all = collect_logs(&logs).unwrap();
    let mut ends = 0;
    for w in all.windows(2) {
        if w[0].fold != w[1].fold {
            assert_eq!(w[0].perf_ratio, 1.0);
            ends += 1;
        }
    }
    assert_eq!(ends, 1);
    assert_eq!(all.last().unwrap().perf_ratio, 1.0);
    assert!(all.iter().all(|l| l.config == "random"));
}

#[test]
fn full_run_then_summary_then_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = fixture(tmp.path());
    let logs = tmp.path().join("logs");
    let conf = quick_config(tmp.path());
    let out = frugal(&["run", s(&dir), "--config", s(&conf), "--out", s(&logs), "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(text(&out.stdout).lines().filter(|l| l.contains(" fold 0 seed 0: ")).count(), 8);
    let dirs = fs::read_dir(&logs).unwrap().filter(|e| e.as_ref().unwrap().path().is_dir()).count();
    assert_eq!(dirs, 8);

    // a second run finds everything in place
    let again = frugal(&["run", s(&dir), "--config", s(&conf), "--out", s(&logs)]);
    assert_eq!(text(&again.stdout).matches("present, skipped").count(), 8);

    let summary = logs.join("summary.csv");
    let out = frugal(&["summarize", s(&logs)]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let first = fs::read(&summary).unwrap();
    let rows = text(&first).lines().count() - 1;
    assert_eq!(rows, 8 * ratio_grid().len());
    assert_eq!(frugal(&["summarize", s(&logs)]).status.code(), Some(0));
    assert_eq!(fs::read(&summary).unwrap(), first);

    let svg = tmp.path().join("dt.svg");
    let out = frugal(&["plot", s(&summary), "--aggregate-by", "dt", "--out", s(&svg)]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).starts_with("2 series"));
    let drawing = fs::read_to_string(&svg).unwrap();
    assert!(drawing.starts_with("<svg") || drawing.starts_with("<?xml"));
    assert_eq!(drawing.matches("<polyline").count(), 2);

    let out = frugal(&["plot", s(&summary), "--aggregate-by", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn base_seed_from_the_environment_changes_the_split() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = fixture(tmp.path());
    let conf = quick_config(tmp.path());
    let run = |seed: Option<&str>, out: &Path| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_frugal"));
        cmd.args(["run", s(&dir), "--config", s(&conf), "--configs", "random", "--out", s(out)]);
        match seed {
            Some(v) => cmd.env("FRUGAL_SEED", v),
            None => cmd.env_remove("FRUGAL_SEED"),
        };
        let o = cmd.output().unwrap();
        (o.status.code(), fs::read(out.join("random/fold0_seed0.csv")).ok())
    };
    let (code, a) = run(Some("7"), &tmp.path().join("a"));
    assert_eq!(code, Some(0));
    let (_, b) = run(Some("7"), &tmp.path().join("b"));
    let (_, c) = run(None, &tmp.path().join("c"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(run(Some("seven"), &tmp.path().join("d")).0, Some(1));
}

#[test]
fn empty_inputs_are_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(frugal(&["summarize", s(&empty)]).status.code(), Some(2));

    let summary = tmp.path().join("summary.csv");
    fs::write(
        &summary,
        "config,ratio,mean_cost_frac,stderr_cost_frac,mean_data_frac,stderr_data_frac,n_runs\n",
    )
    .unwrap();
    let svg = tmp.path().join("x.svg");
    assert_eq!(frugal(&["plot", s(&summary), "--out", s(&svg)]).status.code(), Some(2));
    assert!(!svg.exists());
}

#[test]
fn csp2010_statistics_when_available() {
    let dir = match std::env::var("FRUGAL_CSP2010_DIR") {
        Ok(p) => PathBuf::from(p),
        Err(_) => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/CSP-2010"),
    };
    if !dir.is_dir() {
        eprintln!("CSP-2010 not present, skipping");
        return;
    }
    let out = frugal(&["stats", s(&dir)]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = text(&out.stdout);
    let field = |name: &str| -> f64 {
        stdout
            .lines()
            .find_map(|l| l.strip_prefix(name))
            .unwrap()
            .trim()
            .parse()
            .unwrap()
    };
    assert_eq!(field("instances"), 2024.0);
    assert_eq!(field("algorithms"), 2.0);
    assert_eq!(field("features"), 86.0);
    assert!((field("total_h") - 435.0).abs() <= 0.5);
    assert!((field("vbs_h") - 49.0).abs() <= 0.5);
    assert!((field("sbs_h") - 82.0).abs() <= 0.5);
}
