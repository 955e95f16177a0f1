//! End-to-end checks of the command-line interface: exit codes, log format
//! and the predicted-region file contract shared with the trainer.

use std::path::Path;
use std::process::{Command, Output};

use regionrrt::dataset::Manifest;
use regionrrt::gridworld::{save_map, GridMap};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regionrrt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_exits_zero() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for sub in ["gen-maps", "gen-dataset", "plan", "eval-region", "bench"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
    assert_eq!(run(&["bench", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["gen-maps", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(run(&["plan", "--iters", "many"]).status.code(), Some(2));

    let o = run(&["plan", "--init", "1,1", "--goal", "5,5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--map"), "{}", stderr(&o));
}

#[test]
fn bad_config_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"family": "rooms", "colour": "blue"}"#).unwrap();
    let o = run(&["gen-maps", "--config", s(&cfg), "--out", s(&dir.path().join("m"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));

    std::fs::write(&cfg, r#"{"command": "bench"}"#).unwrap();
    let o = run(&["gen-maps", "--config", s(&cfg), "--out", s(&dir.path().join("m"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let map = GridMap::from_fn(20, 20, |x, y| (5..10).contains(&x) && (5..10).contains(&y)).unwrap();
    let map_file = dir.path().join("map.png");
    save_map(&map, &map_file).unwrap();
    let trace = dir.path().join("trace.csv");

    // Start inside the obstacle block.
    let o = run(&[
        "plan", "--map", s(&map_file), "--init", "7.5,7.5", "--goal", "15.5,15.5",
        "--out", s(&trace),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));

    // Missing input file.
    let o = run(&[
        "plan", "--map", s(&dir.path().join("absent.png")), "--init", "1.5,1.5",
        "--goal", "15.5,15.5", "--out", s(&trace),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));

    // A valid run succeeds and reports its result on stdout.
    let o = run(&[
        "plan", "--map", s(&map_file), "--init", "1.5,1.5", "--goal", "15.5,15.5",
        "--iters", "2000", "--out", s(&trace),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["success"], serde_json::Value::Bool(true));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("iteration,elapsed_ms,nodes,best_cost,event\n"));
    assert!(dir.path().join("config.resolved.json").exists());
}

#[test]
fn logs_are_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "gen-maps", "--family", "maze", "--count", "2", "--size", "48", "--log-level", "debug",
        "--out", s(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let err = stderr(&o);
    let lines: Vec<&str> = err.lines().collect();
    assert!(!lines.is_empty(), "no log output");
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap_or_else(|e| panic!("{line}: {e}"));
        for key in ["level", "target", "message"] {
            assert!(v.get(key).is_some(), "{line} lacks {key}");
        }
    }
}

/// Predicted regions named `<id>_region_pred.png` are consumed by both
/// `eval-region --pred` and `bench --region-source dir:`.
#[test]
fn predicted_regions_drive_eval_and_bench() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let pred = tmp.path().join("pred");
    let o = run(&[
        "gen-dataset", "--families", "scattered-blocks", "--maps", "2", "--pairs-min", "2",
        "--pairs-max", "2", "--runs", "5", "--size", "64", "--seed", "3", "--out", s(&data),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest = Manifest::read(&data).unwrap();
    assert!(!manifest.records.is_empty());

    // Stand-in predictions: the ground-truth images under the prediction name.
    std::fs::create_dir_all(&pred).unwrap();
    for r in &manifest.records {
        std::fs::copy(data.join(&r.files.region), pred.join(format!("{}_region_pred.png", r.id)))
            .unwrap();
    }

    let eval = tmp.path().join("eval");
    let o = run(&[
        "eval-region", "--data", s(&data), "--pred", s(&pred), "--split", "train", "--out",
        s(&eval),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(eval.join("eval.csv")).unwrap();
    let train = manifest.records.iter().filter(|r| r.split.as_str() == "train").count();
    assert_eq!(csv.lines().count(), train + 1, "{csv}");
    assert!(eval.join("eval.json").exists());

    let bench = tmp.path().join("bench");
    let source = format!("dir:{}", s(&pred));
    let o = run(&[
        "bench", "--problems", s(&data), "--region-source", &source, "--trials", "2", "--iters",
        "5000", "--reference-iters", "5000", "--no-timing", "--out", s(&bench),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["trials.csv", "stats.csv", "references.csv", "curves.jsonl", "config.resolved.json"] {
        assert!(bench.join(f).exists(), "{f} missing");
    }
    let trials = std::fs::read_to_string(bench.join("trials.csv")).unwrap();
    // Two planners, two stages, two trials per problem.
    assert_eq!(trials.lines().count(), 1 + manifest.records.len() * 8);
    assert!(trials.contains("heuristic-rrt-star"));

    // A missing prediction is an error, not a silent fallback.
    let first = &manifest.records[0];
    std::fs::remove_file(pred.join(format!("{}_region_pred.png", first.id))).unwrap();
    let o = run(&[
        "bench", "--problems", s(&data), "--region-source", &source, "--trials", "2", "--iters",
        "5000", "--reference-iters", "5000", "--out", s(&tmp.path().join("bench2")),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("_region_pred.png"), "{}", stderr(&o));
}
