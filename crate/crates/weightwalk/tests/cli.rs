use std::path::Path;
use std::process::{Command, Output};

fn weightwalk(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weightwalk"))
        .args(args)
        .current_dir(cwd)
        .env("WEIGHTWALK_OFFLINE", "1")
        .output()
        .unwrap()
}

fn ok_json(out: Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_json(out: Output) -> serde_json::Value {
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).unwrap()
}

const SMALL_TRAIN: [&str; 4] = ["--dim", "8", "--epochs", "1"];

#[test]
fn generate_walk_embed_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let g = ok_json(weightwalk(
        &["generate", "--model", "er", "--nodes", "64", "--avg-degree", "6", "--weights", "uniform", "--seed", "7", "--out", "g.tsv"],
        d,
    ));
    assert_eq!(g["nodes"], 64);
    assert!(d.join("g.tsv").exists());

    let w = ok_json(weightwalk(
        &["walk", "--graph", "g.tsv", "--kernel", "srw", "--walks-per-node", "2", "--walk-length", "10", "--out", "c.txt"],
        d,
    ));
    assert_eq!(w["walks"], 128);

    let mut args = vec!["embed", "--corpus", "c.txt", "--out", "e.csv"];
    args.extend(SMALL_TRAIN);
    let e = ok_json(weightwalk(&args, d));
    assert_eq!(e["dim"], 8);
    let header = std::fs::read_to_string(d.join("e.csv")).unwrap();
    assert!(header.starts_with("node_id,dim_0,dim_1,"));

    let mut args = vec![
        "run", "--graph", "g.tsv", "--kernel", "WRW", "--walks-per-node", "2", "--walk-length", "10",
        "--seed", "3", "--deterministic", "--pairs-out", "pairs.csv",
    ];
    args.extend(SMALL_TRAIN);
    let a = ok_json(weightwalk(&args, d));
    let b = ok_json(weightwalk(&args, d));
    assert_eq!(a["pearson_r"], b["pearson_r"]);
    assert!(a["pearson_r"].is_f64());
    assert_eq!(a["n_pairs"], g["edges"]);
    assert_eq!(a["source"]["duplicate_policy"], "sum");
    let pairs = std::fs::read_to_string(d.join("pairs.csv")).unwrap();
    assert_eq!(pairs.lines().count() as u64, g["edges"].as_u64().unwrap() + 1);
}

#[test]
fn sweep_from_config_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("cfg.json"),
        r#"{
          "schema": 1, "model": "sbm", "varied": "graph_size", "grid": [30, 40],
          "fixed": {"avg_degree": 6}, "instances": 2, "kernels": ["RW", "WRW"],
          "walk": {"walks_per_node": 2, "walk_length": 10},
          "train": {"dim": 8, "epochs": 1},
          "output": "out/sweep.csv"
        }"#,
    )
    .unwrap();
    let s = ok_json(weightwalk(&["sweep", "--config", "cfg.json", "--seed", "5", "--workers", "2"], d));
    assert_eq!(s["rows"], 8);
    assert_eq!(s["failed_rows"], 0);
    let csv = std::fs::read_to_string(d.join("out/sweep.csv")).unwrap();
    assert!(csv.starts_with("model,varied,cell_value,kernel,weight_mode,instance,seed,pearson_r,n_pairs,wall_ms"));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("out/sweep.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 5);
    assert!(d.join("out/sweep.summary.csv").exists());

    ok_json(weightwalk(&["plot", "--input", "out/sweep.csv", "--out", "fig.svg"], d));
    assert!(std::fs::read_to_string(d.join("fig.svg")).unwrap().contains("<polyline"));
}

#[test]
fn threshold_command() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "threshold", "--nodes", "20", "--features", "4", "--grid", "0,0.5", "--instances", "1",
        "--walks-per-node", "2", "--walk-length", "10", "--out", "t.csv",
    ];
    args.extend(SMALL_TRAIN);
    let t = ok_json(weightwalk(&args, dir.path()));
    assert_eq!(t["rows"], 2);
}

#[test]
fn machine_readable_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let e = error_json(weightwalk(&["fetch", "karate", "--cache", "c"], d));
    assert_eq!(e["error"]["kind"], "unknown_dataset");
    let e = error_json(weightwalk(&["fetch", "netscience", "--cache", "c"], d));
    assert_eq!(e["error"]["kind"], "network_unavailable");

    std::fs::write(d.join("bad.tsv"), "a\tb\t1\nb\tc\tx\n").unwrap();
    let e = error_json(weightwalk(&["run", "--graph", "bad.tsv"], d));
    assert_eq!(e["error"]["kind"], "parse_error");
    assert!(e["error"]["message"].as_str().unwrap().contains("line 2"));

    std::fs::write(d.join("cfg.json"), r#"{"schema": 1, "model": "er", "varied": "size", "grid": [1]}"#).unwrap();
    let e = error_json(weightwalk(&["sweep", "--config", "cfg.json", "--out", "x.csv"], d));
    assert_eq!(e["error"]["kind"], "config_error");
    assert!(e["error"]["message"].as_str().unwrap().contains("--help"));

    let usage = weightwalk(&["generate"], d);
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn fetch_list_names_all_eleven() {
    let dir = tempfile::tempdir().unwrap();
    let l = ok_json(weightwalk(&["fetch", "--list"], dir.path()));
    assert_eq!(l.as_array().unwrap().len(), 11);
}

#[test]
fn sweep_help_documents_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = weightwalk(&["sweep", "--help"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("schema") && text.contains("walks_per_node"));
}
