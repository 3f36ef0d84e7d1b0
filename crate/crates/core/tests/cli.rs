use std::fs;
use std::path::Path;

use clap::Parser;
use spinchain::cli::{run, Cli, Command, RunConfig};

const SMALL: &str = "chain_length = 3\nmax_arity = 2\n\n[pipeline]\nmodes = 4\n\n[pipeline.kme]\ngrid_points = 8\n";

fn sh(args: &[&str]) -> i32 {
    run(std::iter::once("spinchain").chain(args.iter().copied()))
}

fn small_config(dir: &Path) -> String {
    let p = dir.join("small.toml");
    fs::write(&p, SMALL).unwrap();
    p.to_str().unwrap().to_string()
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn gen_data_writes_series_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mj.csv");
    assert_eq!(sh(&["gen-data", "mean-jumps", "--out", out.to_str().unwrap()]), 0);
    let text = read(&out);
    assert!(text.starts_with("t,value\n"));
    assert_eq!(text.lines().count(), 5001);
    let meta: serde_json::Value = serde_json::from_str(&read(&dir.path().join("mj.csv.json"))).unwrap();
    assert_eq!(meta["truth"].as_array().unwrap().len(), 49);

    let voices = dir.path().join("voices");
    assert_eq!(sh(&["gen-data", "synthetic-voices", "--out", voices.to_str().unwrap()]), 0);
    assert!(fs::read_dir(&voices).unwrap().count() >= 8);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(sh(&["gen-data", "no-such-kind"]), 2);
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "chain_lenght = 3\n").unwrap();
    assert_eq!(sh(&["changepoint", "--synthetic", "mean-jumps", "--config", bad.to_str().unwrap()]), 2);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let unwritable = blocker.join("out.csv");
    assert_eq!(sh(&["gen-data", "sine-demo", "--out", unwritable.to_str().unwrap()]), 2);

    let short = dir.path().join("short.csv");
    fs::write(&short, "t,value\n0,1.0\n1,2.0\n2,0.5\n").unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("o");
    assert_eq!(sh(&["changepoint", "--input", short.to_str().unwrap(), "--config", &cfg, "--out", out.to_str().unwrap()]), 1);
    assert_eq!(sh(&["changepoint", "--synthetic", "sine-demo", "--config", &cfg]), 2);
    assert_eq!(sh(&["changepoint", "--synthetic", "mean-jumps", "--config", &cfg, "--threads", "0"]), 2);
}

#[test]
fn changepoint_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let threads = if *name == "a" { "1" } else { "2" };
            let code = sh(&["changepoint", "--synthetic", "variance-jumps", "--config", &cfg, "--threads", threads, "--emit-modes", "--out", out.to_str().unwrap()]);
            assert_eq!(code, 0);
            out
        })
        .collect();
    for f in ["windows.csv", "uq.csv", "modes.csv", "roc_spin.csv", "roc_kl.csv", "peaks.json", "summary.json"] {
        assert_eq!(read(&runs[0].join(f)), read(&runs[1].join(f)), "{f}");
    }
    let windows = read(&runs[0].join("windows.csv"));
    let header = windows.lines().next().unwrap();
    assert!(header.starts_with("# config_sha256="));
    assert!(header.ends_with("T=12 L=3 K_max=2"));
    assert_eq!(windows.lines().count(), 2 + 197);
    let summary: serde_json::Value = serde_json::from_str(&read(&runs[0].join("summary.json"))).unwrap();
    let auc = summary["auc_spin"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&auc));
    assert_eq!(summary["T"], 12);
    assert_eq!(summary["config_sha256"].as_str().unwrap(), header["# config_sha256=".len()..].split(' ').next().unwrap());
}

#[test]
fn precedence_flags_over_file_over_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.toml");
    fs::write(&p, format!("seed = 3\n{SMALL}[pipeline.plan]\nwindow = 50\nstride = 10\n")).unwrap();
    let cli = Cli::try_parse_from(["spinchain", "changepoint", "--synthetic", "mean-jumps", "--config", p.to_str().unwrap(), "--window", "80"]).unwrap();
    let Command::Changepoint(a) = cli.command else { panic!("wrong subcommand") };
    let cfg = a.common.resolve().unwrap();
    assert_eq!(cfg.pipeline.plan.window, 80);
    assert_eq!(cfg.pipeline.plan.stride, 10);
    assert_eq!(cfg.seed, 3);
    assert_eq!(cfg.chain_length, 3);
    assert_eq!(cfg.kl_bins, RunConfig::default().kl_bins);

    let d = RunConfig::default();
    assert_eq!((d.chain_length, d.max_arity, d.operator_count()), (6, 5, 363));
    assert_eq!(d.hash(), RunConfig::default().hash());
    assert_ne!(d.hash(), cfg.hash());
    assert!(RunConfig::from_toml("chain_length = 3\n").unwrap().validate().is_err());
}

#[test]
fn uq_demo_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo");
    assert_eq!(sh(&["uq-demo", "--out", out.to_str().unwrap(), "--threads", "1"]), 0);
    let csv = read(&out.join("uq_demo.csv"));
    assert_eq!(csv.lines().count(), 2 + 2 * 8 * 64);
    let json: serde_json::Value = serde_json::from_str(&read(&out.join("uq_demo.json"))).unwrap();
    assert_eq!(json["widths"].as_array().unwrap().len(), 2);
}

#[test]
fn cluster_identical_inputs_note_ccc() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("s.csv");
    assert_eq!(sh(&["gen-data", "sine-demo", "--out", series.to_str().unwrap()]), 0);
    let cfg = small_config(dir.path());
    let out = dir.path().join("c");
    let s = series.to_str().unwrap();
    assert_eq!(sh(&["cluster", s, s, s, s, "--config", &cfg, "--out", out.to_str().unwrap()]), 0);
    let m: serde_json::Value = serde_json::from_str(&read(&out.join("metrics.json"))).unwrap();
    assert!(m["spin"]["ccc"].is_null());
    assert!(m["spin"]["notes"].as_array().unwrap().iter().any(|n| n.as_str().unwrap().starts_with("ccc")));
    assert_eq!(m["meta"]["T"], 12);
    let heat = read(&out.join("heatmap_dwt.csv"));
    assert_eq!(heat.lines().count(), 2 + 16);
    assert_eq!(sh(&["cluster", s, s, "--config", &cfg, "--out", out.to_str().unwrap()]), 2);
}

#[test]
fn basis_command_succeeds() {
    assert_eq!(sh(&["basis", "--chain-length", "3", "--max-arity", "2"]), 0);
    assert_eq!(sh(&["basis", "--chain-length", "3", "--max-arity", "4"]), 2);
}
