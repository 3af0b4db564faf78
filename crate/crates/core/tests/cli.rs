use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn gms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gms")).args(args).output().unwrap()
}

fn gms_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gms"))
        .args(args)
        .env(key, val)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

#[test]
fn run_reports_exact_recovery() {
    let out = gms(&["run", "--synthetic", "haystack:125:125:10:5", "--d", "5", "--trials", "4", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["trials"], 4);
    assert_eq!(r["error"]["count"], 4);
    assert!(r["error"]["mean"].as_f64().unwrap() < 1e-8);
    assert_eq!(r["per_trial"].as_array().unwrap().len(), 4);
    for t in r["per_trial"].as_array().unwrap() {
        assert!(t["runtime_seconds"].as_f64().unwrap() < 1.0);
        assert!(t.get("spectrum").is_some(), "absent values are explicit nulls");
        assert!(t["spectrum"].is_null());
    }
}

#[test]
fn fixed_seed_reports_are_identical_across_runs_and_thread_counts() {
    let args = ["run", "--synthetic", "haystack:60:60:8:3", "--trials", "6", "--seed", "9", "--no-timing", "--emit-spectrum"];
    let a = gms_env(&args, "RAYON_NUM_THREADS", "1");
    let b = gms_env(&args, "RAYON_NUM_THREADS", "4");
    let c = gms(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    assert!(json(&a)["per_trial"][0]["spectrum"].is_array());
}

#[test]
fn baselines_run_through_the_cli() {
    for alg in ["pca", "l2", "m_est", "egms", "gms2", "gms_ridge"] {
        let out = gms(&["run", "--algorithm", alg, "--synthetic", "haystack:40:40:6:2", "--d", "2", "--trials", "2"]);
        assert_eq!(out.status.code(), Some(0), "{alg}: {}", String::from_utf8_lossy(&out.stderr));
        let r = json(&out);
        assert_eq!(r["algorithm"], alg);
        assert_eq!(r["error"]["count"], 2);
    }
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(gms(&["run"]).status.code(), Some(1));
    assert_eq!(gms(&["run", "--synthetic", "haystack:1:2"]).status.code(), Some(1));
    assert_eq!(gms(&["run", "--synthetic", "haystack:10:10:4:2", "--trials", "0"]).status.code(), Some(1));
    assert_eq!(gms(&["run", "--algorithm", "pca", "--synthetic", "haystack:10:10:4:2"]).status.code(), Some(1));
    assert_eq!(gms(&["frobnicate"]).status.code(), Some(1));

    let bad = path(&dir, "bad.csv");
    fs::write(&bad, "1,2\n3,4\n5,oops\n").unwrap();
    let out = gms(&["run", "--input", &bad, "--d", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");

    let missing = path(&dir, "missing.csv");
    assert_eq!(gms(&["run", "--input", &missing, "--d", "1"]).status.code(), Some(1));
}

#[test]
fn numerical_failures_exit_with_two_and_keep_the_report() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "flat.csv");
    fs::write(&input, "1,0,0\n0,1,0\n1,1,0\n2,-1,0\n").unwrap();
    let report = path(&dir, "report.json");
    let out = gms(&["run", "--algorithm", "l2", "--input", &input, "--d", "1", "--output", &report]);
    assert_eq!(out.status.code(), Some(2));
    let r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["failures"], 1);
    assert!(r["per_trial"][0]["error"].as_str().unwrap().contains("rank deficient"));
    assert!(r["error"]["mean"].is_null());
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = path(&dir, "exp.toml");
    fs::write(
        &cfg,
        "algorithm = \"gms\"\nsynthetic = \"haystack:30:30:5:2\"\ntrials = 2\nd = 2\nseed = 4\n\n[solver]\ndelta = 1e-10\nmax_iter = 50\n",
    )
    .unwrap();
    let r = json(&gms(&["run", "--config", &cfg]));
    assert_eq!(r["trials"], 2);
    assert_eq!(r["delta"], 1e-10);
    assert_eq!(r["max_iter"], 50);
    let r = json(&gms(&["run", "--config", &cfg, "--trials", "3", "--delta", "1e-6"]));
    assert_eq!(r["trials"], 3);
    assert_eq!(r["delta"], 1e-6);

    fs::write(&cfg, "trails = 2\n").unwrap();
    assert_eq!(gms(&["run", "--config", &cfg]).status.code(), Some(1));
}

#[test]
fn csv_input_without_ground_truth() {
    let dir = TempDir::new().unwrap();
    let pts = path(&dir, "points.csv");
    let out = gms(&["generate", "--synthetic", "haystack:50:50:6:2", "--seed", "2", "--output", &pts]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&gms(&["run", "--input", &pts, "--trials", "2"]));
    assert_eq!(r["input_path"], pts.as_str());
    assert!(r["per_trial"][0]["recovery_error"].is_null());
    assert_eq!(r["per_trial"][0]["estimated_dim"], 2);
    assert_eq!(r["error"]["count"], 0);
}

#[test]
fn spectrum_of_a_toy_with_two_dimensional_kernel() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "toy.csv");
    fs::write(&input, "1,0,0,0\n0,1,0,0\n1,1,0,0\n1,-2,0,0\n").unwrap();
    let csv = path(&dir, "spectrum.csv");
    let out = gms(&["spectrum", "--input", &input, "--no-reduction", "--output", &csv]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["max_gap_index"], 2);
    assert_eq!(r["estimated_dim"], 2);
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,eigenvalue,log_eigenvalue,log_eigengap");
    assert_eq!(lines.len(), 5);
}

#[test]
fn spectrum_gap_of_case_a() {
    let out = gms(&["spectrum", "--synthetic", "haystack:100:100:100:20", "--seed", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let best = text
        .lines()
        .skip(1)
        .filter_map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Some((f[0].parse::<usize>().ok()?, f[3].parse::<f64>().ok()?))
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert_eq!(best.0, 80);
}

#[test]
fn delta_sweep_table() {
    let dir = TempDir::new().unwrap();
    let csv = path(&dir, "sweep.csv");
    let out = gms(&[
        "sweep-delta", "--synthetic", "haystack:125:125:10:5", "--d", "5", "--trials", "3",
        "--deltas", "1e-16,1e-10,1e-8,1e-6", "--output", &csv,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<Vec<String>> = text.lines().map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows[0], ["delta", "mean_error", "std_error", "failures", "rounding_dominated"]);
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[1][4], "true");
    assert_eq!(rows[2][4], "false");
    let err = |i: usize| rows[i][1].parse::<f64>().unwrap();
    assert!(err(4) > err(3) && err(3) > err(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("slope"));

    let one = gms(&["sweep-delta", "--synthetic", "haystack:30:30:5:2", "--d", "2", "--deltas", "1e-8"]);
    assert_eq!(String::from_utf8(one.stdout).unwrap().lines().count(), 2);
}

fn generate_labeled(dir: &TempDir, synthetic: &str) -> [String; 3] {
    let (i, o, b) = (path(dir, "in.csv"), path(dir, "out.csv"), path(dir, "basis.csv"));
    let out = gms(&["generate", "--synthetic", synthetic, "--seed", "1", "--inliers", &i, "--outliers", &o, "--basis", &b, "--output", &path(dir, "all.csv"), "--labels", &path(dir, "labels.txt")]);
    assert_eq!(out.status.code(), Some(0));
    [i, o, b]
}

#[test]
fn conditions_on_generated_data() {
    let dir = TempDir::new().unwrap();
    let [i, o, b] = generate_labeled(&dir, "haystack:30:20:5:2");
    let r = json(&gms(&["conditions", "--inliers", &i, "--outliers", &o, "--basis", &b]));
    assert_eq!(r["schema_version"], 1);
    for key in ["lhs_permeance", "rhs_c1", "rhs_c2", "holds_rank", "rhs_c1_weak", "approximation_flags", "all_hold", "exact"] {
        assert!(r.get(key).is_some(), "{key} missing");
    }
    let labels = fs::read_to_string(dir.path().join("labels.txt")).unwrap();
    assert_eq!(labels.lines().filter(|l| *l == "inlier").count(), 30);
    assert_eq!(labels.lines().count(), 50);
}

#[test]
fn too_few_outliers_violate_the_rank_condition() {
    let dir = TempDir::new().unwrap();
    let [i, o, b] = generate_labeled(&dir, "haystack:30:5:10:3");
    let r = json(&gms(&["conditions", "--inliers", &i, "--outliers", &o, "--basis", &b]));
    assert_eq!(r["holds_rank"], false);
    assert_eq!(r["all_hold"], false);
}

#[test]
fn enemy_configuration_fails_conditions() {
    let dir = TempDir::new().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p.display().to_string()
    };
    let i = write("in.csv", "1,1,0\n2,2,0\n-1,-1,0\n");
    let o = write("out.csv", "0.3,-0.2,1\n-0.5,0.1,0.7\n0.2,0.4,-0.9\n");
    let b = write("basis.csv", "1,0\n0,1\n0,0\n");
    let r = json(&gms(&["conditions", "--inliers", &i, "--outliers", &o, "--basis", &b]));
    assert_eq!(r["holds_c1"], false);
    assert_eq!(r["holds_c2"], false);

    let off = write("off.csv", "1,1,0.5\n");
    let out = gms(&["conditions", "--inliers", &off, "--outliers", &o, "--basis", &b]);
    assert_eq!(out.status.code(), Some(1));
    assert!(Path::new(&b).exists());
}
