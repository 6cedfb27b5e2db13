use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn crossint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crossint")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

const NRS: [&str; 12] = ["--m", "6", "--n", "6", "--r", "2", "--s", "2", "--t", "1", "--u", "2"];

fn nrs_args(m: &str) -> Vec<&str> {
    let mut a = vec!["--format", "json", "verify", "thm-nrs"];
    a.extend(NRS);
    a[5] = m;
    a[7] = m;
    a
}

#[test]
fn thm_nrs_in_range_passes() {
    let o = crossint(&nrs_args("6"));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["bound"], "25/1");
    assert_eq!(v["search_max"], "25/1");
    assert_eq!(v["maximizer_count"], 6);
    assert_eq!(v["maximizers_are_stars"], true);
}

#[test]
fn thm_nrs_below_threshold_refuses() {
    let o = crossint(&nrs_args("4"));
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("hypothesis not satisfied: min ground 4 < threshold 6"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn thm_nrs_below_threshold_override_reports() {
    let mut args = nrs_args("4");
    args.push("--allow-below-threshold");
    let o = crossint(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["search_max"], "9/1");
    assert_eq!(v["hypothesis_ok"], false);
    assert_eq!(v["maximizers_are_stars"], false);
}

#[test]
fn remark2_counterexample() {
    let o = crossint(&["--format", "json", "counterexample", "remark2", "--n", "5", "--t", "3", "--x", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["pair_value"], "36/1");
    assert_eq!(v["star_value"], "16/1");
    assert_eq!(v["beats_star"], true);
    assert_eq!(v["closed_forms_match"], true);
}

#[test]
fn other_counterexamples_beat_the_star() {
    for args in [
        vec!["counterexample", "seq-lowcap", "--n", "4", "--t", "2", "--x", "1"],
        vec!["counterexample", "multi-lown", "--n", "5", "--r", "4", "--t", "2"],
    ] {
        let mut a = vec!["--format", "json"];
        a.extend(args);
        let o = crossint(&a);
        assert_eq!(code(&o), 0, "{a:?}: {}", stderr(&o));
        assert_eq!(json(&o)["beats_star"], true, "{a:?}");
    }
}

#[test]
fn sweep_grid_and_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let out_s = out.to_str().unwrap();
    let o = crossint(&["--out", out_s, "sweep", "--m", "4-7", "--r", "2", "--t", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[0].starts_with("kind,m,n,r,s,t,u,hypothesis_ok,bound,search_max,agrees"));
    assert!(rows[3].starts_with("nrs,6,6,2,2,1,2/1,true,25/1,25/1,true,true,ok,"));
    // rerunning keeps existing rows untouched
    let o = crossint(&["--out", out_s, "sweep", "--m", "4-7", "--r", "2", "--t", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), text);
}

#[test]
fn multiset_sweep() {
    let o = crossint(&["sweep", "--kind", "multi", "--m", "4-6", "--r", "2", "--t", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let hyp: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(7).unwrap()).collect();
    assert_eq!(hyp, ["false", "true", "true"]);
}

#[test]
fn empty_sweep_writes_header() {
    let o = crossint(&["sweep", "--m", "5-4", "--r", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn malformed_input_is_located() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "ground 3\n1 2\n1 9\n").unwrap();
    let o = crossint(&["compress", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&crossint(&["verify", "thm-nrs", "--m", "6"])), 1);
    assert_eq!(code(&crossint(&["bounds", "nrs", "--m", "6", "--n", "6", "--r", "2", "--s", "2", "--u", "x"])), 1);
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn compress_traces_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.txt", "ground 3\n2 3\n");
    let o = crossint(&["compress", &f, "--trace"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "ground 3\n1 2\n");
    let first: Value = serde_json::from_str(stderr(&o).lines().next().unwrap()).unwrap();
    assert_eq!(first["i"], 1);
}

#[test]
fn generated_families_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = crossint(&["gen", "subsets", "--n", "5", "--r", "2"]);
    assert_eq!(code(&o), 0);
    let f = write(dir.path(), "g.txt", &stdout(&o));
    let again = crossint(&["compress", &f]);
    assert_eq!(stdout(&again), stdout(&o));
    let j = crossint(&["--format", "json", "gen", "subsets", "--n", "5", "--r", "2"]);
    let fj = write(dir.path(), "g.json", &stdout(&j));
    assert_eq!(stdout(&crossint(&["compress", &fj])), stdout(&o));
}

#[test]
fn search_reports_concept_and_oracle_alike() {
    let dir = tempfile::tempdir().unwrap();
    let o = crossint(&["gen", "subsets", "--n", "4", "--r", "2"]);
    let f = write(dir.path(), "f.txt", &stdout(&o));
    let concept = json(&crossint(&["--format", "json", "search", "--left", &f, "--t", "1"]));
    let oracle = json(&crossint(&["--format", "json", "search", "--left", &f, "--t", "1", "--oracle"]));
    assert_eq!(concept["max"], "9/1");
    assert_eq!(concept["method"], "concept");
    assert_eq!(concept["max"], oracle["max"]);
    assert_eq!(concept["maximizers"], oracle["maximizers"]);
}

#[test]
fn bounds_report_threshold() {
    let o = crossint(&["--format", "json", "bounds", "nrs", "--m", "6", "--n", "6", "--r", "2", "--s", "2", "--t", "1", "--u", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["bound"], "25");
    assert_eq!(v["threshold_ok"], true);
}

#[test]
fn properties_pass() {
    let o = crossint(&["verify", "properties", "--trials", "50", "--suite", "delta-size", "--suite", "window"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 2);
    assert_eq!(code(&crossint(&["verify", "properties", "--trials", "10"])), 1);
}
