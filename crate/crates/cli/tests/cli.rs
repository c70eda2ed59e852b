use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn thickset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thickset"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn thickness_of_middle_third() {
    let o = thickset(&["thickness", "--set", "middle_cantor:1/3"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("1 (Stabilized)"));
}

#[test]
fn thickness_of_grid_system_is_exact() {
    let o = thickset(&["thickness", "--system", "grid:10,19/200,1/100"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("3439/400 = 8.59750000"));
}

#[test]
fn reproduce_systems_table_passes() {
    let o = thickset(&["reproduce", "--table", "section6"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("pass")).count(), 6);
    assert!(!out.contains("FAIL"));
    let alias = thickset(&["reproduce", "--table", "systems"]);
    assert_eq!(stdout(&alias), out);
}

#[test]
fn reproduce_csv_has_one_row_per_quantity() {
    let o = thickset(&["reproduce", "--table", "all", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|row| &row[4] == "true"));
}

#[test]
fn four_term_search_on_off_center_set() {
    let o = thickset(&[
        "search-kap",
        "--set",
        "off_center:3/10",
        "--k",
        "4",
        "--depth",
        "10",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("InfeasibleAtDepth"));
}

#[test]
fn four_term_progression_in_middle_third() {
    let o = thickset(&["search-kap", "--set", "middle_cantor:1/3", "--k", "4"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("0, 1/3, 2/3, 1"));
}

#[test]
fn unknown_flag_exits_one() {
    assert_eq!(code(&thickset(&["thickness", "--bogus"])), 1);
    assert_eq!(code(&thickset(&["frobnicate"])), 1);
    assert_eq!(code(&thickset(&["--help"])), 0);
}

#[test]
fn malformed_input_exits_one() {
    let o = thickset(&["thickness", "--set", r#"{"kind":"middle_cantor""#]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed JSON"));
    assert_eq!(
        code(&thickset(&["thickness", "--set", "middle_cantor:abc"])),
        1
    );
    assert_eq!(
        code(&thickset(&["thickness", "--set", "middle_cantor:3/2"])),
        1
    );
}

#[test]
fn set_and_system_are_exclusive() {
    let o = thickset(&["thickness", "--set", "middle_cantor:1/3", "--system", "hex"]);
    assert_eq!(code(&o), 1);
    assert_eq!(code(&thickset(&["thickness"])), 1);
}

#[test]
fn thin_set_is_a_hypothesis_failure() {
    let o = thickset(&["find-ap", "--set", "middle_cantor:2/5"]);
    assert_eq!(code(&o), 2);
    let o = thickset(&[
        "certify-gap-lemma",
        "--set",
        "middle_cantor:2/5",
        "--other-set",
        "middle_cantor:2/5@1,1/2",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn gap_lemma_for_shifted_copies() {
    let o = thickset(&[
        "certify-gap-lemma",
        "--set",
        "middle_cantor:1/3",
        "--other-set",
        "middle_cantor:1/3@1,1/2",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("HypothesesHold"));
}

#[test]
fn inline_json_matches_shorthand() {
    let a = thickset(&["thickness", "--set", "off_center:3/10", "--format", "json"]);
    let b = thickset(&[
        "thickness",
        "--set",
        r#"{"schema":"thickset/1","kind":"off_center","a":"0.3"}"#,
        "--format",
        "json",
    ]);
    let va: Value = serde_json::from_slice(&a.stdout).unwrap();
    let vb: Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(va["result"], vb["result"]);
    assert_eq!(va["schema"], "thickset/1");
}

#[test]
fn json_and_csv_are_deterministic() {
    for fmt in ["json", "csv"] {
        let args = [
            "find-ap",
            "--system",
            "grid:10,19/200,1/100",
            "--depth",
            "4",
            "--format",
            fmt,
        ];
        let a = thickset(&args);
        let b = thickset(&args);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{fmt} output differs between runs");
    }
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn out_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ap.json");
    let o = thickset(&[
        "find-ap",
        "--set",
        "middle_cantor:1/3",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let art = read_json(&out);
    assert_eq!(art["command"], "find-ap");
    assert_eq!(art["result"]["exact_points"][1], "2/3");
    let m = read_json(&dir.path().join("ap.json.manifest.json"));
    assert_eq!(m["depth"], 20);
    assert_eq!(m["seed"], 0);
    assert_eq!(m["input_sha256"].as_str().unwrap().len(), 64);
    let bytes = std::fs::read(&out).unwrap();
    let first = m["output_sha256"].clone();
    thickset(&[
        "find-ap",
        "--set",
        "middle_cantor:1/3",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(std::fs::read(&out).unwrap(), bytes);
    assert_eq!(
        read_json(&dir.path().join("ap.json.manifest.json"))["output_sha256"],
        first
    );
}

#[test]
fn plot_set_bars() {
    let o = thickset(&["plot", "--set", "off_center:3/10"]);
    assert_eq!(code(&o), 0);
    let svg = stdout(&o);
    assert!(svg.starts_with("<?xml"));
    let row = svg
        .split("<g id=\"depth-2\"")
        .nth(1)
        .unwrap()
        .split("</g>")
        .next()
        .unwrap();
    assert_eq!(row.matches("<rect").count(), 4);
}

#[test]
fn plot_saved_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 3] = [
        &["find-ap", "--set", "middle_cantor:1/3"],
        &["find-triangle", "--set", "middle_cantor:1/3"],
        &[
            "find-ap",
            "--system",
            "grid:10,19/200,1/100",
            "--depth",
            "3",
        ],
    ];
    for (i, args) in cases.iter().enumerate() {
        let w = dir.path().join(format!("w{i}.json"));
        let mut full = args.to_vec();
        full.extend(["--format", "json", "--out", w.to_str().unwrap()]);
        assert_eq!(code(&thickset(&full)), 0);
        let o = thickset(&["plot", "--witness", w.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let svg = stdout(&o);
        assert!(svg.contains("<g id=\"witness\""));
    }
}

#[test]
fn plot_rejects_witness_without_points() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("empty.json");
    std::fs::write(
        &w,
        r#"{"schema":"thickset/1","command":"find-ap","input":{"set":"middle_cantor:1/3"},"result":{"points":[]}}"#,
    )
    .unwrap();
    let o = thickset(&["plot", "--witness", w.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no points"));
}

#[test]
fn svg_only_from_plot() {
    let o = thickset(&["thickness", "--set", "middle_cantor:1/3", "--format", "svg"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn construct_lists_cover() {
    let o = thickset(&[
        "construct",
        "--set",
        "off_center:3/10",
        "--depth",
        "1",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("0,0,3/10"));
    assert!(text.contains("1,3/5,1"));
}
