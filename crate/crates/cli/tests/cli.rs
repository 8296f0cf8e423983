use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

use semilinear::scalar::{int, ratio};
use semilinear::{AffineMap, Carrier, Decomposition, LinearCell};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semilinear"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn write(dir: &TempDir, name: &str, v: &Value) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

/// The band `{0 < x < 4, 0 < y < x/2 + 2}` with its lower edge and the
/// origin: the star of the origin.
fn worked_star() -> Decomposition {
    let base = LinearCell::interval(Some(int(0)), Some(int(4))).unwrap();
    let band = LinearCell::band(&base, AffineMap::zero(1).into(), AffineMap::new(vec![ratio(1, 2)], int(2)).into()).unwrap();
    let edge = LinearCell::graph(&base, AffineMap::zero(1)).unwrap();
    let origin = LinearCell::graph(&LinearCell::point(int(0)), AffineMap::zero(1)).unwrap();
    let cells = vec![origin, edge, band];
    let carrier = Carrier::Set(semilinear::decomposition::union_formula(&cells, 2));
    Decomposition { n: 2, carrier, special: true, cells }
}

fn star_instance(path: Option<Value>) -> Value {
    let mut v = json!({ "kind": "star", "decomposition": worked_star(), "center": 0, "corner": [0, 0] });
    if let Some(p) = path {
        v["loop"] = p;
    }
    v
}

#[test]
fn decompose_half_line() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("d.json");
    let o = run(&["decompose", "--special", data("halfline.json").to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let d: Decomposition = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(d.cells.len(), 3);
    assert!(d.special);
    let o = run(&["star", out.to_str().unwrap(), "1", "--check-frontier"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["members"], json!([0, 1, 2]));
    assert_eq!(v["frontier"]["violations"], json!([]));
    let o = run(&["star", out.to_str().unwrap(), "7"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn empty_set_list_is_one_cell() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "empty.json", &json!({ "n": 2, "sets": [] }));
    let o = run(&["decompose", &input]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["cells"].as_array().unwrap().len(), 1);
}

#[test]
fn malformed_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{ not json").unwrap();
    let o = run(&["decompose", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not valid JSON"));
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["retract", "/nonexistent.json"])), 2);
}

#[test]
fn worked_example_trace() {
    let o = run(&["retract", data("worked_case2.json").to_str().unwrap(), "--steps", "8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["q"], "8");
    let samples = v["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 4 * 9);
    // H(1, (1, 1/4)) = (1, min{1/4, 1, 1 + f(1)... }) = (1, 1/4).
    let s = &samples[1];
    assert_eq!(s["t"], "1");
    assert_eq!(s["Hx"], json!(["1", "1/4"]));
    assert_eq!(samples[0]["Hx"], json!(["0", "0"]));
    let o = run(&["retract", data("worked_case3.json").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
}

#[test]
fn outputs_are_reproducible() {
    let case3 = data("worked_case3.json");
    let args = ["retract", case3.to_str().unwrap(), "--seed", "7", "--points", "0"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "star.json", &star_instance(None));
    let args = ["contract", inst.as_str(), "--seed", "3", "--samples", "30"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn star_retraction_and_contraction() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "star.json", &star_instance(None));
    let o = run(&["retract", &inst, "--samples", "60"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["q"], "8");
    let o = run(&["contract", &inst, "--samples", "60"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    let first = &v["samples"][0]["Hx"];
    for s in v["samples"].as_array().unwrap().iter().filter(|s| s["t"] == "0") {
        assert_eq!(&s["Hx"], first);
    }
    let o = run(&["verify", &inst, "--samples", "40"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["ok"], true);
}

#[test]
fn unbounded_contraction_exits_3() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().join("d.json");
    run(&["decompose", "--special", data("halfline.json").to_str().unwrap(), "-o", d.to_str().unwrap()]);
    let d: Value = serde_json::from_str(&std::fs::read_to_string(&d).unwrap()).unwrap();
    let inst = write(&dir, "unbounded.json", &json!({ "kind": "star", "decomposition": d, "center": 1, "corner": [0] }));
    let o = run(&["contract", &inst]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no poles"));
}

#[test]
fn homotopy_of_a_loop() {
    let dir = TempDir::new().unwrap();
    let triangle = json!({ "breakpoints": [0, 1, 2, 3], "vertices": [["1", "1"], ["3", "1/2"], ["2", "2"], ["1", "1"]] });
    let inst = write(&dir, "loop.json", &star_instance(Some(triangle)));
    let o = run(&["homotopy", &inst, "--grid", "6"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["samples"].as_array().unwrap().len(), 36);
    let open = json!({ "breakpoints": [0, 1], "vertices": [["1", "1"], ["3", "1/2"]] });
    let inst = write(&dir, "open.json", &star_instance(Some(open)));
    assert_eq!(code(&run(&["homotopy", &inst])), 4);
    let inst = write(&dir, "none.json", &star_instance(None));
    assert_eq!(code(&run(&["homotopy", &inst])), 2);
}

#[test]
fn hypothesis_violations_exit_4() {
    let dir = TempDir::new().unwrap();
    let mut d = worked_star();
    d.special = false;
    let inst = write(&dir, "plain.json", &json!({ "kind": "star", "decomposition": d, "center": 0, "corner": [0, 0] }));
    assert_eq!(code(&run(&["retract", &inst])), 4);
    // The wedge {0 ≤ y ≤ x < 1}: the band is pinched at the origin with both
    // edges in the star.
    let base = LinearCell::interval(Some(int(0)), Some(int(1))).unwrap();
    let cells = vec![
        LinearCell::graph(&LinearCell::point(int(0)), AffineMap::zero(1)).unwrap(),
        LinearCell::graph(&base, AffineMap::zero(1)).unwrap(),
        LinearCell::band(&base, AffineMap::zero(1).into(), AffineMap::from_ints(&[1], 0).into()).unwrap(),
        LinearCell::graph(&base, AffineMap::from_ints(&[1], 0)).unwrap(),
    ];
    let carrier = Carrier::Set(semilinear::decomposition::union_formula(&cells, 2));
    let wedge = Decomposition { n: 2, carrier, special: true, cells };
    let inst = write(&dir, "wedge.json", &json!({ "kind": "star", "decomposition": wedge, "center": 0, "corner": [0, 0] }));
    let o = run(&["retract", &inst]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("corner labels"));
}

#[test]
fn failed_verification_exits_1() {
    // Graphs of 0 and x over (-1, 1) cross, yet the file claims special.
    let base = LinearCell::interval(Some(int(-1)), Some(int(1))).unwrap();
    let cells = vec![
        LinearCell::graph(&base, AffineMap::zero(1)).unwrap(),
        LinearCell::graph(&base, AffineMap::from_ints(&[1], 0)).unwrap(),
    ];
    let d = Decomposition { n: 2, carrier: Carrier::All, special: true, cells };
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "crossing.json", &json!(d));
    let o = run(&["verify", &p, "--samples", "20"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout_json(&o)["ok"], false);
}

#[test]
fn render_pictures() {
    let dir = TempDir::new().unwrap();
    let trace = dir.path().join("trace.json");
    let o = run(&["retract", data("worked_case2.json").to_str().unwrap(), "-o", trace.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = run(&["render", data("worked_case2.json").to_str().unwrap(), "--trace", trace.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let svg = String::from_utf8(o.stdout).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("stroke=\"#c0392b\"").count(), 4);
    assert!(svg.contains("<polygon"));

    let empty = write(&dir, "empty.json", &json!({ "n": 2, "carrier": "all", "special": true, "cells": [] }));
    let o = run(&["render", &empty]);
    assert_eq!(code(&o), 0);
    let svg = String::from_utf8(o.stdout).unwrap();
    assert!(svg.contains("</svg>") && !svg.contains("<polygon"));

    let space = write(&dir, "space.json", &json!({ "n": 3, "sets": [] }));
    let d3 = dir.path().join("d3.json");
    assert_eq!(code(&run(&["decompose", &space, "-o", d3.to_str().unwrap()])), 0);
    assert_eq!(code(&run(&["render", d3.to_str().unwrap()])), 2);
}

#[test]
fn refine_and_verify_decomposition() {
    let dir = TempDir::new().unwrap();
    let sets = json!({
        "n": 2,
        "sets": [
            { "op": "atom", "f": { "coeffs": ["1", "1"], "const": "0" }, "rel": ">" },
            { "op": "atom", "f": { "coeffs": ["1", "-1"], "const": "1" }, "rel": ">=" }
        ]
    });
    let input = write(&dir, "sets.json", &sets);
    let coarse = dir.path().join("coarse.json");
    assert_eq!(code(&run(&["decompose", &input, "-o", coarse.to_str().unwrap()])), 0);
    let fine = dir.path().join("fine.json");
    assert_eq!(code(&run(&["refine", coarse.to_str().unwrap(), "-o", fine.to_str().unwrap()])), 0);
    let o = run(&["verify", fine.to_str().unwrap(), "--samples", "50"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["ok"], true);
    assert_eq!(v["special"]["violations"], json!([]));
}
