use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const GRID_2D: &str = r#"{"extents": [4, 4], "forbidden": [[0, 0], [1, 2], [2, 1], [3, 3]]}"#;
const HOLLOW_SQUARE: &str = r#"{"extents": [1, 1], "forbidden": [[0, 0]]}"#;
const MUTEX: &str =
    "# two processes, one lock\nsem a 1;\nproc p = P(a); V(a);\nproc q = P(a); V(a);\n";
const PARALLEL_EDGES: &str = r#"{"dims": 1, "cells": [["v", "w"], ["a", "b"]],
  "faces": {"a": {"d0": ["v"], "d1": ["w"]}, "b": {"d0": ["v"], "d1": ["w"]}}}"#;
const SHORTCUT: &str = r#"{"dims": 1, "cells": [["v", "m", "w"], ["e", "f", "g"]],
  "faces": {"e": {"d0": ["v"], "d1": ["m"]}, "f": {"d0": ["m"], "d1": ["w"]}, "g": {"d0": ["v"], "d1": ["w"]}}}"#;
// The two faces in direction 0 are swapped.
const CORRUPTED_SQUARE: &str = r#"{"dims": 2,
  "cells": [["00", "10", "01", "11"], ["b", "t", "l", "r"], ["s"]],
  "faces": {
    "b": {"d0": ["00"], "d1": ["10"]}, "t": {"d0": ["01"], "d1": ["11"]},
    "l": {"d0": ["00"], "d1": ["01"]}, "r": {"d0": ["10"], "d1": ["11"]},
    "s": {"d0": ["r", "b"], "d1": ["l", "t"]}}}"#;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: TempDir::new().unwrap(),
        }
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        fs::write(&path, contents).unwrap();
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn dihom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dihom"))
        .args(args)
        .env_remove("DIHOM_THREADS")
        .output()
        .unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn grid_homology_table() {
    let ws = Workspace::new();
    let input = ws.file("grid.json", GRID_2D);
    let out = dihom(&[
        "homology",
        "-i",
        arg(&input),
        "--pairs",
        "0,0:4,4;0,0:3,2;3,2:4,4",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .map(|l| l.split_whitespace().collect())
        .collect();
    assert_eq!(rows[0], ["from", "to", "HM_1", "HM_2"]);
    assert_eq!(rows[1], ["(0,0)", "(4,4)", "12", "0"]);
    assert_eq!(rows[2], ["(0,0)", "(3,2)", "4", "0"]);
    assert_eq!(rows[3], ["(3,2)", "(4,4)", "2", "0"]);
}

#[test]
fn json_report_and_out_file() {
    let ws = Workspace::new();
    let input = ws.file("grid.json", GRID_2D);
    let report = ws.path("report.json");
    let out = dihom(&[
        "homology",
        "-i",
        arg(&input),
        "--format",
        "grid-json",
        "--pairs",
        "0,0:4,4",
        "--max-degree",
        "3",
        "--kind",
        "cohomology",
        "--representatives",
        "--json",
        "--out",
        arg(&report),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(fs::read_to_string(&report).unwrap(), stdout(&out));
    assert_eq!(v["kind"], "cohomology");
    let pair = &v["pairs"][0];
    assert_eq!(pair["from"], "(0,0)");
    assert_eq!(pair["HM"]["1"], 12);
    assert_eq!(pair["HM"]["2"], 0);
    assert_eq!(pair["HM"]["3"], 0);
    assert_eq!(pair["representatives"]["1"].as_array().unwrap().len(), 12);
}

#[test]
fn obstacle_model_agrees() {
    let ws = Workspace::new();
    let input = ws.file("grid.json", GRID_2D);
    let pairs = "0,0:4,4;0,0:3,2;3,2:4,4";
    let chains = dihom(&["homology", "-i", arg(&input), "--pairs", pairs, "--json"]);
    let obstacles = dihom(&[
        "homology",
        "-i",
        arg(&input),
        "--pairs",
        pairs,
        "--model",
        "obstacles",
        "--json",
    ]);
    assert_eq!(code(&obstacles), 0, "{}", stderr(&obstacles));
    for i in 0..3 {
        assert_eq!(
            json(&chains)["pairs"][i]["HM"],
            json(&obstacles)["pairs"][i]["HM"]
        );
    }
}

#[test]
fn obstacle_json_input() {
    let ws = Workspace::new();
    let input = ws.file(
        "obstacles.json",
        r#"{"extents": [4, 4, 4], "class_degree": 1, "obstacles": [
            {"id": "O1", "coords": ["1/2", "1/2", "1/2"]},
            {"id": "O2", "coords": ["3/2", "5/2", "3/2"]},
            {"id": "O3", "coords": ["5/2", "3/2", "5/2"]},
            {"id": "O4", "coords": ["7/2", "7/2", "7/2"]}]}"#,
    );
    let out = dihom(&[
        "homology",
        "-i",
        arg(&input),
        "--pairs",
        "0,0,0:4,4,4",
        "--max-degree",
        "5",
        "--json",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let hm = &json(&out)["pairs"][0]["HM"];
    let profile: Vec<u64> = (1..=5)
        .map(|i| hm[i.to_string()].as_u64().unwrap())
        .collect();
    assert_eq!(profile, [1, 4, 5, 2, 0]);
}

#[test]
fn hollow_square_and_mutex() {
    let ws = Workspace::new();
    let square = ws.file("square.json", HOLLOW_SQUARE);
    let out = dihom(&[
        "homology",
        "-i",
        arg(&square),
        "--pairs",
        "0,0:1,1",
        "--json",
    ]);
    assert_eq!(json(&out)["pairs"][0]["HM"]["1"], 2);
    let pv = ws.file("mutex.pv", MUTEX);
    let out = dihom(&["homology", "-i", arg(&pv), "--pairs", "0,0:2,2", "--json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out)["pairs"][0]["HM"]["1"], 2);
}

#[test]
fn pv_parse_errors_are_model_errors() {
    let ws = Workspace::new();
    let pv = ws.file("bad.pv", "sem a 1;\nproc p = P(a); P(a);\n");
    let out = dihom(&["homology", "-i", arg(&pv)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("2:16"), "{}", stderr(&out));
}

#[test]
fn determinism_across_thread_counts() {
    let ws = Workspace::new();
    let input = ws.file("grid.json", GRID_2D);
    let one = dihom(&[
        "homology",
        "-i",
        arg(&input),
        "--json",
        "--threads",
        "1",
        "--representatives",
    ]);
    let four = dihom(&[
        "homology",
        "-i",
        arg(&input),
        "--json",
        "--threads",
        "4",
        "--representatives",
    ]);
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_dihom"))
        .args(["homology", "-i", arg(&input), "--json", "--representatives"])
        .env("DIHOM_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(env.stdout, one.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_dihom"))
        .args(["homology", "-i", arg(&input)])
        .env("DIHOM_THREADS", "zero")
        .output()
        .unwrap();
    assert_ne!(code(&bad), 0);
}

#[test]
fn obstacle_cap_image() {
    let ws = Workspace::new();
    let input = ws.file("grid.json", GRID_2D);
    let out = dihom(&[
        "product",
        "-i",
        arg(&input),
        "--op",
        "obstacle-cap",
        "--left",
        "0,0:3,2",
        "--right",
        "3,2:4,4",
        "--json",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["image_size"], 8);
    assert_eq!(v["results"].as_array().unwrap().len(), 8);
    let out = dihom(&[
        "product",
        "-i",
        arg(&input),
        "--op",
        "cap",
        "--left",
        "0,0:3,2",
        "--right",
        "3,2:4,4",
        "--json",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out)["image_rank"], 8);
}

#[test]
fn cup0_is_idempotent_on_basis_classes() {
    let ws = Workspace::new();
    let input = ws.file("grid.json", GRID_2D);
    for i in 0..12 {
        let op = format!("0,0:4,4#{i}");
        let out = dihom(&[
            "product",
            "-i",
            arg(&input),
            "--op",
            "cup0",
            "--left",
            &op,
            "--right",
            &op,
            "--json",
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let v = json(&out);
        assert_eq!(v["image_rank"], 1);
        let class = &v["results"][0]["class"];
        let basis = dihom(&[
            "product",
            "-i",
            arg(&input),
            "--op",
            "cup0",
            "--left",
            &op,
            "--right",
            "0,0:4,4",
            "--json",
        ]);
        let results = json(&basis)["results"].as_array().unwrap().clone();
        let nonzero: Vec<_> = results
            .iter()
            .filter(|r| !r["class"]["rep"].as_object().unwrap().is_empty())
            .collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(&nonzero[0]["class"], class);
        assert_eq!(nonzero[0]["right"], i);
    }
    let out = dihom(&[
        "product",
        "-i",
        arg(&input),
        "--op",
        "obstacle-cup",
        "--left",
        "0,0:4,4#3",
        "--right",
        "0,0:4,4#3",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn conc_on_two_hollow_squares() {
    let ws = Workspace::new();
    let input = ws.file(
        "two.json",
        r#"{"extents": [2, 2], "forbidden": [[0, 0], [1, 1]]}"#,
    );
    let out = dihom(&[
        "product",
        "-i",
        arg(&input),
        "--op",
        "conc",
        "--left",
        "0,0:1,1",
        "--right",
        "1,1:2,2",
        "--json",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out)["image_rank"], 4);
}

#[test]
fn operand_errors() {
    let ws = Workspace::new();
    let input = ws.file("grid.json", GRID_2D);
    let cases: [&[&str]; 5] = [
        &["--op", "cap", "--left", "0,0:3,2", "--right", "3,1:4,4"],
        &["--op", "cup0", "--left", "0,0:4,4", "--right", "0,0:3,2"],
        &[
            "--op",
            "cup0",
            "--left",
            "0,0:4,4@2",
            "--right",
            "0,0:4,4@2",
        ],
        &["--op", "conc", "--left", "0,0:3,2#99", "--right", "3,2:4,4"],
        &[
            "--op",
            "obstacle-cap",
            "--left",
            "0,0:3,2",
            "--right",
            "3,3:4,4",
        ],
    ];
    for extra in cases {
        let mut args = vec!["product", "-i", arg(&input)];
        args.extend_from_slice(extra);
        let out = dihom(&args);
        assert_eq!(code(&out), 3, "{extra:?}: {}", stderr(&out));
    }
}

#[test]
fn check_passes_on_grid() {
    let ws = Workspace::new();
    let input = ws.file("grid.json", GRID_2D);
    let out = dihom(&["check", "-i", arg(&input), "--json"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let v = json(&out);
    assert_eq!(v["failed"], 0);
    assert_eq!(v["checks"].as_array().unwrap().len(), 5);
}

#[test]
fn check_reports_improper_model() {
    let ws = Workspace::new();
    let input = ws.file("parallel.json", PARALLEL_EDGES);
    let out = dihom(&["check", "-i", arg(&input)]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("FAIL properness: cubes a and b"), "{text}");
    let out = dihom(&["homology", "-i", arg(&input)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("cubes a and b"));
}

#[test]
fn check_reports_corrupted_boundary() {
    let ws = Workspace::new();
    let input = ws.file("corrupt.json", CORRUPTED_SQUARE);
    let out = dihom(&["check", "-i", arg(&input), "--json"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["check"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"boundary squares to zero"), "{v}");
    assert!(failed.contains(&"precubical identity"), "{v}");
}

#[test]
fn equal_length_violation_is_a_model_error() {
    let ws = Workspace::new();
    let input = ws.file("shortcut.json", SHORTCUT);
    let out = dihom(&["homology", "-i", arg(&input)]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(
        err.contains("equal-length") && err.contains("(g)") && err.contains("(e, f)"),
        "{err}"
    );
    let out = dihom(&["check", "-i", arg(&input)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn io_errors() {
    let ws = Workspace::new();
    let out = dihom(&["homology", "-i", arg(&ws.path("missing.json"))]);
    assert_eq!(code(&out), 4);
    let input = ws.file("grid.json", GRID_2D);
    let out = dihom(&[
        "homology",
        "-i",
        arg(&input),
        "--out",
        arg(&ws.path("no/such/dir/r.json")),
    ]);
    assert_eq!(code(&out), 4);
}

#[test]
fn bad_json_is_a_model_error() {
    let ws = Workspace::new();
    let input = ws.file("bad.json", r#"{"extents": [2, 0]}"#);
    assert_eq!(code(&dihom(&["homology", "-i", arg(&input)])), 2);
    let input = ws.file("worse.json", "{");
    assert_eq!(
        code(&dihom(&[
            "homology",
            "-i",
            arg(&input),
            "--format",
            "grid-json"
        ])),
        2
    );
}
