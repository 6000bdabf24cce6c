// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use amsplace::io::{parse_instance, parse_placement, parse_report};
use amsplace::{evaluate, is_feasible, Instance};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_amsplace"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &Path, name: &str, n: usize, seed: u64) -> PathBuf {
    let path = dir.join(name);
    let n = n.to_string();
    let seed = seed.to_string();
    ok(&[
        "gen",
        "--n",
        &n,
        "--nets",
        "3:6",
        "--symmetry",
        "--negative-distances",
        "--blockages",
        "1",
        "--seed",
        &seed,
        "--out",
        s(&path),
    ]);
    path
}

fn load(path: &Path) -> Instance {
    parse_instance(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_solve_eval_plot() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = gen(dir.path(), "a.json", 12, 5);
    let inst = load(&inst_path);
    assert_eq!(inst.len(), 12);

    let out = dir.path().join("p.json");
    ok(&[
        "solve",
        "--instance",
        s(&inst_path),
        "--algo",
        "ga",
        "--generations",
        "4",
        "--pop-size",
        "16",
        "--c-conn",
        "2",
        "--out",
        s(&out),
    ]);
    let doc = parse_placement::<f64>(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let mut weighted = inst.clone();
    weighted.weights.c_conn = 2.0;
    let p = doc.to_placement(&weighted).unwrap();
    assert!(is_feasible(&weighted, &p));
    assert_eq!(doc.report.as_ref().unwrap(), &evaluate(&p, &weighted));
    assert_eq!(doc.solver.as_ref().unwrap().algorithm, "ga");

    // eval uses the weights stored in the instance file, so c_conn is back to its original value.
    let json = ok(&["eval", "--instance", s(&inst_path), "--placement", s(&out)]);
    let report: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(report["total"].as_f64().unwrap(), evaluate(&p, &inst).total);

    let svg_path = dir.path().join("p.svg");
    ok(&["plot", "--instance", s(&inst_path), "--placement", s(&out), "--out", s(&svg_path)]);
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches("class=\"device\"").count(), 12);
}

#[test]
fn fixed_budget_runs_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = gen(dir.path(), "a.json", 10, 9);
    for algo in ["ga", "cmaes"] {
        let mut docs = Vec::new();
        for k in 0..2 {
            let out = dir.path().join(format!("{algo}{k}.json"));
            ok(&[
                "solve",
                "--instance",
                s(&inst_path),
                "--algo",
                algo,
                "--generations",
                "3",
                "--pop-size",
                "12",
                "--seed",
                "4",
                "--out",
                s(&out),
            ]);
            let mut doc = parse_placement::<f64>(&std::fs::read_to_string(&out).unwrap()).unwrap();
            doc.solver.as_mut().unwrap().wall_time_s = 0.0;
            docs.push(doc);
        }
        assert_eq!(docs[0], docs[1], "{algo}");
    }
}

#[test]
fn converts_gsrc() {
    let dir = tempfile::tempdir().unwrap();
    let blocks = dir.path().join("t.blocks");
    let nets = dir.path().join("t.nets");
    std::fs::write(&blocks, "UCSC blocks 1.0\nNumHardRectilinearBlocks : 2\nNumTerminals : 1\na hardrectilinear 4 (0, 0) (0, 14) (28, 14) (28, 0)\nb hardrectilinear 4 (0, 0) (0, 5) (5, 5) (5, 0)\np terminal\n").unwrap();
    std::fs::write(
        &nets,
        "UCLA nets 1.0\nNumNets : 2\nNumPins : 4\nNetDegree : 2\na B\nb B\nNetDegree : 2\na B\np B\n",
    )
    .unwrap();
    let out = dir.path().join("t.json");
    let msg = ok(&["convert-gsrc", "--blocks", s(&blocks), "--nets", s(&nets), "--out", s(&out)]);
    assert!(msg.contains("2 nets declared, 1 kept, 1 dropped"), "{msg}");
    let inst = load(&out);
    assert_eq!(inst.len(), 2);
    assert_eq!((inst.rects[0].variants[0].w, inst.rects[0].variants[0].h), (28, 14));
    assert_eq!(inst.nets.len(), 1);

    ok(&["convert-gsrc", "--blocks", s(&blocks), "--nets", s(&nets), "--include-terminals", "--out", s(&out)]);
    assert_eq!(load(&out).len(), 3);
}

#[test]
fn bench_report_matches_hand_computation() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("set");
    std::fs::create_dir(&set).unwrap();
    for k in 0..3 {
        gen(&set, &format!("i{k}.json"), 8, k);
    }
    let csv = dir.path().join("r.csv");
    ok(&[
        "bench",
        "--dir",
        s(&set),
        "--algo",
        "ga,cmaes",
        "--generations",
        "2",
        "--pop-size",
        "10",
        "--repeats",
        "2",
        "--no-refine",
        "--out",
        s(&csv),
    ]);
    let rows = parse_report(&std::fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 3 * 2 + 2);
    for algo in ["ga", "cmaes"] {
        let mut rd = 0.0;
        let mut hits = 0;
        for k in 0..3 {
            let inst = format!("i{k}");
            let mine = rows.iter().find(|r| r.instance == inst && r.algorithm == algo).unwrap();
            let best = rows.iter().filter(|r| r.instance == inst).map(|r| r.mean_total).fold(f64::INFINITY, f64::min);
            rd += (mine.mean_total - best) / best * 100.0;
            hits += usize::from(mine.mean_total == best);
        }
        let summary = rows.iter().find(|r| r.instance == "ALL" && r.algorithm == algo).unwrap();
        assert!((summary.rel_diff_pct - rd / 3.0).abs() < 1e-9);
        assert_eq!(summary.is_best, hits);
        assert_eq!(summary.runs, 6);
    }
}

#[test]
fn errors_exit_with_class_codes_and_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let check = |args: &[&str], code: i32| {
        let out = run(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    };
    check(&["solve", "--bogus"], 2);
    check(&["gen", "--n", "5", "--nets", "4", "--out", "x"], 2);
    check(&["gen", "--n", "0", "--nets", "1:2", "--out", s(&dir.path().join("z.json"))], 2);
    let missing = dir.path().join("missing.json");
    check(&["eval", "--instance", s(&missing), "--placement", s(&missing)], 3);

    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        "{\"format\": \"amsplace-instance\", \"version\": 1, \"rects\": [{\"name\": \"a\", \"variants\": [[1]]}]}",
    )
    .unwrap();
    check(&["solve", "--instance", s(&bad), "--out", s(&dir.path().join("o.json"))], 3);

    let inst_path = gen(dir.path(), "a.json", 6, 1);
    check(
        &[
            "solve",
            "--instance",
            s(&inst_path),
            "--pop-size",
            "0",
            "--generations",
            "1",
            "--out",
            s(&dir.path().join("o.json")),
        ],
        2,
    );

    // A placement with every rect at the origin overlaps.
    let out = dir.path().join("p.json");
    ok(&["solve", "--instance", s(&inst_path), "--generations", "1", "--pop-size", "4", "--out", s(&out)]);
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for r in doc["rects"].as_array_mut().unwrap() {
        r["x"] = 0.into();
        r["y"] = 0.into();
    }
    std::fs::write(&out, doc.to_string()).unwrap();
    check(&["eval", "--instance", s(&inst_path), "--placement", s(&out)], 3);
}
