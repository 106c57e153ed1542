// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_balfactor"))
        .args(args)
        .output()
        .unwrap()
}

fn gen(dir: &Path, n: usize, k: usize, seed: u64) -> String {
    let path = dir.join(format!("g{n}_{k}_{seed}.txt"));
    let p = path.to_str().unwrap().to_string();
    let out = run(&[
        "gen",
        "--n",
        &n.to_string(),
        "--k",
        &k.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        &p,
    ]);
    assert!(out.status.success());
    p
}

fn json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn gen_writes_a_loadable_colouring() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), 12, 3, 4);
    let g = balfactor::graph::load_colouring(&std::fs::read_to_string(p).unwrap()).unwrap();
    assert_eq!(g.n_vertices(), 12);
    assert_eq!(g.total_counts().as_slice(), &[22, 22, 22]);
}

#[test]
fn solve_report_has_expected_fields() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), 12, 3, 1);
    let v = json(&run(&[
        "solve",
        "--input",
        &p,
        "--h-complete",
        "3",
        "--restarts",
        "2",
    ]));
    for key in [
        "version",
        "flags",
        "instance",
        "alpha",
        "clique_counts",
        "clique_norm_sq",
        "clique_deviation",
        "h_counts",
        "h_deviation",
        "h_norm",
        "iterations",
        "improving_steps",
        "terminated_reason",
        "restarts_used",
        "best_restart",
        "parts",
        "wall_time_ms",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["parts"].as_array().unwrap().len(), 4);
    assert_eq!(v["terminated_reason"], "local_minimum");
    assert_eq!(v["h_counts"], v["clique_counts"]);
}

#[test]
fn oracle_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), 8, 2, 9);
    let v = json(&run(&["oracle", "--input", &p, "--h-complete", "2"]));
    let g = balfactor::graph::load_colouring(&std::fs::read_to_string(&p).unwrap()).unwrap();
    let h = balfactor::PatternGraph::complete(2).unwrap();
    let best = balfactor::oracle::min_deviation_bruteforce(&g, &h).unwrap();
    assert_eq!(v["min_deviation"], best.deviation.to_string());
}

#[test]
fn oracle_guard_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), 30, 2, 0);
    let out = run(&["oracle", "--input", &p, "--h-complete", "2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "3 2\n0 1 0\n0 2 5\n1 2 1\n").unwrap();
    let out = run(&[
        "solve",
        "--input",
        bad.to_str().unwrap(),
        "--h-complete",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // Five vertices are not divisible into triangles.
    let p = gen(dir.path(), 5, 2, 0);
    assert_eq!(
        run(&["solve", "--input", &p, "--h-complete", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["solve", "--input", "/nonexistent", "--h-complete", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["gen", "--n", "4"]).status.code(), Some(2));
}

#[test]
fn sweep_csv_shape() {
    let out = run(&[
        "sweep", "--n-list", "6,12", "--k", "2", "--r", "3", "--trials", "2", "--seed", "1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "n,k,r,seed,alpha,clique_deviation,h_deviation,iterations,wall_time_ms"
    );
    assert_eq!(lines.len(), 5);
}

#[test]
fn verify_bounds_reports_pass() {
    let v = json(&run(&["verify-bounds", "--d", "2", "--r", "3"]));
    assert_eq!(v["lattice"]["pass"], true, "{v}");
}
