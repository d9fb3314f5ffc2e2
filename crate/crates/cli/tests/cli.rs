use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use spdgeo::geometry::fi_distance;
use spdgeo::io::read_set_file;

fn spdbench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spdbench"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn spdbench")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

/// Parses `name: value` scalar comments out of a printed block.
fn comment_scalar(block: &str, name: &str) -> f64 {
    let tag = format!("# {name}: ");
    block
        .lines()
        .find_map(|l| l.strip_prefix(&tag))
        .unwrap_or_else(|| panic!("missing comment {name} in:\n{block}"))
        .parse()
        .expect("scalar comment")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .expect("read csv")
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "generate", "--dim", "6", "--count", "8", "--sigma", "0.1", "--seed", "7", "--out",
        "a.txt",
    ];
    assert_eq!(code(&spdbench(dir.path(), &args)), 0);
    let first = fs::read(dir.path().join("a.txt")).unwrap();
    let first_truth = fs::read(dir.path().join("a.txt.truth")).unwrap();
    assert_eq!(code(&spdbench(dir.path(), &args)), 0);
    assert_eq!(first, fs::read(dir.path().join("a.txt")).unwrap());
    assert_eq!(first_truth, fs::read(dir.path().join("a.txt.truth")).unwrap());

    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("spdset v1 N=6 K=8\n"));
    assert!(text.contains("# rng: ChaCha12"));
    assert!(text.contains("# seed: 7"));
}

#[test]
fn noiseless_sets_diagonalize_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let gen = spdbench(
        dir.path(),
        &[
            "generate", "--dim", "8", "--count", "20", "--sigma", "0", "--seed", "11", "--out",
            "z.txt",
        ],
    );
    assert_eq!(code(&gen), 0);
    let ajd = spdbench(dir.path(), &["ajd", "--in", "z.txt"]);
    assert_eq!(code(&ajd), 0, "stderr: {}", stderr(&ajd));
    let out = stdout(&ajd);
    assert!(out.starts_with("ajddiag v1 N=8 K=20\n"));
    assert!(comment_scalar(&out, "final_criterion").abs() < 1e-12);
}

#[test]
fn gd_and_mm_agree_through_files() {
    let dir = tempfile::tempdir().unwrap();
    spdbench(
        dir.path(),
        &[
            "generate", "--dim", "6", "--count", "12", "--sigma", "0.1", "--seed", "3", "--out",
            "s.txt",
        ],
    );
    for (algo, out) in [("GD", "g.txt"), ("MM", "m.txt")] {
        let run = spdbench(
            dir.path(),
            &["mean", "--algo", algo, "--in", "s.txt", "--out", out],
        );
        assert_eq!(code(&run), 0, "{algo} stderr: {}", stderr(&run));
    }
    let g = read_set_file(dir.path().join("g.txt")).unwrap();
    let m = read_set_file(dir.path().join("m.txt")).unwrap();
    assert!(fi_distance(&g.members()[0], &m.members()[0]).unwrap() < 1e-6);
}

#[test]
fn le_matches_gd_on_commuting_sets() {
    // condition number 1 forces an orthogonal mixing matrix, so the
    // noiseless members share an eigenbasis and commute
    let dir = tempfile::tempdir().unwrap();
    spdbench(
        dir.path(),
        &[
            "generate", "--dim", "6", "--count", "10", "--sigma", "0", "--cond", "1", "--seed",
            "9", "--out", "c.txt",
        ],
    );
    for (algo, out) in [("LE", "le.txt"), ("GD", "gd.txt")] {
        assert_eq!(
            code(&spdbench(
                dir.path(),
                &["mean", "--algo", algo, "--in", "c.txt", "--out", out],
            )),
            0
        );
    }
    let le = read_set_file(dir.path().join("le.txt")).unwrap();
    let gd = read_set_file(dir.path().join("gd.txt")).unwrap();
    assert!(fi_distance(&le.members()[0], &gd.members()[0]).unwrap() < 1e-7);
}

#[test]
fn iteration_cap_maps_to_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    spdbench(
        dir.path(),
        &[
            "generate", "--dim", "6", "--count", "12", "--sigma", "1", "--seed", "5", "--out",
            "s.txt",
        ],
    );
    let run = spdbench(
        dir.path(),
        &["mean", "--algo", "MM", "--in", "s.txt", "--max-iter", "1"],
    );
    assert_eq!(code(&run), 2);
    assert!(stdout(&run).contains("# converged: false"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.txt"), "spdset v1 N=2 K=1\n0 1 0 1\n").unwrap();

    let unknown = spdbench(dir.path(), &["mean", "--algo", "QR", "--in", "s.txt"]);
    assert_eq!(code(&unknown), 1);
    assert!(stderr(&unknown).contains("unknown algorithm"));

    let ajd = spdbench(dir.path(), &["mean", "--algo", "AJD-Pham", "--in", "s.txt"]);
    assert_eq!(code(&ajd), 1);
    assert!(stderr(&ajd).contains("`ajd` subcommand"));

    let missing = spdbench(dir.path(), &["mean", "--algo", "GD"]);
    assert_eq!(code(&missing), 1);
}

#[test]
fn parse_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.txt"),
        "spdset v1 N=2 K=2\n0 1 0 1\n1 1 0\n",
    )
    .unwrap();
    let run = spdbench(dir.path(), &["mean", "--algo", "LE", "--in", "bad.txt"]);
    assert_eq!(code(&run), 1);
    assert!(
        stderr(&run).contains("bad.txt:3:"),
        "stderr: {}",
        stderr(&run)
    );
}

#[test]
fn fig5_csv_is_deterministic_and_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "fig5", "--sigmas", "0.01,0.1", "--dim", "6", "--count", "20", "--seed", "1",
        "--out-dir", "a", "--csv-only",
    ];
    assert_eq!(code(&spdbench(dir.path(), &args)), 0);
    let csv = dir.path().join("a/fig5.csv");
    let bytes = fs::read(&csv).unwrap();
    let header = String::from_utf8(bytes.clone()).unwrap();
    assert!(header.starts_with("sigma,algorithm,iteration,criterion_db\n"));

    let rerun = [
        "fig5", "--sigmas", "0.01,0.1", "--dim", "6", "--count", "20", "--seed", "1",
        "--out-dir", "b", "--csv-only",
    ];
    assert_eq!(code(&spdbench(dir.path(), &rerun)), 0);
    assert_eq!(bytes, fs::read(dir.path().join("b/fig5.csv")).unwrap());
    assert!(!dir.path().join("a/fig5.svg").exists());

    // each algorithm's column decays monotonically, and the diagonalizer
    // stops in strictly fewer iterations than every mean solver
    let rows = csv_rows(&csv);
    let mut last: Option<(String, f64)> = None;
    for r in &rows {
        let key = format!("{},{}", r[0], r[1]);
        let db: f64 = r[3].parse().unwrap();
        if let Some((k, v)) = &last {
            if *k == key {
                assert!(db <= v + 1e-9, "criterion rose in {key}: {v} -> {db}");
            }
        }
        last = Some((key, db));
    }
    for sigma in ["0.01", "0.1"] {
        let max_iter = |algo: &str| {
            rows.iter()
                .filter(|r| r[0] == sigma && r[1] == algo)
                .map(|r| r[2].parse::<usize>().unwrap())
                .max()
                .unwrap()
        };
        let ajd = max_iter("AJD-Pham");
        for solver in ["GD", "MM", "Bha"] {
            assert!(
                ajd < max_iter(solver),
                "sigma {sigma}: AJD-Pham {ajd} vs {solver} {}",
                max_iter(solver)
            );
        }
    }
}

#[test]
fn fig5_cap_flags_and_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let run = spdbench(
        dir.path(),
        &[
            "fig5", "--sigmas", "0.1", "--dim", "6", "--count", "20", "--seed", "1",
            "--max-iter", "3", "--out-dir", "f", "--csv-only",
        ],
    );
    assert_eq!(code(&run), 3);
    let text = fs::read_to_string(dir.path().join("f/fig5.csv")).unwrap();
    assert!(text.contains("# not-reached: sigma=0.1 algorithm="));
}

#[test]
fn fig6_reports_trace_and_determinant_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let run = spdbench(
        dir.path(),
        &[
            "fig6", "--sigmas", "0.05,0.1", "--dim", "8", "--count", "30", "--seed", "2",
            "--out-dir", "f",
        ],
    );
    assert_eq!(code(&run), 0, "stderr: {}", stderr(&run));
    let svg = fs::read_to_string(dir.path().join("f/fig6.svg")).unwrap();
    assert!(svg.starts_with("<svg"));

    let rows = csv_rows(&dir.path().join("f/fig6.csv"));
    for sigma in ["0.05", "0.1"] {
        let get = |algo: &str| {
            let r = rows
                .iter()
                .find(|r| r[0] == sigma && r[1] == algo)
                .unwrap_or_else(|| panic!("missing {algo} at sigma {sigma}"));
            (r[2].parse::<f64>().unwrap(), r[3].parse::<f64>().unwrap())
        };
        let (tr_gd, det_gd) = get("GD");
        let (tr_le, det_le) = get("LE");
        let (tr_ale, det_ale) = get("ALE");
        let (_, det_bha) = get("Bha");
        assert!(tr_le > tr_gd);
        assert!((tr_ale - tr_gd).abs() < (tr_le - tr_gd).abs());
        assert!((det_le - det_gd).abs() < 1e-5);
        assert!((det_ale - det_gd).abs() < 1e-5);
        assert!((det_bha - det_gd).abs() > 0.1, "Bha det too close");
    }
}

#[test]
fn fig7_noiseless_control_collapses_ale() {
    let dir = tempfile::tempdir().unwrap();
    let run = spdbench(
        dir.path(),
        &[
            "fig7", "--sigmas", "0", "--conds", "1,5", "--repeats", "2", "--dim", "6",
            "--count", "12", "--seed", "4", "--out-dir", "f", "--csv-only",
        ],
    );
    assert_eq!(code(&run), 0, "stderr: {}", stderr(&run));
    let rows = csv_rows(&dir.path().join("f/fig7.csv"));
    assert_eq!(rows.len(), 2 * 2 * 3);
    let sorted: Vec<_> = rows
        .iter()
        .map(|r| {
            (
                r[0].parse::<f64>().unwrap().to_bits(),
                r[1].parse::<f64>().unwrap().to_bits(),
                r[2].parse::<usize>().unwrap(),
                r[3].clone(),
            )
        })
        .collect();
    let mut expect = sorted.clone();
    expect.sort();
    assert_eq!(sorted, expect, "rows not sorted");
    for r in &rows {
        let dist: f64 = r[4].parse().unwrap();
        match r[3].as_str() {
            "ALE" => assert!(dist < 1e-6, "ALE off the benchmark: {dist:e}"),
            // orthogonal mixing keeps the noiseless members commuting, so
            // the log-Euclidean mean collapses too
            "LE" if r[1] == "1" => assert!(dist < 1e-6, "LE at cond 1: {dist:e}"),
            _ => {}
        }
    }
}

#[test]
fn props_subcommand_reports_per_property_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let run = spdbench(dir.path(), &["props", "--trials", "4", "--seed", "2024"]);
    assert_eq!(code(&run), 0, "stderr: {}", stderr(&run));
    let out = stdout(&run);
    assert!(out.contains("(expected-fail)"));
    assert!(out.contains("25/25 properties passed"));
    assert!(!out.contains("FAIL "));

    // repeatability of the report
    let again = spdbench(dir.path(), &["props", "--trials", "4", "--seed", "2024"]);
    assert_eq!(stdout(&again), out);
}
