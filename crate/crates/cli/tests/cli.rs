use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use transport_core::instance::read_instance;

const EXAMPLE: &str = "p tp 3 3\ns 30 30 30\nd 20 50 20\nc 5 1 7\nc 1 1 5\nc 6 1 2\n";

fn tpsolve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tpsolve"))
        .args(args)
        .env_remove("TPSOLVE_THREADS")
        .output()
        .expect("run tpsolve")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = path(dir, name);
    fs::write(&p, body).unwrap();
    p
}

fn load(p: &str) -> transport_core::Instance {
    read_instance(fs::read_to_string(p).unwrap().as_bytes()).unwrap()
}

#[test]
fn gen_writes_balanced_instances() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "i.tp");
    let out = tpsolve(&["gen", "--family", "usq", "--m", "300", "--n", "300", "--seed", "1", "--out", &file]);
    assert!(out.status.success());
    let inst = load(&file);
    assert_eq!((inst.m, inst.n), (300, 300));
    assert_eq!(inst.supplies.iter().sum::<i64>(), inst.demands.iter().sum::<i64>());

    let grid = path(&dir, "g.tp");
    assert!(tpsolve(&["gen", "--family", "grid", "--g", "32", "--seed", "7", "--out", &grid]).status.success());
    let inst = load(&grid);
    assert_eq!((inst.m, inst.n), (1024, 1024));

    let rect = path(&dir, "r.tp");
    assert!(tpsolve(&["gen", "--family", "urect", "--m", "20", "--n", "70", "--out", &rect]).status.success());
    assert_eq!((load(&rect).m, load(&rect).n), (20, 70));
}

#[test]
fn gen_usage_errors() {
    let out = tpsolve(&["gen", "--family", "usq", "--m", "10"]);
    assert_eq!(out.status.code(), Some(3));
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "g.tp");
    assert_eq!(tpsolve(&["gen", "--family", "grid", "--out", &file]).status.code(), Some(3));
    assert_eq!(tpsolve(&["gen", "--family", "hex", "--m", "3", "--out", &file]).status.code(), Some(3));
    assert_eq!(tpsolve(&["verify", "--in", &file]).status.code(), Some(3));
    assert_eq!(tpsolve(&["--help"]).status.code(), Some(0));
}

#[test]
fn solve_example() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "ex.tp", EXAMPLE);
    for variant in ["iio+", "iio-", "ns"] {
        let sol = path(&dir, &format!("{variant}.sol"));
        let out = tpsolve(&["solve", "--in", &inst, "--variant", variant, "--init", "mmr", "--out", &sol]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).contains("objective 110"), "{}", stdout(&out));
        assert!(stdout(&out).contains("optimal true"));
        let body = fs::read_to_string(&sol).unwrap();
        assert!(body.starts_with("o 110\n"));
        assert!(tpsolve(&["verify", "--in", &inst, "--solution", &sol, "--check-optimal"]).status.success());
    }
    let out = tpsolve(&["solve", "--in", &inst, "--variant", "simplex2"]);
    assert!(!out.status.success());
    let out = tpsolve(&["solve", "--in", &inst, "--alpha", "0"]);
    assert!(!out.status.success());
}

#[test]
fn solve_variants_agree() {
    let dir = TempDir::new().unwrap();
    let inst = path(&dir, "i.tp");
    assert!(tpsolve(&["gen", "--m", "200", "--seed", "3", "--out", &inst]).status.success());
    let objective = |variant: &str| {
        let sol = path(&dir, "s.sol");
        let out = tpsolve(&["solve", "--in", &inst, "--variant", variant, "--out", &sol]);
        assert!(out.status.success());
        stdout(&out).lines().next().unwrap().to_owned()
    };
    assert_eq!(objective("iio+"), objective("iio-"));
    assert_eq!(objective("iio+"), objective("ns"));
}

#[test]
fn solve_appends_report_rows() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "ex.tp", EXAMPLE);
    let report = path(&dir, "r.csv");
    for variant in ["iio+", "ns"] {
        let out = tpsolve(&["solve", "--in", &inst, "--variant", variant, "--report", &report, "--out", &path(&dir, "s")]);
        assert!(out.status.success());
    }
    let mut rd = csv::Reader::from_path(&report).unwrap();
    let headers = rd.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    assert_eq!(&rows[0][col("instance")], "ex.tp");
    assert_eq!(&rows[0][col("variant")], "iio+");
    assert_eq!(&rows[1][col("variant")], "ns");
    assert!(rows.iter().all(|r| &r[col("objective")] == "110"));
    assert_eq!(&rows[0][col("alpha")], "60");
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "ex.tp", EXAMPLE);
    let optimal = write(&dir, "opt.sol", "o 110\nf 1 2 30\nf 2 1 20\nf 2 2 10\nf 3 2 10\nf 3 3 20\n");
    let out = tpsolve(&["verify", "--in", &inst, "--solution", &optimal, "--check-optimal"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));

    let initial = write(&dir, "init.sol", "o 250\nf 1 1 20\nf 1 2 10\nf 2 2 10\nf 2 3 20\nf 3 2 30\n");
    let out = tpsolve(&["verify", "--in", &inst, "--solution", &initial]);
    assert_eq!(out.status.code(), Some(0));
    let out = tpsolve(&["verify", "--in", &inst, "--solution", &initial, "--check-optimal"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("r(2,1) = -4"), "{}", stdout(&out));

    let off = write(&dir, "off.sol", "f 1 2 31\nf 2 1 20\nf 2 2 10\nf 3 2 10\nf 3 3 20\n");
    let out = tpsolve(&["verify", "--in", &inst, "--solution", &off, "--check-optimal"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("source 1"), "{}", stdout(&out));

    let wrong_z = write(&dir, "z.sol", "o 109\nf 1 2 30\nf 2 1 20\nf 2 2 10\nf 3 2 10\nf 3 3 20\n");
    assert_eq!(tpsolve(&["verify", "--in", &inst, "--solution", &wrong_z]).status.code(), Some(1));
}

fn bench_rows(report: &Path) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut rd = csv::Reader::from_path(report).unwrap();
    let headers = rd.headers().unwrap().clone();
    (headers, rd.records().map(Result::unwrap).collect())
}

#[test]
fn bench_arity_averages_and_determinism() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str, threads: &str| {
        let report = dir.path().join(name);
        let out = tpsolve(&[
            "bench",
            "--sizes",
            "30,40",
            "--seeds",
            "3",
            "--variants",
            "iio+,ns",
            "--threads",
            threads,
            "--report",
            report.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        bench_rows(&report)
    };
    let (headers, rows) = run("a.csv", "1");
    assert_eq!(rows.len(), 12 + 4);
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let runs: Vec<_> = rows.iter().filter(|r| !r[col("instance")].starts_with("avg-")).collect();
    let avgs: Vec<_> = rows.iter().filter(|r| r[col("instance")].starts_with("avg-")).collect();
    assert_eq!((runs.len(), avgs.len()), (12, 4));
    assert!(runs.iter().all(|r| &r[col("optimal")] == "true" && r[col("error")].is_empty()));
    for avg in &avgs {
        let members: Vec<_> = runs
            .iter()
            .filter(|r| r[col("m")] == avg[col("m")] && r[col("variant")] == avg[col("variant")])
            .collect();
        assert_eq!(members.len(), 3);
        for field in ["pivots", "objective", "macro_iterations", "p_length_phase1", "time_seconds"] {
            let mean = members.iter().map(|r| r[col(field)].parse::<f64>().unwrap()).sum::<f64>() / 3.0;
            let got: f64 = avg[col(field)].parse().unwrap();
            assert!((got - mean).abs() <= 1e-9 * mean.abs().max(1.0), "{field}: {got} vs {mean}");
        }
    }
    let (_, again) = run("b.csv", "2");
    let time = col("time_seconds");
    let strip = |r: &csv::StringRecord| -> Vec<String> {
        r.iter().enumerate().filter(|&(k, _)| k != time).map(|(_, v)| v.to_owned()).collect()
    };
    assert_eq!(rows.iter().map(strip).collect::<Vec<_>>(), again.iter().map(strip).collect::<Vec<_>>());
}

#[test]
fn help_lists_subcommands() {
    let out = tpsolve(&["--help"]);
    let text = stdout(&out);
    for cmd in ["gen", "solve", "verify", "bench"] {
        assert!(text.contains(cmd));
    }
    let bench = stdout(&tpsolve(&["bench", "--help"]));
    assert!(bench.contains("TPSOLVE_THREADS"));
}
