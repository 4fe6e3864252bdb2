use std::path::Path;
use std::process::{Command, Output};

use rotorkick::observables::{self, ObservableSeries};
use rotorkick::{io, KickStrengths};
use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotorkick"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn sidecar(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["kick"]).status.code(), Some(0));
    assert_eq!(run(d, &["--help"]).status.code(), Some(0));
    assert_eq!(run(d, &["kick", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(d, &["kick", "--p-eta", "-1"]).status.code(), Some(1));
    assert_eq!(run(d, &["kick", "--workers", "0"]).status.code(), Some(1));
    assert_eq!(run(d, &["kick", "--j0", "1", "--m0", "2"]).status.code(), Some(1));
    assert_eq!(run(d, &["propagate", "--p-eta", "1"]).status.code(), Some(1));
    assert_eq!(run(d, &["kick", "--config", "missing.toml"]).status.code(), Some(1));
    // a basis far too small for the kick cannot hold the norm
    assert_eq!(run(d, &["kick", "--p-eta", "5", "--j-max", "4"]).status.code(), Some(2));
}

#[test]
fn zero_kick_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["kick", "--j0", "2", "--m0", "1", "--out", "wp.csv"]);
    let wp = io::read_wavepacket(&d.join("wp.csv")).unwrap();
    assert_eq!(wp.m(), 1);
    for (j, c) in wp.iter() {
        let expect = if j == 2 { 1.0 } else { 0.0 };
        assert_eq!(c.re, expect);
        assert_eq!(c.im, 0.0);
    }
}

#[test]
fn wavepacket_round_trip_preserves_observables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["kick", "--p-eta", "2.5", "--p-zeta", "1.5", "--out", "wp.csv"]);
    let loaded = io::read_wavepacket(&d.join("wp.csv")).unwrap();
    let direct =
        rotorkick::sudden::kick_wavepacket_auto(rotorkick::InitialState::GROUND, KickStrengths::new(2.5, 1.5).unwrap())
            .unwrap();
    let taus = observables::revival_grid(64);
    let a = ObservableSeries::compute(&loaded, &taus).unwrap();
    let b = ObservableSeries::compute(&direct, &taus).unwrap();
    for k in 0..taus.len() {
        assert!((a.orientation[k] - b.orientation[k]).abs() < 1e-12);
        assert!((a.alignment[k] - b.alignment[k]).abs() < 1e-12);
    }
    let side = sidecar(d, "wp.json");
    assert_eq!(side["kick"]["p_eta"], 2.5);
    assert_eq!(side["run"]["command"], "kick");
    assert!(side["run"]["version"].is_string());
    assert!(side["run"]["wall_time_s"].is_number());
}

#[test]
fn series_method_matches_quadrature() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["kick", "--p-eta", "3", "--j-max", "30", "--out", "q.csv"]);
    ok(d, &["kick", "--p-eta", "3", "--j-max", "30", "--method", "series", "--out", "s.csv"]);
    let q = io::read_wavepacket(&d.join("q.csv")).unwrap();
    let s = io::read_wavepacket(&d.join("s.csv")).unwrap();
    for ((_, a), (_, b)) in q.iter().zip(s.iter()) {
        assert!((a - b).norm() < 1e-10);
    }
}

#[test]
fn output_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for w in ["1", "3"] {
        let q = format!("quilt{w}.csv");
        ok(d, &["quilt", "--p-eta", "0:3:4", "--p-zeta", "0:2:3", "--workers", w, "--out", &q]);
        let c = format!("carpet{w}.csv");
        ok(d, &["carpet", "--p-eta", "2", "--n-theta", "16", "--n-tau", "9", "--workers", w, "--out", &c]);
        let r = format!("scan{w}.csv");
        ok(d, &["resonance", "--p-eta", "1.5", "--n", "50", "--sigma-max", "3", "--workers", w, "--out", &r]);
    }
    for stem in ["quilt", "carpet", "scan", "scan1.resonances"] {
        let (a, b) = if stem.contains('.') {
            ("scan1.resonances.csv".to_owned(), "scan3.resonances.csv".to_owned())
        } else {
            (format!("{stem}1.csv"), format!("{stem}3.csv"))
        };
        assert_eq!(read(d, &a), read(d, &b), "{stem}");
    }
}

#[test]
fn config_file_below_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("run.toml"), "p-eta = 1.0\np_zeta = 0.5\nn-tau = 7\n").unwrap();
    ok(d, &["series", "--config", "run.toml", "--p-eta", "2", "--out", "s.csv"]);
    let side = sidecar(d, "s.json");
    let resolved = &side["run"]["resolved"];
    assert_eq!(resolved["p-eta"]["lo"], 2.0);
    assert_eq!(resolved["p-zeta"]["lo"], 0.5);
    assert_eq!(resolved["n-tau"], 7);
    assert_eq!(io::parse_csv(&read(d, "s.csv")).unwrap().len(), 8);

    std::fs::write(d.join("bad.toml"), "n-tau = \"many\"\n").unwrap();
    assert_eq!(run(d, &["series", "--config", "bad.toml"]).status.code(), Some(1));
}

#[test]
fn file_formats() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["propagate", "--p-eta", "1", "--sigma", "0.3", "--out", "out/p.csv"]);
    let kin = io::parse_csv(&read(d, "out/p.kinetic.csv")).unwrap();
    assert_eq!(kin[0], ["tau", "J2_expect"]);
    let last: f64 = kin.last().unwrap()[1].parse().unwrap();
    assert!(last > 0.0 && last < 2.0 / 3.0 + 1e-3, "{last}");

    ok(d, &["spectrum", "--p-eta", "1", "--out", "sp.csv"]);
    let sp = io::parse_csv(&read(d, "sp.csv")).unwrap();
    assert_eq!(sp[0], ["delta_e", "amplitude", "observable"]);
    assert!(sp.iter().skip(1).any(|r| r[2] == "orientation"));
    assert!(sp.iter().skip(1).any(|r| r[2] == "alignment"));

    ok(d, &["carpet", "--p-eta", "2", "--n-theta", "8", "--n-tau", "5", "--beta-max", "1", "--fractions", "1/2", "--out", "c.csv"]);
    let c = io::parse_csv(&read(d, "c.csv")).unwrap();
    assert_eq!(c.len(), 9);
    assert_eq!(c[0].len(), 6);
    let rays: Value = serde_json::from_str(&read(d, "c.rays.json")).unwrap();
    let kinds: Vec<&str> = rays["rays"]["rays"].as_array().unwrap().iter().map(|r| r["type"].as_str().unwrap()).collect();
    for k in ["classical", "reversed", "fractional"] {
        assert!(kinds.contains(&k), "{k}");
    }

    ok(d, &["quilt", "--p-eta", "0:1:2", "--out", "q.csv"]);
    let q = io::parse_csv(&read(d, "q.csv")).unwrap();
    assert_eq!(q[0].len(), 13);
    assert_eq!(q[0][12], "errors");
    assert_eq!(q.len(), 3);
}
