mod common;

use std::fs;
use std::net::TcpListener;

use common::*;

const GOLDEN_TOY_KEY: &str = include_str!("data/toy_seed7.gpskey");

fn p(path: &std::path::Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn keygen_is_deterministic_under_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.gpskey");
    let b = dir.path().join("b.gpskey");
    for path in [&a, &b] {
        let out = run(&["keygen", "--profile", "s128", "--seed", "7", "--out", p(path)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(stdout(&out).starts_with("id="));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn keygen_toy_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let key = dir.path().join("k.gpskey");
    let out = run(&["keygen", "--profile", "toy", "--seed", "7", "--out", p(&key)]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(&key).unwrap(), GOLDEN_TOY_KEY);
    assert!(stdout(&out).contains("id=548a7246"));
    assert!(stdout(&out).contains("n_bits=64"));
}

#[test]
fn keygen_profile_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let key = dir.path().join("k.gpskey");
    let out = gps().env("GPS_PROFILE", "toy").args(["keygen", "--seed", "7", "--out", p(&key)]).output().unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(&key).unwrap(), GOLDEN_TOY_KEY);
}

#[test]
fn keygen_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["keygen", "--profile", "toy", "--seed", "1"])), 1, "missing --out");
    let key = dir.path().join("k");
    assert_eq!(code(&run(&["keygen", "--profile", "s1024", "--out", p(&key)])), 1);
    let bad = dir.path().join("missing-dir").join("k");
    let out = run(&["keygen", "--profile", "toy", "--seed", "1", "--out", p(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(!stderr(&out).is_empty());
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn missing_seed_is_echoed_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let out = run(&["keygen", "--profile", "toy", "--out", p(&a)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let seed = text.lines().find_map(|l| l.strip_prefix("seed=")).expect("seed echoed");
    let b = dir.path().join("b");
    assert_eq!(code(&run(&["keygen", "--profile", "toy", "--seed", seed, "--out", p(&b)])), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn coupon_files() {
    let dir = tempfile::tempdir().unwrap();
    let key = dir.path().join("k.gpskey");
    assert_eq!(code(&run(&["keygen", "--profile", "s128", "--seed", "7", "--out", p(&key)])), 0);

    let c20 = dir.path().join("c20");
    let out = run(&["coupons", "--key", p(&key), "--count", "20", "--seed", "9", "--out", p(&c20)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(&c20).unwrap();
    assert!(text.starts_with("GPSCOUPONS v1 s128\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("i=")).count(), 20);

    let again = dir.path().join("again");
    run(&["coupons", "--key", p(&key), "--count", "20", "--seed", "9", "--out", p(&again)]);
    assert_eq!(fs::read(&c20).unwrap(), fs::read(&again).unwrap());

    let c1 = dir.path().join("c1");
    assert_eq!(code(&run(&["coupons", "--key", p(&key), "--count", "1", "--seed", "9", "--out", p(&c1)])), 0);
    let one = fs::read_to_string(&c1).unwrap();
    assert_eq!(one.lines().filter(|l| l.starts_with("i=")).count(), 1);
    // coupon 0 does not depend on the set size
    assert_eq!(one.lines().nth(3), text.lines().nth(3));

    let c0 = dir.path().join("c0");
    assert_eq!(code(&run(&["coupons", "--key", p(&key), "--count", "0", "--seed", "9", "--out", p(&c0)])), 1);
    let nokey = dir.path().join("nokey");
    assert_eq!(code(&run(&["coupons", "--key", p(&nokey), "--count", "2", "--out", p(&c0)])), 1);
}

#[test]
fn architectures_agree_on_the_verdict_and_differ_in_cycles() {
    let dir = tempfile::tempdir().unwrap();
    let prover = make_prover(dir.path(), "a", "s128", 7, 10);
    let server = Server::start(&[&prover.key], 3);
    let mut cycles = Vec::new();
    for arch in ["serial", "parallel", "hybrid"] {
        let out = server.auth(&prover, &["--arch", arch, "--format", "kv"]);
        assert_eq!(code(&out), 0, "{arch}: {}", stderr(&out));
        let text = stdout(&out);
        assert_eq!(kv_value(&text, arch, "accepted").as_deref(), Some("1"));
        cycles.push(kv_value(&text, arch, "cycles").unwrap());
    }
    assert_eq!(cycles, ["339", "8", "48"]);
    let (status, rounds) = server.finish();
    assert_eq!(status, 0);
    assert_eq!(rounds, ["round=0 verdict=accept", "round=1 verdict=accept", "round=2 verdict=accept"]);
    assert_eq!(fs::read_to_string(format!("{}.used", prover.coupons.display())).unwrap().trim(), "3");
}

#[test]
fn auth_geometry_flags() {
    let dir = tempfile::tempdir().unwrap();
    let prover = make_prover(dir.path(), "a", "s128", 3, 10);
    let server = Server::start(&[&prover.key], 3);
    let out = server.auth(&prover, &["--arch", "serial", "--word-bits", "32", "--format", "kv"]);
    assert_eq!(code(&out), 0);
    assert_eq!(kv_value(&stdout(&out), "serial", "cycles").as_deref(), Some("204"));
    let out = server.auth(&prover, &["--arch", "hybrid", "--word-bits", "16", "--format", "kv"]);
    assert_eq!(code(&out), 0);
    assert_eq!(kv_value(&stdout(&out), "hybrid", "cycles").as_deref(), Some("62"));
    let trace = dir.path().join("t.trace");
    let out = server.auth(&prover, &["--arch", "parallel", "--lut-bits", "8", "--trace", p(&trace)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("parallel: 7 cycles"), "{}", stdout(&out));
    assert!(fs::read_to_string(&trace).unwrap().contains(":lookup:"));
    assert_eq!(server.finish().0, 0);

    // rejected before any connection is made
    for bad in [
        &["--arch", "parallel", "--word-bits", "16"][..],
        &["--arch", "serial", "--lut-bits", "4"],
        &["--arch", "serial", "--word-bits", "12"],
        &["--arch", "hybrid", "--lut-bits", "9"],
        &["--arch", "systolic"],
    ] {
        let mut cmd = gps();
        cmd.args(["auth", "--connect", "127.0.0.1:9"]).arg("--key").arg(&prover.key);
        cmd.arg("--coupons").arg(&prover.coupons).args(bad);
        assert_eq!(code(&cmd.output().unwrap()), 1, "{bad:?}");
    }
}

#[test]
fn tampered_coupon_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let prover = make_prover(dir.path(), "a", "toy", 11, 3);
    let text = fs::read_to_string(&prover.coupons).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    // give coupon 0 the commitment of coupon 1
    let x1 = lines[4].split_once(" x=").unwrap().1.to_string();
    let head = lines[3].split_once(" x=").unwrap().0.to_string();
    lines[3] = format!("{head} x={x1}");
    fs::write(&prover.coupons, lines.join("\n") + "\n").unwrap();

    let server = Server::start(&[&prover.key], 2);
    let out = server.auth(&prover, &[]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("verdict: reject"));
    let out = server.auth(&prover, &["--arch", "hybrid"]);
    assert_eq!(code(&out), 0, "coupon 1 is intact");
    let (_, rounds) = server.finish();
    assert_eq!(rounds, ["round=0 verdict=reject", "round=1 verdict=accept"]);
}

#[test]
fn unknown_prover_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let known = make_prover(dir.path(), "known", "toy", 21, 2);
    let stranger = make_prover_with_other_id(dir.path(), &known);
    let server = Server::start(&[&known.key], 1);
    let out = server.auth(&stranger, &[]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("no response computed"));
    server.finish();
}

/// Copies a prover's files under a different identifier.
fn make_prover_with_other_id(dir: &std::path::Path, base: &Prover) -> Prover {
    let key_text = fs::read_to_string(&base.key).unwrap();
    let id_line = key_text.lines().nth(1).unwrap();
    let key = dir.join("other.gpskey");
    fs::write(&key, key_text.replace(id_line, "id=00000000")).unwrap();
    let coupons = dir.join("other.coupons");
    fs::copy(&base.coupons, &coupons).unwrap();
    Prover { key, coupons }
}

#[test]
fn several_provers_on_one_verifier() {
    let dir = tempfile::tempdir().unwrap();
    let a = make_prover(dir.path(), "a", "toy", 31, 2);
    // a second identity over the same public parameters
    let b = make_prover_with_other_id(dir.path(), &a);
    let server = Server::start(&[&a.key, &b.key], 2);
    assert_eq!(code(&server.auth(&a, &[])), 0);
    assert_eq!(code(&server.auth(&b, &[])), 0);
    assert_eq!(server.finish().1, ["round=0 verdict=accept", "round=1 verdict=accept"]);
}

#[test]
fn serve_refuses_mixed_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let a = make_prover(dir.path(), "a", "toy", 1, 1);
    let b = make_prover(dir.path(), "b", "toy", 2, 1);
    let out = run(&["serve", "--key", p(&a.key), "--key", p(&b.key), "--rounds", "1"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn coupon_sidecar_and_exhaustion() {
    let dir = tempfile::tempdir().unwrap();
    let prover = make_prover(dir.path(), "a", "toy", 41, 2);
    let server = Server::start(&[&prover.key], 3);
    assert_eq!(code(&server.auth(&prover, &[])), 0);
    assert_eq!(code(&server.auth(&prover, &["--index", "0"])), 0, "explicit slot reuse is allowed");
    let out = server.auth(&prover, &[]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("coupon: 1"));
    let out = server.auth(&prover, &[]);
    assert_eq!(code(&out), 1, "out of coupons");
    assert!(stderr(&out).contains("no unused coupons"));
    assert_eq!(server.finish().0, 0);
}

#[test]
fn transport_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let prover = make_prover(dir.path(), "a", "toy", 51, 2);
    let closed = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = closed.local_addr().unwrap().to_string();
    drop(closed);
    let auth = |addr: &str| {
        let mut cmd = gps();
        cmd.args(["auth", "--connect", addr, "--timeout-ms", "300"]).arg("--key").arg(&prover.key);
        cmd.arg("--coupons").arg(&prover.coupons).output().unwrap()
    };
    assert_eq!(code(&auth(&addr)), 3, "connection refused");

    // a listener that never answers
    let silent = TcpListener::bind("127.0.0.1:0").unwrap();
    let out = auth(&silent.local_addr().unwrap().to_string());
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("timed out"));
}

#[test]
fn bench_latency_columns() {
    for (profile, expected) in
        [("s128", ["339", "8", "48"]), ("s256", ["603", "12", "72"]), ("s512", ["1131", "20", "120"])]
    {
        let out = run(&[
            "bench",
            "--profile",
            profile,
            "--challenge-bits",
            "32",
            "--iterations",
            "5",
            "--seed",
            "1",
            "--format",
            "kv",
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let text = stdout(&out);
        for (arch, want) in ["serial", "parallel", "hybrid"].iter().zip(expected) {
            assert_eq!(kv_value(&text, arch, "cycles").as_deref(), Some(want), "{profile} {arch}");
            assert_eq!(kv_value(&text, arch, "latency_cycles").as_deref(), Some(want));
        }
    }
}

#[test]
fn bench_kv_is_stable_apart_from_host_time() {
    let strip = |o: &std::process::Output| -> Vec<String> {
        stdout(o).lines().filter(|l| !l.contains("metric=host_")).map(str::to_string).collect()
    };
    let a = run(&["bench", "--profile", "toy", "--iterations", "20", "--seed", "4", "--format", "kv"]);
    let b = run(&["bench", "--profile", "toy", "--iterations", "20", "--seed", "4", "--format", "kv"]);
    assert_eq!(strip(&a), strip(&b));
    assert!(strip(&a).iter().all(|l| l.starts_with("arch=") && l.contains(" s_bits=16 metric=")));
}

#[test]
fn bench_text_labels_host_time() {
    let out = run(&["bench", "--profile", "s128", "--iterations", "3", "--seed", "2"]);
    let text = stdout(&out);
    assert!(text.contains("host time"));
    assert!(text.contains("not of the modelled hardware"));
    assert_eq!(text.matches("pass").count(), 3);
    assert_eq!(code(&run(&["bench", "--iterations", "0"])), 1);
    assert_eq!(code(&run(&["bench", "--word-bits", "12"])), 1);
}

#[test]
fn report_default_and_check() {
    let out = run(&["report", "--check"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let latency = text.split("Latency (cycles)").nth(1).unwrap();
    for row in [["128", "339", "8", "48"], ["256", "603", "12", "72"], ["512", "1131", "20", "120"]] {
        let line = latency.lines().find(|l| l.split_whitespace().next() == Some(row[0])).unwrap();
        assert_eq!(line.split_whitespace().collect::<Vec<_>>(), row);
    }
    assert!(text.contains("78.000*"));
    assert!(text.contains("residuals"));
    assert!(text.contains("2300 core cells"));
}

#[test]
fn report_kv_and_drift() {
    let out = run(&["report", "--format", "kv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.lines().all(|l| l.starts_with("arch=") && l.contains(" metric=") && l.contains(" value=")));
    assert_eq!(kv_value(&text, "parallel", "throughput_bytes_per_cycle").as_deref(), Some("30.000000"));
    assert!(text.contains("arch=serial-w8 s_bits=128 metric=latency_cycles value=610"));

    let out = run(&["report", "--check", "--word-bits", "8"]);
    assert_ne!(code(&out), 0);
    assert!(stderr(&out).contains("drift: serial/128 latency_cycles"));
}
