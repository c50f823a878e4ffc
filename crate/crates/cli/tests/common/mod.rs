#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdout, Command, Output, Stdio};

pub fn gps() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gps"));
    cmd.env_remove("GPS_PROFILE");
    cmd
}

pub fn run(args: &[&str]) -> Output {
    gps().args(args).output().expect("spawn gps")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Value of `metric` for `arch` in key-value output.
pub fn kv_value(text: &str, arch: &str, metric: &str) -> Option<String> {
    let prefix = format!("arch={arch} ");
    let needle = format!(" metric={metric} value=");
    text.lines()
        .find(|l| l.starts_with(&prefix) && l.contains(&needle))
        .map(|l| l.rsplit_once("value=").unwrap().1.to_string())
}

/// Key and coupon files for one prover.
pub struct Prover {
    pub key: PathBuf,
    pub coupons: PathBuf,
}

pub fn make_prover(dir: &Path, name: &str, profile: &str, seed: u64, count: u64) -> Prover {
    let key = dir.join(format!("{name}.gpskey"));
    let coupons = dir.join(format!("{name}.coupons"));
    let out = run(&["keygen", "--profile", profile, "--seed", &seed.to_string(), "--out", key.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "keygen: {}", stderr(&out));
    let out = run(&[
        "coupons",
        "--key",
        key.to_str().unwrap(),
        "--count",
        &count.to_string(),
        "--seed",
        &(seed + 1).to_string(),
        "--out",
        coupons.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "coupons: {}", stderr(&out));
    Prover { key, coupons }
}

/// A `gps serve` child and the address it listens on.
pub struct Server {
    child: Child,
    lines: std::io::Lines<BufReader<ChildStdout>>,
    pub addr: String,
}

impl Server {
    pub fn start(keys: &[&Path], rounds: u64) -> Server {
        let mut cmd = gps();
        cmd.args(["serve", "--seed", "5", "--rounds", &rounds.to_string()]);
        for k in keys {
            cmd.arg("--key").arg(k);
        }
        let mut child = cmd.stdout(Stdio::piped()).stderr(Stdio::inherit()).spawn().expect("spawn serve");
        let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
        let addr = loop {
            let line = lines.next().expect("serve printed its address").unwrap();
            if let Some(a) = line.strip_prefix("listening=") {
                break a.to_string();
            }
        };
        Server { child, lines, addr }
    }

    /// Waits for exit and returns the round lines.
    pub fn finish(mut self) -> (i32, Vec<String>) {
        let rounds: Vec<String> = self.lines.by_ref().map(|l| l.unwrap()).collect();
        let status = self.child.wait().unwrap();
        (status.code().unwrap_or(-1), rounds)
    }

    pub fn auth(&self, prover: &Prover, extra: &[&str]) -> Output {
        let mut cmd = gps();
        cmd.args(["auth", "--connect", &self.addr])
            .arg("--key")
            .arg(&prover.key)
            .arg("--coupons")
            .arg(&prover.coupons)
            .args(extra);
        cmd.output().expect("spawn auth")
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
