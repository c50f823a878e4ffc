//! Runs the three response units on random operands and reports simulated
//! cycles next to the cost model.

use std::fmt::Write as _;
use std::time::Instant;

use anyhow::anyhow;
use gps_core::arith::mul_oracle;
use gps_core::costmodel::{cost_report, OutputFormat};
use gps_core::datapath::{Architecture, Engine, KcmConfig, ResponseUnit, SerialConfig};
use gps_core::params::{random_bits, Widths};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::commands::resolve_seed;
use crate::{BenchArgs, CmdResult, Failure};

/// 320 us at 8 MHz.
pub(crate) const CYCLE_BUDGET: u64 = 2560;

struct Row {
    arch: Architecture,
    steps: u64,
    cycles_min: u64,
    cycles_max: u64,
    latency: u64,
    bytes_per_cycle: f64,
    memory_bits: String,
    area_cells: f64,
    host_ns: f64,
}

impl Row {
    fn within_budget(&self) -> bool {
        self.cycles_max <= CYCLE_BUDGET
    }
}

pub(crate) fn run(args: BenchArgs, format: OutputFormat) -> CmdResult {
    let usage = |e: gps_core::datapath::DatapathError| Failure::Usage(e.into());
    let c_bits = args.challenge_bits.unwrap_or(args.profile.c_bits());
    if c_bits == 0 {
        return Err(Failure::Usage(anyhow!("--challenge-bits must be positive")));
    }
    if args.iterations == 0 {
        return Err(Failure::Usage(anyhow!("--iterations must be at least 1")));
    }
    let serial = SerialConfig::new(args.word_bits).map_err(usage)?;
    let kcm = KcmConfig::new(args.lut_bits).map_err(usage)?;
    let s_bits = args.profile.s_bits();
    let widths = Widths::gps(s_bits, c_bits);
    let seed = resolve_seed(args.seed);

    let mut rows = Vec::new();
    for arch in Architecture::ALL {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let secret = random_bits(&mut rng, s_bits);
        let engine = match arch {
            Architecture::Serial => Engine::Serial(serial),
            Architecture::Parallel => Engine::Parallel(kcm),
            Architecture::Hybrid => Engine::Hybrid(kcm),
        };
        let unit = ResponseUnit::new(engine, &secret, widths).map_err(usage)?;
        let inputs: Vec<_> = (0..args.iterations)
            .map(|_| (random_bits(&mut rng, c_bits), random_bits(&mut rng, widths.d_bits)))
            .collect();

        let start = Instant::now();
        let results = inputs
            .iter()
            .map(|(n_v, r)| unit.respond(n_v, r))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::Internal(e.into()))?;
        let elapsed = start.elapsed();

        for ((n_v, r), res) in inputs.iter().zip(&results) {
            if res.value != r + mul_oracle(n_v, &secret) {
                return Err(Failure::Internal(anyhow!("{arch} unit disagrees with the oracle")));
            }
        }
        let report = cost_report(arch.into(), s_bits, c_bits, args.word_bits, args.lut_bits)
            .map_err(|e| Failure::Internal(e.into()))?;
        rows.push(Row {
            arch,
            steps: results.iter().map(|r| r.steps).max().unwrap_or(0),
            cycles_min: results.iter().map(|r| r.cycles).min().unwrap_or(0),
            cycles_max: results.iter().map(|r| r.cycles).max().unwrap_or(0),
            latency: report.latency_cycles.expect("datapath archs have latency models"),
            bytes_per_cycle: report.throughput.expect("datapath archs have throughput").bytes_per_cycle(),
            memory_bits: report.memory_bits.to_string(),
            area_cells: report.area_cells.expect("datapath archs have area models"),
            host_ns: elapsed.as_nanos() as f64 / args.iterations as f64,
        });
    }

    let out = match format {
        OutputFormat::Text => render_text(&args, c_bits, &widths, seed, &rows),
        OutputFormat::Kv => render_kv(s_bits, &rows),
    };
    match &args.out {
        Some(path) => std::fs::write(path, &out)
            .map_err(|e| Failure::Usage(anyhow::Error::new(e).context(format!("writing {}", path.display()))))?,
        None => print!("{out}"),
    }
    Ok(())
}

fn render_text(args: &BenchArgs, c_bits: u32, widths: &Widths, seed: u64, rows: &[Row]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "profile {}: s={} c={} d={} bits, {} responses per unit, seed {}",
        args.profile.name(),
        widths.s_bits,
        c_bits,
        widths.d_bits,
        args.iterations,
        seed
    )
    .unwrap();
    writeln!(
        out,
        "{:<10}{:>8}{:>10}{:>12}{:>13}{:>13}{:>14}{:>14}",
        "arch", "steps", "cycles", "calibrated", "bytes/cycle", "memory bits", "area (cells)", "<=2560 cycles"
    )
    .unwrap();
    for r in rows {
        let cycles = if r.cycles_min == r.cycles_max {
            r.cycles_max.to_string()
        } else {
            format!("{}-{}", r.cycles_min, r.cycles_max)
        };
        writeln!(
            out,
            "{:<10}{:>8}{:>10}{:>12}{:>13.3}{:>13}{:>14.1}{:>14}",
            r.arch.tag(),
            r.steps,
            cycles,
            r.latency,
            r.bytes_per_cycle,
            r.memory_bits,
            r.area_cells,
            if r.within_budget() { "pass" } else { "FAIL" }
        )
        .unwrap();
    }
    writeln!(out, "host time (speed of this simulation, not of the modelled hardware):").unwrap();
    for r in rows {
        writeln!(out, "  {:<10}{:>12.1} us/response", r.arch.tag(), r.host_ns / 1000.0).unwrap();
    }
    out
}

fn render_kv(s_bits: u32, rows: &[Row]) -> String {
    let mut out = String::new();
    for r in rows {
        let mut kv = |metric: &str, value: String| {
            writeln!(out, "arch={} s_bits={s_bits} metric={metric} value={value}", r.arch.tag()).unwrap();
        };
        kv("steps", r.steps.to_string());
        kv("cycles_min", r.cycles_min.to_string());
        kv("cycles", r.cycles_max.to_string());
        kv("latency_cycles", r.latency.to_string());
        kv("throughput_bytes_per_cycle", format!("{:.6}", r.bytes_per_cycle));
        kv("memory_bits", r.memory_bits.clone());
        kv("area_cells", format!("{:.1}", r.area_cells));
        kv("cycle_budget", CYCLE_BUDGET.to_string());
        kv("within_budget", u8::from(r.within_budget()).to_string());
        kv("host_ns_per_response", format!("{:.0}", r.host_ns));
    }
    out
}
