//! Comparison tables: area/latency/throughput per architecture and the
//! serial adder-width scenario.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{area_model, cost_report, AreaModel, TABLE2_REFERENCE, TABLE3_REFERENCE};
use crate::datapath::{timing, Architecture, Throughput};
use crate::params::Widths;

/// Largest accepted relative deviation of the area model from a reference
/// area.
pub const AREA_TOLERANCE: f64 = 0.06;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Kv,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "kv" => Ok(OutputFormat::Kv),
            other => Err(format!("unknown format `{other}` (expected text or kv)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table2Row {
    pub s_bits: u32,
    /// Indexed by `Architecture as usize`.
    pub area_cells: [f64; 3],
    /// `(model - reference) / reference`, when a reference exists.
    pub area_residual: Option<[f64; 3]>,
    pub latency_cycles: [u64; 3],
    pub throughput: [Throughput; 3],
    pub memory_bits: [u64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table2 {
    pub c_bits: u32,
    pub word_bits: u32,
    pub lut_bits: u32,
    pub rows: Vec<Table2Row>,
}

pub fn reproduce_table2(sizes: &[u32], c_bits: u32, word_bits: u32, lut_bits: u32) -> Table2 {
    let rows = sizes
        .iter()
        .map(|&s_bits| {
            let reports = Architecture::ALL.map(|a| {
                cost_report(a.into(), s_bits, c_bits, word_bits, lut_bits).expect("datapath archs have full models")
            });
            let reference = TABLE2_REFERENCE.iter().find(|r| r.s_bits == s_bits && c_bits == 32);
            let area_cells = reports.each_ref().map(|r| r.area_cells.expect("area model"));
            let area_residual = reference
                .map(|r| [0, 1, 2].map(|i| (area_cells[i] - f64::from(r.area_cells[i])) / f64::from(r.area_cells[i])));
            Table2Row {
                s_bits,
                area_cells,
                area_residual,
                latency_cycles: reports.each_ref().map(|r| r.latency_cycles.expect("latency model")),
                throughput: reports.each_ref().map(|r| r.throughput.expect("throughput model")),
                memory_bits: reports.each_ref().map(|r| u64::try_from(&r.memory_bits).expect("small tables")),
            }
        })
        .collect();
    Table2 { c_bits, word_bits, lut_bits, rows }
}

/// Reproduced value that left its committed expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct Drift {
    pub arch: Architecture,
    pub s_bits: u32,
    pub metric: &'static str,
    pub expected: String,
    pub got: String,
}

/// Committed throughput expectation. The reference lists 76 for the
/// parallel unit at 512 bits, but one 624-bit response per cycle is 78
/// bytes per cycle; 78 is what the model is held to.
fn expected_throughput(arch: Architecture, s_bits: u32, reference: f64) -> f64 {
    if arch == Architecture::Parallel && s_bits == 512 {
        78.0
    } else {
        reference
    }
}

/// Compares a reproduced table against the reference rows: latency exact,
/// throughput to three decimals, area within [`AREA_TOLERANCE`].
pub fn check_table2(table: &Table2) -> Vec<Drift> {
    let mut drifts = Vec::new();
    for reference in TABLE2_REFERENCE.iter() {
        let Some(row) = table.rows.iter().find(|r| r.s_bits == reference.s_bits) else {
            continue;
        };
        for arch in Architecture::ALL {
            let i = arch as usize;
            let mut push = |metric, expected: String, got: String| {
                drifts.push(Drift { arch, s_bits: row.s_bits, metric, expected, got });
            };
            if row.latency_cycles[i] != reference.latency_cycles[i] {
                push("latency_cycles", reference.latency_cycles[i].to_string(), row.latency_cycles[i].to_string());
            }
            let want = format!("{:.3}", expected_throughput(arch, row.s_bits, reference.throughput[i]));
            let got = format!("{:.3}", row.throughput[i].bytes_per_cycle());
            if want != got {
                push("throughput_bytes_per_cycle", want, got);
            }
            let residual =
                (row.area_cells[i] - f64::from(reference.area_cells[i])) / f64::from(reference.area_cells[i]);
            if residual.abs() > AREA_TOLERANCE {
                push("area_cells", format!("{} +/- 6%", reference.area_cells[i]), format!("{:.1}", row.area_cells[i]));
            }
        }
    }
    drifts
}

fn throughput_flag(arch: Architecture, s_bits: u32) -> bool {
    TABLE2_REFERENCE.iter().any(|r| {
        r.s_bits == s_bits
            && format!("{:.3}", r.throughput[arch as usize])
                != format!("{:.3}", expected_throughput(arch, s_bits, r.throughput[arch as usize]))
    })
}

pub fn render_table2(table: &Table2, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => render_table2_text(table),
        OutputFormat::Kv => render_table2_kv(table),
    }
}

fn header(out: &mut String, title: &str) {
    writeln!(out, "{title:<28}{:>10}{:>12}{:>10}", "serial", "parallel", "hybrid").unwrap();
}

fn render_table2_text(table: &Table2) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "Area, latency and throughput for a {}-bit challenge (serial adder {} bits, KCM LUT {} inputs)",
        table.c_bits, table.word_bits, table.lut_bits
    )
    .unwrap();
    out.push('\n');

    header(&mut out, "Area estimate (core cells)");
    for row in &table.rows {
        let [a, b, c] = row.area_cells;
        writeln!(out, "  {:<26}{a:>10.1}{b:>12.1}{c:>10.1}", row.s_bits).unwrap();
    }
    out.push('\n');

    header(&mut out, "Latency (cycles)");
    for row in &table.rows {
        let [a, b, c] = row.latency_cycles;
        writeln!(out, "  {:<26}{a:>10}{b:>12}{c:>10}", row.s_bits).unwrap();
    }
    out.push('\n');

    header(&mut out, "Throughput (bytes/cycle)");
    let mut flagged = Vec::new();
    for row in &table.rows {
        let cells: Vec<String> = Architecture::ALL
            .iter()
            .map(|&a| {
                let v = format!("{:.3}", row.throughput[a as usize].bytes_per_cycle());
                if table.c_bits == 32 && throughput_flag(a, row.s_bits) {
                    flagged.push((a, row.s_bits));
                    v + "*"
                } else {
                    v
                }
            })
            .collect();
        writeln!(out, "  {:<26}{:>10}{:>12}{:>10}", row.s_bits, cells[0], cells[1], cells[2]).unwrap();
    }
    for (a, s) in flagged {
        let reference = TABLE2_REFERENCE.iter().find(|r| r.s_bits == s).expect("flag implies reference");
        writeln!(
            out,
            "  * {a}/{s}: one {}-bit response per cycle; the reference table lists {}",
            Widths::gps(s, table.c_bits).output_bits(),
            reference.throughput[a as usize]
        )
        .unwrap();
    }
    out.push('\n');

    header(&mut out, "Table memory (bits)");
    for row in &table.rows {
        let [a, b, c] = row.memory_bits;
        writeln!(out, "  {:<26}{a:>10}{b:>12}{c:>10}", row.s_bits).unwrap();
    }
    out.push('\n');

    writeln!(out, "Area model: cells = a * |s| + b, b fitted by least squares").unwrap();
    for arch in Architecture::ALL {
        let AreaModel { slope, intercept } = area_model(arch.into()).expect("area model");
        write!(out, "  {:<10}a={slope:<6} b={intercept:<8}", arch.tag()).unwrap();
        let residuals: Vec<String> = table
            .rows
            .iter()
            .filter_map(|r| r.area_residual.map(|res| format!("{}:{:+.2}%", r.s_bits, res[arch as usize] * 100.0)))
            .collect();
        if !residuals.is_empty() {
            write!(out, " residuals {}", residuals.join(" ")).unwrap();
        }
        out.push('\n');
    }
    out
}

fn kv(out: &mut String, arch: impl std::fmt::Display, s_bits: u32, metric: &str, value: impl std::fmt::Display) {
    writeln!(out, "arch={arch} s_bits={s_bits} metric={metric} value={value}").unwrap();
}

fn render_table2_kv(table: &Table2) -> String {
    let mut out = String::new();
    for row in &table.rows {
        for arch in Architecture::ALL {
            let i = arch as usize;
            kv(&mut out, arch, row.s_bits, "area_cells", format!("{:.1}", row.area_cells[i]));
            if let Some(res) = row.area_residual {
                kv(&mut out, arch, row.s_bits, "area_residual_pct", format!("{:.2}", res[i] * 100.0));
            }
            kv(&mut out, arch, row.s_bits, "latency_cycles", row.latency_cycles[i]);
            kv(
                &mut out,
                arch,
                row.s_bits,
                "throughput_bytes_per_cycle",
                format!("{:.6}", row.throughput[i].bytes_per_cycle()),
            );
            kv(&mut out, arch, row.s_bits, "memory_bits", row.memory_bits[i]);
        }
    }
    for arch in Architecture::ALL {
        let m = area_model(arch.into()).expect("area model");
        kv(&mut out, arch, 0, "area_slope", m.slope);
        kv(&mut out, arch, 0, "area_intercept", m.intercept);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table3Row {
    pub word_bits: u32,
    pub steps: [u64; 3],
    pub latency_cycles: [u64; 3],
    /// Measured area, carried as reference data only.
    pub reference_area: [u32; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table3 {
    pub c_bits: u32,
    pub sizes: [u32; 3],
    pub rows: Vec<Table3Row>,
}

/// Serial unit across adder widths 8/16/32 for 128/256/512-bit secrets.
pub fn reproduce_table3(c_bits: u32) -> Table3 {
    let sizes = [128, 256, 512];
    let rows = TABLE3_REFERENCE
        .iter()
        .map(|&(word_bits, reference_area)| {
            let widths = sizes.map(|s| Widths::gps(s, c_bits));
            Table3Row {
                word_bits,
                steps: widths.map(|w| timing::serial_steps(&w, word_bits)),
                latency_cycles: widths.map(|w| timing::serial_latency(&w, word_bits)),
                reference_area,
            }
        })
        .collect();
    Table3 { c_bits, sizes, rows }
}

pub fn render_table3(table: &Table3, format: OutputFormat) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Text => {
            writeln!(out, "Serial unit by adder width, {}-bit challenge", table.c_bits).unwrap();
            let [a, b, c] = table.sizes;
            writeln!(out, "{:<28}{a:>10}{b:>12}{c:>10}", "Latency (cycles)").unwrap();
            for row in &table.rows {
                let [x, y, z] = row.latency_cycles;
                writeln!(out, "  {:<26}{x:>10}{y:>12}{z:>10}", format!("{}-bit adder", row.word_bits)).unwrap();
            }
            writeln!(out, "{:<28}{a:>10}{b:>12}{c:>10}", "Reference area (core cells)").unwrap();
            for row in &table.rows {
                let [x, y, z] = row.reference_area;
                writeln!(out, "  {:<26}{x:>10}{y:>12}{z:>10}", format!("{}-bit adder", row.word_bits)).unwrap();
            }
            writeln!(out, "  (measured figures, not model output: memory addressing makes 16 bits smaller than 8)")
                .unwrap();
        }
        OutputFormat::Kv => {
            for row in &table.rows {
                let arch = format!("serial-w{}", row.word_bits);
                for (i, &s) in table.sizes.iter().enumerate() {
                    kv(&mut out, &arch, s, "steps", row.steps[i]);
                    kv(&mut out, &arch, s, "latency_cycles", row.latency_cycles[i]);
                    kv(&mut out, &arch, s, "reference_area_cells", row.reference_area[i]);
                }
            }
        }
    }
    out
}

/// Storage estimate for a coupon set held in hardware.
#[derive(Debug, Clone, PartialEq)]
pub struct CouponStorageNote {
    pub count: u64,
    pub coupon_nand: f64,
    pub prng_nand: f64,
    pub core_cells: f64,
    /// True when `count` is not the 20-coupon reference point.
    pub extrapolated: bool,
}

const REFERENCE_COUPONS: u64 = 20;
const REFERENCE_COUPON_NAND: f64 = 1000.0;
const REFERENCE_PRNG_NAND: f64 = 1000.0;
const REFERENCE_CORE_CELLS: f64 = 2300.0;

/// Reference point: 20 coupons take 1000 NAND equivalents plus 1000 for
/// the PRNG, about 2300 core cells. Other counts scale the coupon part
/// linearly and keep the PRNG fixed.
pub fn coupon_storage_note(count: u64) -> CouponStorageNote {
    if count == 0 {
        return CouponStorageNote { count, coupon_nand: 0.0, prng_nand: 0.0, core_cells: 0.0, extrapolated: false };
    }
    let coupon_nand = REFERENCE_COUPON_NAND * count as f64 / REFERENCE_COUPONS as f64;
    let cells_per_nand = REFERENCE_CORE_CELLS / (REFERENCE_COUPON_NAND + REFERENCE_PRNG_NAND);
    CouponStorageNote {
        count,
        coupon_nand,
        prng_nand: REFERENCE_PRNG_NAND,
        core_cells: (coupon_nand + REFERENCE_PRNG_NAND) * cells_per_nand,
        extrapolated: count != REFERENCE_COUPONS,
    }
}

impl std::fmt::Display for CouponStorageNote {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.count == 0 {
            return write!(f, "coupon storage: no coupons, no storage");
        }
        write!(
            f,
            "coupon storage: {} coupons ~ {:.0} NAND + {:.0} NAND PRNG ~ {:.0} core cells{}; \
             seeded regeneration keeps a 128-bit seed",
            self.count,
            self.coupon_nand,
            self.prng_nand,
            self.core_cells,
            if self.extrapolated { " (linear extrapolation from 20 coupons)" } else { "" }
        )
    }
}
