//! Storage formulas, latency/throughput estimators and the linear area
//! model for the response unit architectures.
//!
//! Area is never measured here. It comes from a linear model
//! `cells = a * s_bits + b` whose slopes are fixed and whose intercepts are
//! least-squares fits to the reference area rows in [`TABLE2_REFERENCE`].

mod report;

pub use report::{
    check_table2, coupon_storage_note, render_table2, render_table3, reproduce_table2, reproduce_table3,
    CouponStorageNote, Drift, OutputFormat, Table2, Table2Row, Table3, Table3Row, AREA_TOLERANCE,
};

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use thiserror::Error;

use crate::datapath::{stream_throughput, timing, Architecture, Throughput};
use crate::params::Widths;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostError {
    #[error("no area model for `{0}`")]
    NoAreaModel(CostArch),
    #[error("no latency model for `{0}`")]
    NoLatencyModel(CostArch),
    #[error("LUT input width must be in 1..=32, got {0}")]
    LutBits(u32),
    #[error("unknown architecture `{0}`")]
    UnknownArch(String),
}

/// Architectures the cost model knows about, including the two naive
/// lookup-table multipliers that only have a storage formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CostArch {
    Serial,
    Parallel,
    Hybrid,
    FullLut,
    FixedKeyLut,
}

impl CostArch {
    pub const ALL: [CostArch; 5] =
        [CostArch::Serial, CostArch::Parallel, CostArch::Hybrid, CostArch::FullLut, CostArch::FixedKeyLut];

    pub fn tag(self) -> &'static str {
        match self {
            CostArch::Serial => "serial",
            CostArch::Parallel => "parallel",
            CostArch::Hybrid => "hybrid",
            CostArch::FullLut => "full-lut",
            CostArch::FixedKeyLut => "fixed-key-lut",
        }
    }

    pub fn datapath(self) -> Option<Architecture> {
        match self {
            CostArch::Serial => Some(Architecture::Serial),
            CostArch::Parallel => Some(Architecture::Parallel),
            CostArch::Hybrid => Some(Architecture::Hybrid),
            CostArch::FullLut | CostArch::FixedKeyLut => None,
        }
    }
}

impl From<Architecture> for CostArch {
    fn from(a: Architecture) -> Self {
        match a {
            Architecture::Serial => CostArch::Serial,
            Architecture::Parallel => CostArch::Parallel,
            Architecture::Hybrid => CostArch::Hybrid,
        }
    }
}

impl fmt::Display for CostArch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for CostArch {
    type Err = CostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CostArch::ALL.into_iter().find(|a| a.tag() == s).ok_or_else(|| CostError::UnknownArch(s.to_string()))
    }
}

/// Full lookup table over both operands: `2^(c+s) * (c+s)` bits.
pub fn lut_cost_variable(c_bits: u32, s_bits: u32) -> BigUint {
    let width = c_bits + s_bits;
    (BigUint::from(1u8) << width) * width
}

/// Lookup table over the challenge for a fixed secret: `2^c * (c+s)` bits.
pub fn lut_cost_fixed_key(c_bits: u32, s_bits: u32) -> BigUint {
    (BigUint::from(1u8) << c_bits) * (c_bits + s_bits)
}

/// Storage and adders of a lookup-based multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KcmCost {
    pub table_count: u64,
    pub memory_bits: u64,
    pub adder_count: u64,
    pub adder_bits: u32,
}

fn check_lut(lut_bits: u32) -> Result<(), CostError> {
    if !(1..=32).contains(&lut_bits) {
        return Err(CostError::LutBits(lut_bits));
    }
    Ok(())
}

/// Parallel KCM: `ceil(c/l)` tables of `2^l` entries of `s+l` bits,
/// combined by `ceil(c/l) - 1` adders of `s+l` bits.
pub fn kcm_cost(c_bits: u32, s_bits: u32, lut_bits: u32) -> Result<KcmCost, CostError> {
    check_lut(lut_bits)?;
    let table_count = u64::from(c_bits.div_ceil(lut_bits));
    let entry_bits = s_bits + lut_bits;
    Ok(KcmCost {
        table_count,
        memory_bits: table_count * (1u64 << lut_bits) * u64::from(entry_bits),
        adder_count: table_count.saturating_sub(1),
        adder_bits: entry_bits,
    })
}

/// Hybrid KCM: one table of `2^l` entries of `s+l` bits and one adder.
/// The table count does not depend on the challenge width.
pub fn hybrid_cost(_c_bits: u32, s_bits: u32, lut_bits: u32) -> Result<KcmCost, CostError> {
    check_lut(lut_bits)?;
    let entry_bits = s_bits + lut_bits;
    Ok(KcmCost {
        table_count: 1,
        memory_bits: (1u64 << lut_bits) * u64::from(entry_bits),
        adder_count: 1,
        adder_bits: entry_bits,
    })
}

/// Linear area model `cells = slope * s_bits + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaModel {
    pub slope: f64,
    pub intercept: f64,
}

impl AreaModel {
    pub fn estimate(&self, s_bits: u32) -> f64 {
        self.slope * f64::from(s_bits) + self.intercept
    }
}

pub const SERIAL_AREA: AreaModel = AreaModel { slope: 5.6, intercept: 826.5 };
pub const PARALLEL_AREA: AreaModel = AreaModel { slope: 89.8, intercept: -1211.9 };
pub const HYBRID_AREA: AreaModel = AreaModel { slope: 11.3, intercept: 712.7 };

pub fn area_model(arch: CostArch) -> Result<AreaModel, CostError> {
    match arch {
        CostArch::Serial => Ok(SERIAL_AREA),
        CostArch::Parallel => Ok(PARALLEL_AREA),
        CostArch::Hybrid => Ok(HYBRID_AREA),
        other => Err(CostError::NoAreaModel(other)),
    }
}

pub fn area_estimate(arch: CostArch, s_bits: u32) -> Result<f64, CostError> {
    Ok(area_model(arch)?.estimate(s_bits))
}

/// Least-squares intercept for a fixed slope: `mean(y) - slope * mean(x)`.
pub fn fit_intercept(slope: f64, points: &[(u32, f64)]) -> f64 {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|&(x, _)| f64::from(x)).sum::<f64>() / n;
    let mean_y = points.iter().map(|&(_, y)| y).sum::<f64>() / n;
    mean_y - slope * mean_x
}

/// Reference figures for a 32-bit challenge, per secret size, in
/// (serial, parallel, hybrid) order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub s_bits: u32,
    pub area_cells: [u32; 3],
    pub latency_cycles: [u64; 3],
    pub throughput: [f64; 3],
}

pub const TABLE2_REFERENCE: [ReferenceRow; 3] = [
    ReferenceRow {
        s_bits: 128,
        area_cells: [1546, 10676, 2243],
        latency_cycles: [339, 8, 48],
        throughput: [0.088, 30.0, 0.625],
    },
    ReferenceRow {
        s_bits: 256,
        area_cells: [2253, 21171, 3467],
        latency_cycles: [603, 12, 72],
        throughput: [0.076, 46.0, 0.639],
    },
    ReferenceRow {
        s_bits: 512,
        area_cells: [3698, 44978, 6553],
        latency_cycles: [1131, 20, 120],
        throughput: [0.069, 76.0, 0.650],
    },
];

/// Serial unit area by adder width (rows) and secret size 128/256/512.
/// Carried as data: the ordering between adder widths depends on memory
/// addressing overheads of the target technology.
pub const TABLE3_REFERENCE: [(u32, [u32; 3]); 3] =
    [(8, [1542, 2270, 3745]), (16, [1546, 2253, 3698]), (32, [1934, 2632, 4034])];

/// Reference area points for one architecture.
pub fn reference_area_points(arch: Architecture) -> Vec<(u32, f64)> {
    let col = arch as usize;
    TABLE2_REFERENCE.iter().map(|r| (r.s_bits, f64::from(r.area_cells[col]))).collect()
}

/// Calibrated latency. `param` is the adder width for the serial unit and
/// the LUT input width for the KCM units.
pub fn latency_estimate(arch: CostArch, s_bits: u32, c_bits: u32, param: u32) -> Result<u64, CostError> {
    let widths = Widths::gps(s_bits, c_bits);
    match arch {
        CostArch::Serial => Ok(timing::serial_latency(&widths, param)),
        CostArch::Parallel => Ok(timing::parallel_latency(&widths, param)),
        CostArch::Hybrid => Ok(timing::hybrid_latency(&widths, param, None)),
        other => Err(CostError::NoLatencyModel(other)),
    }
}

/// Everything the cost model says about one architecture at one size.
#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub arch: CostArch,
    pub s_bits: u32,
    pub c_bits: u32,
    /// LUT/ROM bits; for the serial unit this is the stored secret.
    pub memory_bits: BigUint,
    pub adder_count: u64,
    pub adder_bits: u32,
    pub latency_cycles: Option<u64>,
    pub throughput: Option<Throughput>,
    pub area_cells: Option<f64>,
}

/// Builds a report for the given geometry (`word_bits` for serial,
/// `lut_bits` for the KCM units).
pub fn cost_report(
    arch: CostArch,
    s_bits: u32,
    c_bits: u32,
    word_bits: u32,
    lut_bits: u32,
) -> Result<CostReport, CostError> {
    let widths = Widths::gps(s_bits, c_bits);
    let (memory_bits, adder_count, adder_bits) = match arch {
        CostArch::Serial => (BigUint::from(s_bits), 1, word_bits),
        CostArch::Parallel => {
            let k = kcm_cost(c_bits, s_bits, lut_bits)?;
            (BigUint::from(k.memory_bits), k.adder_count, k.adder_bits)
        }
        CostArch::Hybrid => {
            let k = hybrid_cost(c_bits, s_bits, lut_bits)?;
            (BigUint::from(k.memory_bits), k.adder_count, k.adder_bits)
        }
        CostArch::FullLut => (lut_cost_variable(c_bits, s_bits), 0, 0),
        CostArch::FixedKeyLut => (lut_cost_fixed_key(c_bits, s_bits), 0, 0),
    };
    let param = if arch == CostArch::Serial { word_bits } else { lut_bits };
    let latency_cycles = latency_estimate(arch, s_bits, c_bits, param).ok();
    let throughput = match (arch.datapath(), latency_cycles) {
        (Some(a), Some(lat)) => Some(stream_throughput(a, lat, &widths)),
        _ => None,
    };
    Ok(CostReport {
        arch,
        s_bits,
        c_bits,
        memory_bits,
        adder_count,
        adder_bits,
        latency_cycles,
        throughput,
        area_cells: area_estimate(arch, s_bits).ok(),
    })
}
