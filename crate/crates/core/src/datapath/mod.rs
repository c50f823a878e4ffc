//! Bit-accurate, cycle-counting models of the prover's response unit
//! `y = r + n_v * s`.
//!
//! Three architectures are modelled:
//!
//! * [`serial_respond`]: shift-and-add over a `w`-bit adder. Every challenge
//!   bit costs `ceil(s_bits / w)` word cycles whether the multiplexer selects
//!   a secret word or zero, and the same adder then adds `r` in
//!   `ceil(d_bits / w)` word cycles.
//! * [`kcm_parallel_respond`]: constant-coefficient multiplier. The
//!   challenge is cut into `l`-bit digits, all digits are looked up at once,
//!   the positioned partial products are reduced by an adder tree and `r` is
//!   added last. Pipelined, so one response leaves the unit per cycle.
//! * [`kcm_hybrid_respond`]: the same table used serially, one digit per
//!   cycle with a shift-and-accumulate register, then one add of `r`.
//!
//! Each model counts the cycles its structure needs (`steps`) and adds a
//! calibrated control overhead to obtain `cycles`; see [`timing`].

mod hybrid;
mod kcm;
mod register;
mod serial;
pub mod timing;

pub use hybrid::kcm_hybrid_respond;
pub use kcm::{build_kcm_tables, digits_msd_first, kcm_parallel_respond, KcmBank, KcmTable, PartialProduct};
pub use serial::serial_respond;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use thiserror::Error;

use crate::params::Widths;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatapathError {
    #[error("unsupported adder width {0} (expected 8, 16 or 32)")]
    WordBits(u32),
    #[error("unsupported LUT input width {0} (expected 2..=8)")]
    LutBits(u32),
    #[error("{name} does not fit in {bits} bits")]
    OperandTooWide { name: &'static str, bits: u32 },
    #[error("commitment width {d_bits} cannot hold an {s_bits}x{c_bits}-bit product")]
    Widths { s_bits: u32, c_bits: u32, d_bits: u32 },
    #[error("table constant does not match the secret width")]
    TableMismatch,
    #[error("chunked final addition is only available on the hybrid unit")]
    ChunkedParallel,
    #[error("unknown architecture `{0}` (expected serial, parallel or hybrid)")]
    UnknownArchitecture(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Architecture {
    Serial,
    Parallel,
    Hybrid,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::Serial, Architecture::Parallel, Architecture::Hybrid];

    pub fn tag(self) -> &'static str {
        match self {
            Architecture::Serial => "serial",
            Architecture::Parallel => "parallel",
            Architecture::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Architecture {
    type Err = DatapathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| DatapathError::UnknownArchitecture(s.to_string()))
    }
}

/// Serial unit geometry: adder and bus width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SerialConfig {
    pub word_bits: u32,
}

impl SerialConfig {
    pub fn new(word_bits: u32) -> Result<Self, DatapathError> {
        if ![8, 16, 32].contains(&word_bits) {
            return Err(DatapathError::WordBits(word_bits));
        }
        Ok(SerialConfig { word_bits })
    }
}

impl Default for SerialConfig {
    fn default() -> Self {
        SerialConfig { word_bits: 16 }
    }
}

/// KCM geometry: LUT input width, plus the optional word-serial final
/// addition of the hybrid unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KcmConfig {
    pub lut_bits: u32,
    pub chunked_final_add: Option<u32>,
}

impl KcmConfig {
    pub fn new(lut_bits: u32) -> Result<Self, DatapathError> {
        if !(2..=8).contains(&lut_bits) {
            return Err(DatapathError::LutBits(lut_bits));
        }
        Ok(KcmConfig { lut_bits, chunked_final_add: None })
    }

    /// Adds `r` through a `word_bits` adder instead of one wide add.
    pub fn with_chunked_final_add(mut self, word_bits: u32) -> Result<Self, DatapathError> {
        SerialConfig::new(word_bits)?;
        self.chunked_final_add = Some(word_bits);
        Ok(self)
    }
}

impl Default for KcmConfig {
    fn default() -> Self {
        KcmConfig { lut_bits: 4, chunked_final_add: None }
    }
}

/// What a trace entry did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    /// Serial: a secret word went through the adder.
    Add,
    /// Serial: the multiplexer selected zero; the cycle is still spent.
    Skip,
    /// KCM: table read for one challenge digit.
    Lookup,
    /// Parallel: one adder of the reduction tree.
    TreeAdd,
    /// Hybrid: shift the accumulator by one digit and add a table entry.
    Accumulate,
    /// Addition of the commitment `r`.
    FinalAdd,
}

impl StepKind {
    pub fn tag(self) -> &'static str {
        match self {
            StepKind::Add => "add",
            StepKind::Skip => "skip",
            StepKind::Lookup => "lookup",
            StepKind::TreeAdd => "tree",
            StepKind::Accumulate => "acc",
            StepKind::FinalAdd => "final",
        }
    }
}

/// One recorded datapath event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub cycle: u64,
    pub kind: StepKind,
    /// Challenge bit (serial) or digit (KCM) position, counted from the LSB.
    pub position: u32,
    /// Word index within the operand for word-serial steps.
    pub word: u32,
    /// Value fed to the adder or table: a secret or `r` word, a digit, or a
    /// tree operand.
    pub operand: BigUint,
    /// Bit weight of `operand` in the final result, for word adds.
    pub weight: u32,
    pub carry_in: bool,
    pub carry_out: bool,
    /// Accumulator (or partial product register) after the step.
    pub acc: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatapathResult {
    pub value: BigUint,
    /// Cycles the modelled structure needs.
    pub steps: u64,
    /// `steps` plus the calibrated control overhead.
    pub cycles: u64,
    pub trace: Vec<TraceEntry>,
}

impl DatapathResult {
    pub fn overhead(&self) -> u64 {
        self.cycles - self.steps
    }

    /// One line per trace entry: `<cycle>:<step-kind>:<operand-hex>:<acc-hex>`.
    pub fn dump_trace(&self) -> String {
        let mut out = String::new();
        for e in &self.trace {
            out.push_str(&format!("{}:{}:{:x}:{:x}\n", e.cycle, e.kind.tag(), e.operand, e.acc));
        }
        out
    }
}

/// Bytes of response produced per cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Throughput {
    pub output_bits: u64,
    pub cycles: u64,
}

impl Throughput {
    pub fn bytes_per_cycle(&self) -> f64 {
        self.output_bits as f64 / 8.0 / self.cycles as f64
    }
}

/// Streaming throughput: serial and hybrid emit one response per latency,
/// the pipelined parallel unit one per cycle.
pub fn stream_throughput(arch: Architecture, latency: u64, widths: &Widths) -> Throughput {
    let cycles = match arch {
        Architecture::Parallel => 1,
        Architecture::Serial | Architecture::Hybrid => latency,
    };
    Throughput { output_bits: u64::from(widths.output_bits()), cycles }
}

/// Architecture together with its geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Serial(SerialConfig),
    Parallel(KcmConfig),
    Hybrid(KcmConfig),
}

impl Engine {
    /// Default geometry: 16-bit serial adder, 4-input LUTs.
    pub fn default_for(arch: Architecture) -> Self {
        match arch {
            Architecture::Serial => Engine::Serial(SerialConfig::default()),
            Architecture::Parallel => Engine::Parallel(KcmConfig::default()),
            Architecture::Hybrid => Engine::Hybrid(KcmConfig::default()),
        }
    }

    pub fn architecture(&self) -> Architecture {
        match self {
            Engine::Serial(_) => Architecture::Serial,
            Engine::Parallel(_) => Architecture::Parallel,
            Engine::Hybrid(_) => Architecture::Hybrid,
        }
    }
}

/// Prover response unit specialised to one secret. KCM tables are built
/// once and shared read-only.
#[derive(Debug, Clone)]
pub struct ResponseUnit {
    engine: Engine,
    widths: Widths,
    secret: BigUint,
    bank: Option<Arc<KcmBank>>,
}

impl ResponseUnit {
    pub fn new(engine: Engine, secret: &BigUint, widths: Widths) -> Result<Self, DatapathError> {
        check_widths(&widths)?;
        check_operand("secret", secret, widths.s_bits)?;
        let bank = match engine {
            Engine::Serial(_) => None,
            Engine::Parallel(cfg) if cfg.chunked_final_add.is_some() => return Err(DatapathError::ChunkedParallel),
            Engine::Parallel(cfg) | Engine::Hybrid(cfg) => {
                Some(Arc::new(build_kcm_tables(secret, cfg.lut_bits, widths.c_bits)?))
            }
        };
        Ok(ResponseUnit { engine, widths, secret: secret.clone(), bank })
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn widths(&self) -> Widths {
        self.widths
    }

    pub fn respond(&self, n_v: &BigUint, r: &BigUint) -> Result<DatapathResult, DatapathError> {
        match (self.engine, &self.bank) {
            (Engine::Serial(cfg), _) => serial_respond(cfg, &self.secret, n_v, r, &self.widths),
            (Engine::Parallel(cfg), Some(bank)) => kcm_parallel_respond(cfg, bank, n_v, r, &self.widths),
            (Engine::Hybrid(cfg), Some(bank)) => kcm_hybrid_respond(cfg, &bank.table, n_v, r, &self.widths),
            _ => unreachable!("KCM engines always carry tables"),
        }
    }
}

pub(crate) fn check_widths(widths: &Widths) -> Result<(), DatapathError> {
    if widths.s_bits == 0 || widths.c_bits == 0 || widths.d_bits < widths.s_bits + widths.c_bits {
        return Err(DatapathError::Widths { s_bits: widths.s_bits, c_bits: widths.c_bits, d_bits: widths.d_bits });
    }
    Ok(())
}

pub(crate) fn check_operand(name: &'static str, v: &BigUint, bits: u32) -> Result<(), DatapathError> {
    if v.bits() > u64::from(bits) {
        return Err(DatapathError::OperandTooWide { name, bits });
    }
    Ok(())
}

pub(crate) fn check_inputs(s: &BigUint, n_v: &BigUint, r: &BigUint, widths: &Widths) -> Result<(), DatapathError> {
    check_widths(widths)?;
    check_operand("secret", s, widths.s_bits)?;
    check_operand("challenge", n_v, widths.c_bits)?;
    check_operand("commitment", r, widths.d_bits)
}
