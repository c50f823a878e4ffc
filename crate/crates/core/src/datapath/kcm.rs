use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::register::Register;
use super::timing::parallel_overhead;
use super::{check_inputs, DatapathError, DatapathResult, KcmConfig, StepKind, TraceEntry};
use crate::params::Widths;

/// Multiples `0 * k, 1 * k, ..., (radix - 1) * k` of a constant `k`.
///
/// Hardware tables use `radix = 2^l`; other radices exist for worked
/// examples in decimal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KcmTable {
    constant: BigUint,
    radix: u32,
    entries: Vec<BigUint>,
}

impl KcmTable {
    /// Fills the table by repeated addition of the constant.
    pub fn new(constant: &BigUint, radix: u32) -> Self {
        assert!(radix >= 2, "radix must be at least 2");
        let mut entries = Vec::with_capacity(radix as usize);
        let mut acc = BigUint::zero();
        for _ in 0..radix {
            entries.push(acc.clone());
            acc += constant;
        }
        KcmTable { constant: constant.clone(), radix, entries }
    }

    pub fn binary(constant: &BigUint, lut_bits: u32) -> Result<Self, DatapathError> {
        if !(2..=8).contains(&lut_bits) {
            return Err(DatapathError::LutBits(lut_bits));
        }
        Ok(KcmTable::new(constant, 1 << lut_bits))
    }

    pub fn constant(&self) -> &BigUint {
        &self.constant
    }

    pub fn radix(&self) -> u32 {
        self.radix
    }

    /// LUT input width when the radix is a power of two.
    pub fn lut_bits(&self) -> Option<u32> {
        self.radix.is_power_of_two().then(|| self.radix.trailing_zeros())
    }

    pub fn entries(&self) -> &[BigUint] {
        &self.entries
    }

    pub fn lookup(&self, digit: u32) -> &BigUint {
        &self.entries[digit as usize]
    }

    /// Storage for one table: `radix` entries of `s_bits + l` bits.
    pub fn memory_bits(&self, s_bits: u32) -> u64 {
        let entry_bits = s_bits + self.lut_bits().unwrap_or_else(|| (self.radix - 1).ilog2() + 1);
        u64::from(self.radix) * u64::from(entry_bits)
    }

    /// Splits `multiplier` into `digits` radix digits (MSD first) and
    /// returns the positioned partial products, whose sum is the product.
    pub fn decompose(&self, multiplier: &BigUint, digits: usize) -> Vec<PartialProduct> {
        let radix = BigUint::from(self.radix);
        digits_msd_first(multiplier, self.radix, digits)
            .into_iter()
            .enumerate()
            .map(|(i, digit)| {
                let position = (digits - 1 - i) as u32;
                let entry = self.lookup(digit).clone();
                let positioned = &entry * radix.pow(position);
                PartialProduct { position, digit, entry, positioned }
            })
            .collect()
    }
}

/// One row of a KCM decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialProduct {
    /// Digit position, 0 for the least significant digit.
    pub position: u32,
    pub digit: u32,
    pub entry: BigUint,
    /// `entry * radix^position`.
    pub positioned: BigUint,
}

/// `count` base-`radix` digits of `value`, most significant first. The
/// value must fit; missing high digits are zero.
pub fn digits_msd_first(value: &BigUint, radix: u32, count: usize) -> Vec<u32> {
    let radix_big = BigUint::from(radix);
    let mut rest = value.clone();
    let mut digits = vec![0u32; count];
    for slot in digits.iter_mut().rev() {
        let d = &rest % &radix_big;
        *slot = d.to_u32().expect("digit below radix");
        rest /= &radix_big;
    }
    assert!(rest.is_zero(), "value has more than {count} digits");
    digits
}

/// The KCM's rows are identical, so the bank stores one table and a count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KcmBank {
    pub table: KcmTable,
    pub count: u64,
}

impl KcmBank {
    pub fn lut_bits(&self) -> u32 {
        self.table.lut_bits().expect("banks are built with binary tables")
    }
}

/// Tables for a `c_bits` challenge: `ceil(c_bits / l)` copies of the
/// multiples of `s`.
pub fn build_kcm_tables(s: &BigUint, lut_bits: u32, c_bits: u32) -> Result<KcmBank, DatapathError> {
    let table = KcmTable::binary(s, lut_bits)?;
    Ok(KcmBank { table, count: u64::from(c_bits.div_ceil(lut_bits)) })
}

/// Register geometry for KCM sums: 32-bit words wide enough for `y`.
pub(super) fn wide_words(widths: &Widths) -> usize {
    (widths.d_bits as usize + 1).div_ceil(32)
}

/// Fully parallel KCM.
///
/// Cycle 0 reads every digit's table at once and positions each partial
/// product by its digit weight. Each following cycle is one level of the
/// pairwise adder tree. The last cycle adds `r`.
pub fn kcm_parallel_respond(
    cfg: KcmConfig,
    bank: &KcmBank,
    n_v: &BigUint,
    r: &BigUint,
    widths: &Widths,
) -> Result<DatapathResult, DatapathError> {
    if cfg.chunked_final_add.is_some() {
        return Err(DatapathError::ChunkedParallel);
    }
    KcmConfig::new(cfg.lut_bits)?;
    let table = &bank.table;
    if table.lut_bits() != Some(cfg.lut_bits) {
        return Err(DatapathError::TableMismatch);
    }
    check_inputs(table.constant(), n_v, r, widths)?;

    let l = cfg.lut_bits;
    let digit_total = widths.c_bits.div_ceil(l) as usize;
    let words = wide_words(widths);
    let digits = digits_msd_first(n_v, table.radix(), digit_total);
    let mut trace = Vec::new();
    let mut cycle = 0u64;

    let mut operands: Vec<Register> = digits
        .iter()
        .enumerate()
        .map(|(i, &digit)| {
            let position = (digit_total - 1 - i) as u32;
            let mut pp = Register::load(table.lookup(digit), 32, words);
            pp.shl(position * l);
            trace.push(TraceEntry {
                cycle,
                kind: StepKind::Lookup,
                position,
                word: 0,
                operand: BigUint::from(digit),
                weight: position * l,
                carry_in: false,
                carry_out: false,
                acc: pp.value(),
            });
            pp
        })
        .collect();
    cycle += 1;

    while operands.len() > 1 {
        let mut next = Vec::with_capacity(operands.len().div_ceil(2));
        let mut it = operands.into_iter();
        while let Some(mut left) = it.next() {
            if let Some(right) = it.next() {
                let operand = right.value();
                left.add(&right);
                trace.push(TraceEntry {
                    cycle,
                    kind: StepKind::TreeAdd,
                    position: next.len() as u32,
                    word: 0,
                    operand,
                    weight: 0,
                    carry_in: false,
                    carry_out: false,
                    acc: left.value(),
                });
            }
            next.push(left);
        }
        operands = next;
        cycle += 1;
    }

    let mut acc = operands.pop().expect("at least one digit");
    acc.add(&Register::load(r, 32, words));
    trace.push(TraceEntry {
        cycle,
        kind: StepKind::FinalAdd,
        position: 0,
        word: 0,
        operand: r.clone(),
        weight: 0,
        carry_in: false,
        carry_out: false,
        acc: acc.value(),
    });
    cycle += 1;

    Ok(DatapathResult { value: acc.value(), steps: cycle, cycles: cycle + parallel_overhead(widths.s_bits), trace })
}
