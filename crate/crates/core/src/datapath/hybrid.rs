use num_bigint::BigUint;

use super::kcm::{digits_msd_first, wide_words, KcmTable};
use super::register::Register;
use super::timing::hybrid_overhead;
use super::{check_inputs, DatapathError, DatapathResult, KcmConfig, SerialConfig, StepKind, TraceEntry};
use crate::params::Widths;

/// Serialised KCM: a single table driven one `l`-bit challenge digit per
/// cycle, MSD first, `acc = (acc << l) + table[digit]`. The same adder then
/// adds `r`, either in one wide cycle or in `ceil(d_bits / w)` word cycles
/// when `chunked_final_add` is set.
pub fn kcm_hybrid_respond(
    cfg: KcmConfig,
    table: &KcmTable,
    n_v: &BigUint,
    r: &BigUint,
    widths: &Widths,
) -> Result<DatapathResult, DatapathError> {
    KcmConfig::new(cfg.lut_bits)?;
    if let Some(w) = cfg.chunked_final_add {
        SerialConfig::new(w)?;
    }
    if table.lut_bits() != Some(cfg.lut_bits) {
        return Err(DatapathError::TableMismatch);
    }
    check_inputs(table.constant(), n_v, r, widths)?;

    let l = cfg.lut_bits;
    let digit_total = widths.c_bits.div_ceil(l) as usize;
    let words = wide_words(widths);
    let mut acc = Register::zero(32, words);
    let mut trace = Vec::with_capacity(digit_total + 1);
    let mut cycle = 0u64;

    for (i, digit) in digits_msd_first(n_v, table.radix(), digit_total).into_iter().enumerate() {
        acc.shl(l);
        acc.add(&Register::load(table.lookup(digit), 32, words));
        trace.push(TraceEntry {
            cycle,
            kind: StepKind::Accumulate,
            position: (digit_total - 1 - i) as u32,
            word: 0,
            operand: BigUint::from(digit),
            weight: 0,
            carry_in: false,
            carry_out: false,
            acc: acc.value(),
        });
        cycle += 1;
    }

    let value = match cfg.chunked_final_add {
        None => {
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
            acc.value()
        }
        Some(w) => {
            let d_words = widths.d_bits.div_ceil(w) as usize;
            let mut narrow = Register::load(&acc.value(), w, d_words + 1);
            let commitment = Register::load(r, w, d_words);
            let mut carry = 0;
            for k in 0..d_words {
                let operand = commitment.word(k);
                let carry_in = carry;
                carry = narrow.add_word(k, operand, carry_in);
                trace.push(TraceEntry {
                    cycle,
                    kind: StepKind::FinalAdd,
                    position: 0,
                    word: k as u32,
                    operand: BigUint::from(operand),
                    weight: k as u32 * w,
                    carry_in: carry_in != 0,
                    carry_out: carry != 0,
                    acc: narrow.value(),
                });
                cycle += 1;
            }
            narrow.propagate(d_words, carry);
            narrow.value()
        }
    };

    Ok(DatapathResult { value, steps: cycle, cycles: cycle + hybrid_overhead(widths.s_bits), trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::mul_oracle;

    #[test]
    fn single_top_digit() {
        let w = Widths::gps(16, 8);
        let s = BigUint::from(0xa5a5u32);
        let table = KcmTable::binary(&s, 4).unwrap();
        for d in 1u32..16 {
            let n_v = BigUint::from(d << 4);
            let out = kcm_hybrid_respond(KcmConfig::default(), &table, &n_v, &BigUint::ZERO, &w).unwrap();
            assert_eq!(out.value, table.lookup(d) << (8 - 4));
        }
    }

    #[test]
    fn exhaustive_six_by_four_with_two_bit_lut() {
        let w = Widths::gps(6, 4);
        let cfg = KcmConfig::new(2).unwrap();
        let r = BigUint::from(0x1234_5678u32);
        for s in 0u32..64 {
            let s = BigUint::from(s);
            let table = KcmTable::binary(&s, 2).unwrap();
            for n_v in 0u32..16 {
                let n_v = BigUint::from(n_v);
                let out = kcm_hybrid_respond(cfg, &table, &n_v, &r, &w).unwrap();
                assert_eq!(out.value, &r + mul_oracle(&n_v, &s));
                assert_eq!(out.steps, 3);
            }
        }
    }

    #[test]
    fn chunked_final_add_costs_word_cycles() {
        let w = Widths::gps(128, 32);
        let s = BigUint::parse_bytes(b"fedcba9876543210fedcba9876543210", 16).unwrap();
        let r = (BigUint::from(1u8) << 240u32) - 1u8;
        let n_v = BigUint::from(u32::MAX);
        let table = KcmTable::binary(&s, 4).unwrap();
        let plain = kcm_hybrid_respond(KcmConfig::default(), &table, &n_v, &r, &w).unwrap();
        let cfg = KcmConfig::default().with_chunked_final_add(16).unwrap();
        let chunked = kcm_hybrid_respond(cfg, &table, &n_v, &r, &w).unwrap();
        assert_eq!(plain.value, chunked.value);
        assert_eq!(plain.value, &r + mul_oracle(&n_v, &s));
        assert_eq!(plain.cycles, 48);
        assert_eq!(chunked.steps, 8 + 15);
        assert_eq!(chunked.cycles, 48 + 14);
    }
}
