use num_bigint::BigUint;

use super::register::Register;
use super::timing::SERIAL_CONTROL_OVERHEAD;
use super::{check_inputs, DatapathError, DatapathResult, SerialConfig, StepKind, TraceEntry};
use crate::params::Widths;

/// Shift-and-add response unit.
///
/// Challenge bits are consumed MSB first. For each bit the accumulator is
/// shifted left by one (wiring only) and the multiplexer output, either the
/// secret word or zero, is added word by word with the carry held between
/// cycles. The carry out of the top secret word ripples into the upper
/// accumulator bits. The adder is then reused to add `r` word by word.
pub fn serial_respond(
    cfg: SerialConfig,
    s: &BigUint,
    n_v: &BigUint,
    r: &BigUint,
    widths: &Widths,
) -> Result<DatapathResult, DatapathError> {
    SerialConfig::new(cfg.word_bits)?;
    check_inputs(s, n_v, r, widths)?;
    let w = cfg.word_bits;
    let s_words = widths.s_bits.div_ceil(w) as usize;
    let d_words = widths.d_bits.div_ceil(w) as usize;

    let secret = Register::load(s, w, s_words);
    let commitment = Register::load(r, w, d_words);
    // one spare word catches the carry of the final addition
    let mut acc = Register::zero(w, d_words + 1);
    let mut trace = Vec::with_capacity(widths.c_bits as usize * s_words + d_words);
    let mut cycle = 0u64;

    for bit in (0..widths.c_bits).rev() {
        acc.shl(1);
        let selected = n_v.bit(u64::from(bit));
        let mut carry = 0;
        for k in 0..s_words {
            let operand = if selected { secret.word(k) } else { 0 };
            let carry_in = carry;
            carry = acc.add_word(k, operand, carry_in);
            trace.push(TraceEntry {
                cycle,
                kind: if selected { StepKind::Add } else { StepKind::Skip },
                position: bit,
                word: k as u32,
                operand: BigUint::from(operand),
                weight: bit + k as u32 * w,
                carry_in: carry_in != 0,
                carry_out: carry != 0,
                acc: acc.value(),
            });
            cycle += 1;
        }
        acc.propagate(s_words, carry);
    }

    let mut carry = 0;
    for k in 0..d_words {
        let operand = commitment.word(k);
        let carry_in = carry;
        carry = acc.add_word(k, operand, carry_in);
        trace.push(TraceEntry {
            cycle,
            kind: StepKind::FinalAdd,
            position: 0,
            word: k as u32,
            operand: BigUint::from(operand),
            weight: k as u32 * w,
            carry_in: carry_in != 0,
            carry_out: carry != 0,
            acc: acc.value(),
        });
        cycle += 1;
    }
    acc.propagate(d_words, carry);

    Ok(DatapathResult { value: acc.value(), steps: cycle, cycles: cycle + SERIAL_CONTROL_OVERHEAD, trace })
}
