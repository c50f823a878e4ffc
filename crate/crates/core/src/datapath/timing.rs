//! Closed-form cycle counts.
//!
//! The structural counts follow from the datapath shapes. The overheads are
//! calibration constants: none of the three units publishes a breakdown of
//! its control cycles, so each overhead is the smallest term that makes the
//! structural count land on the measured latencies of a 32-bit challenge
//! with a 16-bit serial adder and 4-input LUTs:
//!
//! | unit     | latency at c=32, w=16, l=4 | overhead         |
//! |----------|----------------------------|------------------|
//! | serial   | `32 * s/16 + d/16 + 68`    | `68`             |
//! | parallel | `s/32 + 4`                 | `ceil(s/32) - 1` |
//! | hybrid   | `3 * s/16 + 24`            | `3*ceil(s/16)+15`|

use crate::params::Widths;

/// Fixed control cycles of the serial unit, for every adder width.
pub const SERIAL_CONTROL_OVERHEAD: u64 = 68;

fn ceil_div(a: u32, b: u32) -> u64 {
    u64::from(a.div_ceil(b))
}

pub fn serial_steps(widths: &Widths, word_bits: u32) -> u64 {
    u64::from(widths.c_bits) * ceil_div(widths.s_bits, word_bits) + ceil_div(widths.d_bits, word_bits)
}

pub fn serial_latency(widths: &Widths, word_bits: u32) -> u64 {
    serial_steps(widths, word_bits) + SERIAL_CONTROL_OVERHEAD
}

pub fn digit_count(c_bits: u32, lut_bits: u32) -> u64 {
    ceil_div(c_bits, lut_bits)
}

/// Depth of a binary adder tree over `operands` inputs.
pub fn tree_levels(operands: u64) -> u64 {
    let mut levels = 0;
    let mut n = operands;
    while n > 1 {
        n = n.div_ceil(2);
        levels += 1;
    }
    levels
}

/// Lookup stage, adder tree, final addition.
pub fn parallel_steps(c_bits: u32, lut_bits: u32) -> u64 {
    1 + tree_levels(digit_count(c_bits, lut_bits)) + 1
}

pub fn parallel_overhead(s_bits: u32) -> u64 {
    ceil_div(s_bits, 32) - 1
}

pub fn parallel_latency(widths: &Widths, lut_bits: u32) -> u64 {
    parallel_steps(widths.c_bits, lut_bits) + parallel_overhead(widths.s_bits)
}

/// One accumulate per digit plus the final addition, which is one cycle
/// unless it is chunked over a narrower adder.
pub fn hybrid_steps(widths: &Widths, lut_bits: u32, chunked_final_add: Option<u32>) -> u64 {
    let final_add = chunked_final_add.map_or(1, |w| ceil_div(widths.d_bits, w));
    digit_count(widths.c_bits, lut_bits) + final_add
}

pub fn hybrid_overhead(s_bits: u32) -> u64 {
    3 * ceil_div(s_bits, 16) + 15
}

pub fn hybrid_latency(widths: &Widths, lut_bits: u32, chunked_final_add: Option<u32>) -> u64 {
    hybrid_steps(widths, lut_bits, chunked_final_add) + hybrid_overhead(widths.s_bits)
}
