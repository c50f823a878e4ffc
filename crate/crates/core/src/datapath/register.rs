//! Fixed-width register made of `word_bits`-wide words with explicit carries.

use num_bigint::BigUint;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Register {
    word_bits: u32,
    words: Vec<u64>,
}

impl Register {
    pub fn zero(word_bits: u32, words: usize) -> Self {
        debug_assert!((1..=32).contains(&word_bits));
        Register { word_bits, words: vec![0; words] }
    }

    /// Loads `value`, which must fit in `words * word_bits` bits.
    pub fn load(value: &BigUint, word_bits: u32, words: usize) -> Self {
        assert!(value.bits() <= u64::from(word_bits) * words as u64, "value does not fit the register");
        let mut reg = Register::zero(word_bits, words);
        let mask = reg.mask();
        let digits = value.to_u64_digits();
        for (k, w) in reg.words.iter_mut().enumerate() {
            let bit = k as u64 * u64::from(word_bits);
            let (limb, off) = ((bit / 64) as usize, (bit % 64) as u32);
            let lo = digits.get(limb).copied().unwrap_or(0) >> off;
            let hi = if off == 0 { 0 } else { digits.get(limb + 1).copied().unwrap_or(0) << (64 - off) };
            *w = (lo | hi) & mask;
        }
        reg
    }

    pub fn value(&self) -> BigUint {
        let mut acc = BigUint::ZERO;
        for &w in self.words.iter().rev() {
            acc <<= self.word_bits;
            acc += w;
        }
        acc
    }

    fn mask(&self) -> u64 {
        (1u64 << self.word_bits) - 1
    }

    pub fn word(&self, k: usize) -> u64 {
        self.words.get(k).copied().unwrap_or(0)
    }

    /// One adder cycle: `word[k] += operand + carry_in`. Returns the carry out.
    pub fn add_word(&mut self, k: usize, operand: u64, carry_in: u64) -> u64 {
        debug_assert!(operand <= self.mask() && carry_in <= 1);
        let sum = self.words[k] + operand + carry_in;
        self.words[k] = sum & self.mask();
        sum >> self.word_bits
    }

    /// Ripples `carry` into words `from..`. Overflowing the register is a bug.
    pub fn propagate(&mut self, from: usize, mut carry: u64) {
        let mut k = from;
        while carry != 0 {
            assert!(k < self.words.len(), "register overflow");
            carry = self.add_word(k, 0, carry);
            k += 1;
        }
    }

    /// Full-width ripple-carry addition of a register with the same geometry.
    pub fn add(&mut self, other: &Register) {
        debug_assert_eq!(self.word_bits, other.word_bits);
        let mut carry = 0;
        for k in 0..self.words.len() {
            carry = self.add_word(k, other.word(k), carry);
        }
        assert!(carry == 0 && other.words.len() <= self.words.len(), "register overflow");
    }

    /// Logical left shift; bits shifted out must be zero.
    pub fn shl(&mut self, bits: u32) {
        let w = self.word_bits;
        let n = self.words.len();
        let word_shift = (bits / w) as usize;
        if word_shift > 0 {
            let keep = n.saturating_sub(word_shift);
            assert!(self.words[keep..].iter().all(|&x| x == 0), "register overflow on shift");
            if keep > 0 {
                self.words.rotate_right(word_shift);
            }
        }
        let bit_shift = bits % w;
        if bit_shift > 0 {
            let mask = self.mask();
            let mut carry = 0u64;
            for word in self.words.iter_mut() {
                let wide = (*word << bit_shift) | carry;
                *word = wide & mask;
                carry = wide >> w;
            }
            assert!(carry == 0, "register overflow on shift");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_and_value_round_trip() {
        let v = BigUint::parse_bytes(b"f0e1d2c3b4a5968778695a4b3c2d1e0f11", 16).unwrap();
        for wb in [4u32, 7, 8, 16, 31, 32] {
            let words = (v.bits() as usize).div_ceil(wb as usize) + 1;
            let r = Register::load(&v, wb, words);
            assert_eq!(r.value(), v, "word_bits {wb}");
        }
    }

    #[test]
    fn add_and_shift() {
        let a = BigUint::from(0xffff_ffffu64);
        let mut r = Register::load(&a, 8, 6);
        r.add(&Register::load(&BigUint::from(1u8), 8, 6));
        assert_eq!(r.value(), BigUint::from(0x1_0000_0000u64));
        r.shl(9);
        assert_eq!(r.value(), BigUint::from(0x1_0000_0000u64 << 9));
    }

    #[test]
    #[should_panic(expected = "overflow")]
    fn shift_overflow_panics() {
        let mut r = Register::load(&BigUint::from(0x80u8), 8, 1);
        r.shl(1);
    }
}
