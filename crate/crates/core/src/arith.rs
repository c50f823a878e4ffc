//! Reference big-integer arithmetic.
//!
//! Everything here is the ground truth the datapath models are checked
//! against, so none of it may call into [`crate::datapath`]. The product
//! oracle is a plain schoolbook multiplication over 32-bit limbs and does not
//! use `num-bigint`'s own multiplication either.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(BigUint),
    #[error("value is not invertible: gcd with modulus is {gcd}")]
    NotInvertible { gcd: BigUint },
}

/// Exact product of `a` and `b` by schoolbook multiplication.
pub fn mul_oracle(a: &BigUint, b: &BigUint) -> BigUint {
    let a = a.to_u32_digits();
    let b = b.to_u32_digits();
    if a.is_empty() || b.is_empty() {
        return BigUint::zero();
    }
    let mut out = vec![0u32; a.len() + b.len()];
    for (i, &ai) in a.iter().enumerate() {
        let mut carry = 0u64;
        for (j, &bj) in b.iter().enumerate() {
            let t = u64::from(ai) * u64::from(bj) + u64::from(out[i + j]) + carry;
            out[i + j] = t as u32;
            carry = t >> 32;
        }
        let mut k = i + b.len();
        while carry != 0 {
            let t = u64::from(out[k]) + carry;
            out[k] = t as u32;
            carry = t >> 32;
            k += 1;
        }
    }
    BigUint::new(out)
}

/// `base^exp mod modulus` by left-to-right square-and-multiply.
pub fn modexp(base: &BigUint, exp: &BigUint, modulus: &BigUint) -> Result<BigUint, ArithError> {
    if *modulus < BigUint::from(2u8) {
        return Err(ArithError::ModulusTooSmall(modulus.clone()));
    }
    let base = base % modulus;
    let mut acc = BigUint::one();
    for i in (0..exp.bits()).rev() {
        acc = (&acc * &acc) % modulus;
        if exp.bit(i) {
            acc = (&acc * &base) % modulus;
        }
    }
    Ok(acc)
}

/// Inverse of `a` modulo `modulus` by the extended Euclidean algorithm.
pub fn modinv(a: &BigUint, modulus: &BigUint) -> Result<BigUint, ArithError> {
    if *modulus < BigUint::from(2u8) {
        return Err(ArithError::ModulusTooSmall(modulus.clone()));
    }
    let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
    let mut old_r = BigInt::from_biguint(Sign::Plus, a % modulus);
    let mut r = m.clone();
    let mut old_t = BigInt::one();
    let mut t = BigInt::zero();
    while !r.is_zero() {
        let (q, rem) = old_r.div_rem(&r);
        old_r = std::mem::replace(&mut r, rem);
        let next_t = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, next_t);
    }
    // old_r is gcd(a mod m, m)
    if !old_r.is_one() {
        let gcd = old_r.abs().to_biguint().unwrap_or_default();
        // gcd(0, m) = m
        let gcd = if gcd.is_zero() { modulus.clone() } else { gcd };
        return Err(ArithError::NotInvertible { gcd });
    }
    let inv = old_t.mod_floor(&m);
    Ok(inv.to_biguint().expect("mod_floor result is non-negative"))
}

/// Lowercase hex without leading zeros; zero is `0`.
pub fn to_hex(v: &BigUint) -> String {
    v.to_str_radix(16)
}

/// Parses the canonical hex form produced by [`to_hex`].
pub fn from_hex(s: &str) -> Option<BigUint> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)) {
        return None;
    }
    if s.len() > 1 && s.starts_with('0') {
        return None;
    }
    BigUint::parse_bytes(s.as_bytes(), 16)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn worked_products() {
        // 101001 x 110 = 11110110
        assert_eq!(mul_oracle(&big(0b101001), &big(0b110)), big(0b11110110));
        assert_eq!(mul_oracle(&big(953), &big(482)), big(459346));
    }

    #[test]
    fn identity_and_zero() {
        let x = BigUint::parse_bytes(b"123456789abcdef0123456789abcdef", 16).unwrap();
        assert_eq!(mul_oracle(&x, &big(0)), big(0));
        assert_eq!(mul_oracle(&big(0), &x), big(0));
        assert_eq!(mul_oracle(&x, &big(1)), x);
    }

    #[test]
    fn modexp_small() {
        assert_eq!(modexp(&big(2), &big(10), &big(1000)).unwrap(), big(24));
        assert_eq!(modexp(&big(7), &big(0), &big(1000)).unwrap(), big(1));
        assert_eq!(modexp(&big(0), &big(0), &big(2)).unwrap(), big(1));
        assert!(matches!(modexp(&big(2), &big(3), &big(1)), Err(ArithError::ModulusTooSmall(_))));
    }

    #[test]
    fn modexp_matches_repeated_multiplication() {
        let n = big(0xffff_fffb_0000_0007 | 1);
        let g = big(2);
        let mut acc = BigUint::one();
        for e in 0u64..(1 << 12) {
            assert_eq!(modexp(&g, &big(e), &n).unwrap(), acc, "exponent {e}");
            acc = mul_oracle(&acc, &g) % &n;
        }
    }

    #[test]
    fn modinv_small() {
        assert_eq!(modinv(&big(1), &big(97)).unwrap(), big(1));
        // exhaustive search over [1, 10[
        let expected = (1u64..10).find(|b| (3 * b) % 10 == 1).unwrap();
        assert_eq!(modinv(&big(3), &big(10)).unwrap(), big(expected));
        assert_eq!(modinv(&big(6), &big(10)), Err(ArithError::NotInvertible { gcd: big(2) }));
        assert_eq!(modinv(&big(0), &big(10)), Err(ArithError::NotInvertible { gcd: big(10) }));
    }

    #[test]
    fn hex_is_canonical() {
        assert_eq!(to_hex(&big(0)), "0");
        assert_eq!(to_hex(&big(0xabc)), "abc");
        assert_eq!(from_hex("abc"), Some(big(0xabc)));
        assert_eq!(from_hex("0"), Some(big(0)));
        assert_eq!(from_hex("0abc"), None);
        assert_eq!(from_hex("ABC"), None);
        assert_eq!(from_hex(""), None);
    }

    proptest! {
        #[test]
        fn oracle_matches_native(a: u64, b: u64) {
            let native = u128::from(a) * u128::from(b);
            prop_assert_eq!(mul_oracle(&big(a), &big(b)), BigUint::from(native));
        }

        #[test]
        fn oracle_matches_bigint(a in proptest::collection::vec(any::<u32>(), 0..40),
                                 b in proptest::collection::vec(any::<u32>(), 0..40)) {
            let (a, b) = (BigUint::new(a), BigUint::new(b));
            prop_assert_eq!(mul_oracle(&a, &b), &a * &b);
        }

        #[test]
        fn inverse_round_trips(a in 1u64.., m in 2u64..) {
            let (a, m) = (big(a), big(m));
            match modinv(&a, &m) {
                Ok(inv) => prop_assert!(((&a * inv) % &m).is_one()),
                Err(ArithError::NotInvertible { gcd }) => {
                    prop_assert!(!gcd.is_one());
                    prop_assert_eq!(gcd, a.gcd(&m));
                }
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }

        #[test]
        fn exponents_add(a: u64, b: u64, n in (3u64..).prop_map(|n| n | 1)) {
            let (g, n) = (big(2), big(n));
            let lhs = modexp(&g, &(big(a) + big(b)), &n).unwrap();
            let rhs = (modexp(&g, &big(a), &n).unwrap() * modexp(&g, &big(b), &n).unwrap()) % &n;
            prop_assert_eq!(lhs, rhs);
        }
    }
}
