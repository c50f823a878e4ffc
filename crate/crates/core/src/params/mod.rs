//! Parameter profiles, key generation and coupons.
//!
//! Bounds are powers of two: `S = 2^s_bits`, `C = 2^c_bits`, `D = 2^d_bits`
//! with `d_bits = s_bits + c_bits + 80`. The slack term is
//! `phi = (C - 1)(S - 1)` and honest responses live in `[0, D + phi[`.

mod files;
mod prng;

pub use files::{parse_coupon_file, parse_key_file, write_coupon_file, write_key_file, KeyFile};
pub use prng::{prng_expand, PrngStream};

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use rand::{CryptoRng, RngCore};
use thiserror::Error;

use crate::arith::{self, ArithError};

/// Extra bits of commitment range on top of `|S| + |C|`.
pub const COMMITMENT_SLACK_BITS: u32 = 80;

/// Miller-Rabin rounds used for prime generation.
pub const MILLER_RABIN_ROUNDS: usize = 40;

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error("unknown profile `{0}` (expected toy, s128, s256, s512 or std180)")]
    UnknownProfile(String),
    #[error("prime size must be at least 8 bits, got {0}")]
    PrimeBitsTooSmall(u32),
    #[error("no {bits}-bit prime found after {attempts} candidates")]
    PrimeGeneration { bits: u32, attempts: usize },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("coupon count must be at least 1")]
    EmptyCouponSet,
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Named size presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Toy,
    S128,
    S256,
    S512,
    Std180,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Toy, Preset::S128, Preset::S256, Preset::S512, Preset::Std180];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Toy => "toy",
            Preset::S128 => "s128",
            Preset::S256 => "s256",
            Preset::S512 => "s512",
            Preset::Std180 => "std180",
        }
    }

    pub fn s_bits(self) -> u32 {
        match self {
            Preset::Toy => 16,
            Preset::S128 => 128,
            Preset::S256 => 256,
            Preset::S512 => 512,
            Preset::Std180 => 180,
        }
    }

    pub fn c_bits(self) -> u32 {
        match self {
            Preset::Toy => 8,
            _ => 32,
        }
    }

    /// Nominal modulus size.
    pub fn n_bits(self) -> u32 {
        match self {
            Preset::Toy => 64,
            _ => 1024,
        }
    }

    pub fn default_prime_bits(self) -> u32 {
        self.n_bits() / 2
    }

    pub fn widths(self) -> Widths {
        Widths::gps(self.s_bits(), self.c_bits())
    }
}

impl FromStr for Preset {
    type Err = ParamsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| ParamsError::UnknownProfile(s.to_string()))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Operand widths seen by the prover datapath.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Widths {
    pub s_bits: u32,
    pub c_bits: u32,
    pub d_bits: u32,
}

impl Widths {
    /// Protocol widths: `d_bits = s_bits + c_bits + 80`.
    pub fn gps(s_bits: u32, c_bits: u32) -> Self {
        Widths { s_bits, c_bits, d_bits: s_bits + c_bits + COMMITMENT_SLACK_BITS }
    }

    /// Bits in one response `y`, which is what the throughput figures count.
    pub fn output_bits(&self) -> u32 {
        self.s_bits + self.c_bits + COMMITMENT_SLACK_BITS
    }
}

/// Public parameters for one security level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterProfile {
    pub name: String,
    pub s_bits: u32,
    pub c_bits: u32,
    pub d_bits: u32,
    pub n_bits: u32,
    pub n: BigUint,
    pub g: BigUint,
    pub phi: BigUint,
}

impl ParameterProfile {
    /// Assembles a profile from a preset and an already formed modulus.
    pub fn from_parts(preset: Preset, n: BigUint, g: BigUint) -> Result<Self, ParamsError> {
        if n <= BigUint::one() || n.is_even() {
            return Err(ParamsError::InvalidProfile("modulus must be odd and greater than 1".into()));
        }
        if g <= BigUint::one() || g >= n {
            return Err(ParamsError::InvalidProfile("g must satisfy 1 < g < n".into()));
        }
        if !g.gcd(&n).is_one() {
            return Err(ParamsError::InvalidProfile("g is not a unit modulo n".into()));
        }
        let (s_bits, c_bits) = (preset.s_bits(), preset.c_bits());
        let phi = (pow2(c_bits) - 1u8) * (pow2(s_bits) - 1u8);
        Ok(ParameterProfile {
            name: preset.name().to_string(),
            s_bits,
            c_bits,
            d_bits: s_bits + c_bits + COMMITMENT_SLACK_BITS,
            n_bits: n.bits() as u32,
            n,
            g,
            phi,
        })
    }

    pub fn preset(&self) -> Preset {
        self.name.parse().expect("profiles are only built from presets")
    }

    pub fn widths(&self) -> Widths {
        Widths { s_bits: self.s_bits, c_bits: self.c_bits, d_bits: self.d_bits }
    }

    /// `S = 2^s_bits`.
    pub fn secret_bound(&self) -> BigUint {
        pow2(self.s_bits)
    }

    /// `C = 2^c_bits`.
    pub fn challenge_bound(&self) -> BigUint {
        pow2(self.c_bits)
    }

    /// `D = 2^d_bits`.
    pub fn commitment_bound(&self) -> BigUint {
        pow2(self.d_bits)
    }

    /// Exclusive upper bound `D + phi` on accepted responses.
    pub fn response_bound(&self) -> BigUint {
        self.commitment_bound() + &self.phi
    }
}

pub(crate) fn pow2(bits: u32) -> BigUint {
    BigUint::one() << bits
}

/// Uniform value in `[0, 2^bits[`.
pub fn random_bits<R: RngCore + ?Sized>(rng: &mut R, bits: u32) -> BigUint {
    let mut bytes = vec![0u8; (bits as usize).div_ceil(8)];
    rng.fill_bytes(&mut bytes);
    BigUint::from_bytes_be(&bytes) % pow2(bits)
}

/// Builds a profile with a fresh modulus `n = p * q` and `g = 2`.
///
/// `p` and `q` are dropped once `n` is formed.
pub fn make_profile<R: RngCore + CryptoRng>(
    name: &str,
    prime_bits: u32,
    rng: &mut R,
) -> Result<ParameterProfile, ParamsError> {
    let preset: Preset = name.parse()?;
    if prime_bits < 8 {
        return Err(ParamsError::PrimeBitsTooSmall(prime_bits));
    }
    let p = generate_prime(prime_bits, rng)?;
    let q = loop {
        let q = generate_prime(prime_bits, rng)?;
        if q != p {
            break q;
        }
    };
    let n = p * q;
    ParameterProfile::from_parts(preset, n, BigUint::from(2u8))
}

const SMALL_PRIMES: [u32; 53] = [
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239,
    241, 251,
];

/// Random probable prime with exactly `bits` bits and its top two bits set,
/// so the product of two such primes has exactly `2 * bits` bits.
pub fn generate_prime<R: RngCore + ?Sized>(bits: u32, rng: &mut R) -> Result<BigUint, ParamsError> {
    let attempts = 100 * bits as usize;
    for _ in 0..attempts {
        let mut cand = random_bits(rng, bits);
        cand.set_bit(u64::from(bits) - 1, true);
        cand.set_bit(u64::from(bits) - 2, true);
        cand.set_bit(0, true);
        if is_probable_prime(&cand, MILLER_RABIN_ROUNDS, rng) {
            return Ok(cand);
        }
    }
    Err(ParamsError::PrimeGeneration { bits, attempts })
}

/// Miller-Rabin with `rounds` random bases.
pub fn is_probable_prime<R: RngCore + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let two = BigUint::from(2u8);
    if *n < two {
        return false;
    }
    for &sp in SMALL_PRIMES.iter() {
        let sp = BigUint::from(sp);
        if *n == sp {
            return true;
        }
        if (n % &sp) == BigUint::ZERO {
            return false;
        }
    }
    if n.is_even() {
        return *n == two;
    }
    let n_minus_1 = n - 1u8;
    let shift = n_minus_1.trailing_zeros().expect("n - 1 is nonzero");
    let odd = &n_minus_1 >> shift;
    let bits = n.bits() as u32;
    'witness: for _ in 0..rounds {
        // base in [2, n - 2]
        let a = loop {
            let a = random_bits(rng, bits);
            if a >= two && a < n_minus_1 {
                break a;
            }
        };
        let mut x = arith::modexp(&a, &odd, n).expect("n > 2");
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..shift {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prover key material.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPair {
    /// Secret `s` in `[0, 2^s_bits[`.
    pub s: BigUint,
    /// Public key `I = g^(-s) mod n`.
    pub i_pub: BigUint,
    pub id_p: [u8; 4],
}

impl KeyPair {
    /// Derives the public half for a given secret.
    pub fn from_secret(profile: &ParameterProfile, s: BigUint, id_p: [u8; 4]) -> Result<Self, ParamsError> {
        let gs = arith::modexp(&profile.g, &s, &profile.n)?;
        let i_pub = arith::modinv(&gs, &profile.n)?;
        Ok(KeyPair { s, i_pub, id_p })
    }

    pub fn id_hex(&self) -> String {
        self.id_p.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn keygen<R: RngCore + CryptoRng>(profile: &ParameterProfile, rng: &mut R) -> Result<KeyPair, ParamsError> {
    let mut id_p = [0u8; 4];
    rng.fill_bytes(&mut id_p);
    let s = random_bits(rng, profile.s_bits);
    KeyPair::from_secret(profile, s, id_p)
}

/// Seed from which a whole coupon set can be regenerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CouponSeed {
    pub seed: [u8; 16],
    pub count: u64,
}

impl CouponSeed {
    pub fn new(seed: [u8; 16], count: u64) -> Self {
        CouponSeed { seed, count }
    }

    /// Zero-extends a 64-bit seed (big-endian in the low half).
    pub fn from_u64(seed: u64, count: u64) -> Self {
        let mut bytes = [0u8; 16];
        bytes[8..].copy_from_slice(&seed.to_be_bytes());
        CouponSeed { seed: bytes, count }
    }
}

/// Precomputed commitment pair `(r, x = g^r mod n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coupon {
    pub index: u64,
    pub r: BigUint,
    pub x: BigUint,
}

/// Regenerates coupon `index`: `r` is the first `d_bits` bits of the
/// seed's stream for that index, `x = g^r mod n`.
pub fn make_coupon(profile: &ParameterProfile, seed: &CouponSeed, index: u64) -> Result<Coupon, ParamsError> {
    let r = prng_expand(&seed.seed, index).take_bits(profile.d_bits);
    let x = arith::modexp(&profile.g, &r, &profile.n)?;
    Ok(Coupon { index, r, x })
}

pub fn make_coupons(profile: &ParameterProfile, seed: &CouponSeed, count: u64) -> Result<Vec<Coupon>, ParamsError> {
    if count == 0 {
        return Err(ParamsError::EmptyCouponSet);
    }
    (0..count).map(|i| make_coupon(profile, seed, i)).collect()
}
