//! Text formats for key and coupon files.
//!
//! ```text
//! GPSCOUPONS v1 <profile>        GPSKEY v1
//! n=<hex>                        id=<8 hex digits>
//! g=<hex>                        s=<hex>
//! i=<dec> r=<hex> x=<hex>        I=<hex>
//! ...                            profile=<name>
//!                                n=<hex>
//!                                g=<hex>
//! ```
//!
//! Hex is lowercase without leading zeros.

use std::fmt::Write as _;

use num_bigint::BigUint;

use super::{Coupon, KeyPair, ParameterProfile, ParamsError, Preset};
use crate::arith::{from_hex, to_hex};

const COUPON_MAGIC: &str = "GPSCOUPONS v1";
const KEY_MAGIC: &str = "GPSKEY v1";

/// Contents of a key file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyFile {
    pub profile: ParameterProfile,
    pub keypair: KeyPair,
}

pub fn write_coupon_file(profile: &ParameterProfile, coupons: &[Coupon]) -> String {
    let mut out = format!("{COUPON_MAGIC} {}\nn={}\ng={}\n", profile.name, to_hex(&profile.n), to_hex(&profile.g));
    for c in coupons {
        writeln!(out, "i={} r={} x={}", c.index, to_hex(&c.r), to_hex(&c.x)).unwrap();
    }
    out
}

pub fn parse_coupon_file(text: &str) -> Result<(ParameterProfile, Vec<Coupon>), ParamsError> {
    let mut lines = Lines::new(text);
    let (lineno, header) = lines.next_required("header")?;
    let name = header
        .strip_prefix(COUPON_MAGIC)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| fmt_err(lineno, format!("expected `{COUPON_MAGIC} <profile>`")))?;
    let preset: Preset = name.parse().map_err(|e: ParamsError| fmt_err(lineno, e.to_string()))?;
    let n = lines.hex_field("n")?;
    let g = lines.hex_field("g")?;
    let profile = ParameterProfile::from_parts(preset, n, g)?;

    let mut coupons = Vec::new();
    while let Some((lineno, line)) = lines.next_line() {
        let mut parts = line.split(' ');
        let (Some(i), Some(r), Some(x), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
            return Err(fmt_err(lineno, "expected `i=<dec> r=<hex> x=<hex>`"));
        };
        let index = i
            .strip_prefix("i=")
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|d| d.parse::<u64>().ok())
            .ok_or_else(|| fmt_err(lineno, "bad coupon index"))?;
        let r = r.strip_prefix("r=").and_then(from_hex).ok_or_else(|| fmt_err(lineno, "bad r"))?;
        let x = x.strip_prefix("x=").and_then(from_hex).ok_or_else(|| fmt_err(lineno, "bad x"))?;
        if r >= profile.commitment_bound() {
            return Err(fmt_err(lineno, "r exceeds the commitment range"));
        }
        if x >= profile.n {
            return Err(fmt_err(lineno, "x is not reduced modulo n"));
        }
        coupons.push(Coupon { index, r, x });
    }
    Ok((profile, coupons))
}

pub fn write_key_file(profile: &ParameterProfile, keypair: &KeyPair) -> String {
    format!(
        "{KEY_MAGIC}\nid={}\ns={}\nI={}\nprofile={}\nn={}\ng={}\n",
        keypair.id_hex(),
        to_hex(&keypair.s),
        to_hex(&keypair.i_pub),
        profile.name,
        to_hex(&profile.n),
        to_hex(&profile.g),
    )
}

pub fn parse_key_file(text: &str) -> Result<KeyFile, ParamsError> {
    let mut lines = Lines::new(text);
    let (lineno, header) = lines.next_required("header")?;
    if header != KEY_MAGIC {
        return Err(fmt_err(lineno, format!("expected `{KEY_MAGIC}`")));
    }
    let (lineno, id) = lines.field("id")?;
    let id_p = parse_id(id).ok_or_else(|| fmt_err(lineno, "id must be 8 lowercase hex digits"))?;
    let s = lines.hex_field("s")?;
    let i_pub = lines.hex_field("I")?;
    let (lineno, name) = lines.field("profile")?;
    let preset: Preset = name.parse().map_err(|e: ParamsError| fmt_err(lineno, e.to_string()))?;
    let n = lines.hex_field("n")?;
    let g = lines.hex_field("g")?;
    if let Some((lineno, _)) = lines.next_line() {
        return Err(fmt_err(lineno, "unexpected trailing content"));
    }
    let profile = ParameterProfile::from_parts(preset, n, g)?;
    if s >= profile.secret_bound() {
        return Err(ParamsError::InvalidProfile("secret exceeds the secret range".into()));
    }
    Ok(KeyFile { profile, keypair: KeyPair { s, i_pub, id_p } })
}

fn parse_id(s: &str) -> Option<[u8; 4]> {
    if s.len() != 8 || !s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)) {
        return None;
    }
    u32::from_str_radix(s, 16).ok().map(u32::to_be_bytes)
}

fn fmt_err(line: usize, msg: impl Into<String>) -> ParamsError {
    ParamsError::Format { line, msg: msg.into() }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate() }
    }

    /// Next non-empty line, 1-based line number.
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        self.inner.by_ref().map(|(i, l)| (i + 1, l.trim_end_matches('\r'))).find(|(_, l)| !l.is_empty())
    }

    fn next_required(&mut self, what: &str) -> Result<(usize, &'a str), ParamsError> {
        self.next_line().ok_or_else(|| fmt_err(0, format!("unexpected end of file, missing {what}")))
    }

    fn field(&mut self, key: &str) -> Result<(usize, &'a str), ParamsError> {
        let (lineno, line) = self.next_required(key)?;
        let value = line
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| fmt_err(lineno, format!("expected `{key}=`")))?;
        Ok((lineno, value))
    }

    fn hex_field(&mut self, key: &str) -> Result<BigUint, ParamsError> {
        let (lineno, value) = self.field(key)?;
        from_hex(value).ok_or_else(|| fmt_err(lineno, format!("`{key}` is not canonical lowercase hex")))
    }
}
