//! Coupon-based GPS identification.
//!
//! * [`params`]: parameter profiles, keys, coupons and their file formats.
//! * [`arith`]: reference big-integer arithmetic and the product oracle.
//! * [`datapath`]: cycle-counting models of the prover's `y = r + n_v * s`
//!   unit (serial shift-and-add, parallel KCM, hybrid KCM).
//! * [`costmodel`]: storage formulas, latency/throughput and area estimates,
//!   comparison tables.
//! * [`protocol`]: prover/verifier sessions, wire frames and transports.

pub mod arith;
pub mod costmodel;
pub mod datapath;
pub mod params;
pub mod protocol;
