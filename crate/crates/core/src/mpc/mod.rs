//! Secret sharing over `GF(2)` and `Z_{2^64}` among `S` servers.
//!
//! Sharing is n-of-n: XOR of all boolean shares, or the wrapping sum of all
//! arithmetic shares, reconstructs the secret. Arithmetic shares carry a
//! fixed-point scale (`frac_bits`); the ring value is read as a signed
//! two's-complement integer divided by `2^frac_bits`.
//!
//! Correlated randomness (Beaver triples, AND triples, daBits, edaBits) comes
//! from a trusted [`Dealer`] standing in for an offline phase. Interactive
//! steps run through [`Mpc`], which simulates all servers in lockstep and
//! meters the bytes they would exchange.

mod compare;
mod dealer;
mod protocol;
mod share;

pub use compare::{bit_check, secure_leq, ComparisonResult};
pub use dealer::{AndTriple, BeaverTriple, DaBits, Dealer, DealerStats, EdaBits};
pub use protocol::{b2a_convert, beaver_multiply, Mpc, Traffic};
pub use share::{
    add_shares_local, reconstruct_arith, reconstruct_binary, scale_shares_local, share_arith,
    share_binary, share_bits, xor_shares_local, ArithShareVec, ArithShared, BoolShareVec,
    BoolShared,
};

/// Fractional bits of the fixed-point encoding.
pub const FRAC_BITS: u32 = 20;

/// Largest magnitude (raw ring units) a value may have before truncation or
/// comparison; both protocols offset inputs by `2^62`.
pub const RAW_LIMIT: u64 = 1 << 62;

/// Encodes a real as a ring element with `frac_bits` fractional bits.
pub fn encode_fixed(v: f64, frac_bits: u32) -> u64 {
    (v * (1u64 << frac_bits) as f64).round() as i64 as u64
}

/// Reads a ring element as a signed fixed-point value.
pub fn decode_fixed(raw: u64, frac_bits: u32) -> f64 {
    raw as i64 as f64 / (1u64 << frac_bits) as f64
}

/// Minimum number of servers tolerated by the malicious-minority model.
pub const MIN_SERVERS: usize = 3;
