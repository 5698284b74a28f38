//! `[x ≤ α]` on shared fixed-point values, then the bit check that catches
//! a server tampering with its output share.
//!
//! cargo run --example secure_comparison

use fedseg::mpc::{bit_check, encode_fixed, secure_leq, share_arith, Mpc, FRAC_BITS};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fedseg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xs = [0.5, 1.2, 1.2000001, 1.9, -3.0];
    let raw: Vec<u64> = xs.iter().map(|v| encode_fixed(*v, FRAC_BITS)).collect();
    let x = share_arith(&raw, FRAC_BITS, 3, &mut rng)?;
    let mut mpc = Mpc::new(3, 4)?;

    let mut honest = secure_leq(&x, 1.2, &mut mpc)?;
    let bits = honest.check_and_open(&mut mpc)?;
    for (v, b) in xs.iter().zip(bits.iter()) {
        println!("{v:>10} ≤ 1.2 : {b}");
    }

    let mut tampered = secure_leq(&x, 1.2, &mut mpc)?;
    let e = &mut tampered.bits.share_mut(1).elems[0];
    *e = e.wrapping_add(7);
    println!("bit check on tampered output passes: {}", bit_check(&tampered, &mut mpc)?);
    println!("opening it: {:?}", tampered.check_and_open(&mut mpc).unwrap_err());
    Ok(())
}
