//! XOR shares of sign vectors, additive shares over Z_2^64, and a Beaver
//! multiplication with metered traffic.
//!
//! cargo run --example secret_sharing

use fedseg::bits::BitVector;
use fedseg::mpc::{decode_fixed, encode_fixed, reconstruct_binary, share_arith, share_binary, Mpc, FRAC_BITS};
use fedseg::updates::SignVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fedseg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = SignVector::from_bits(BitVector::from_bools([true, false, true, true, false, false, true, false]));
    let shared = share_binary(&s, 3, &mut rng)?;
    for sh in shared.shares() {
        println!("server {} holds {:?}", sh.server_id, sh.bits.iter().map(u8::from).collect::<Vec<_>>());
    }
    let back = reconstruct_binary(shared.shares(), 3)?;
    println!("reconstructed equals input: {}", back == s);

    let xs = [1.5, -2.25, 0.125];
    let ys = [4.0, 0.5, -8.0];
    let enc = |v: &[f64]| v.iter().map(|x| encode_fixed(*x, FRAC_BITS)).collect::<Vec<_>>();
    let x = share_arith(&enc(&xs), FRAC_BITS, 3, &mut rng)?;
    let y = share_arith(&enc(&ys), FRAC_BITS, 3, &mut rng)?;
    let mut mpc = Mpc::new(3, 2)?;
    let z = mpc.mul(&x, &y)?;
    let got: Vec<f64> = z.reveal_raw().iter().map(|r| decode_fixed(*r, FRAC_BITS)).collect();
    println!("x·y = {got:?}");
    println!("traffic: {} bytes over {} rounds", mpc.traffic.bytes, mpc.traffic.rounds);
    Ok(())
}
