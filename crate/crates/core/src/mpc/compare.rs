use super::protocol::Mpc;
use super::share::ArithShared;
use super::{encode_fixed, RAW_LIMIT};
use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Shared comparison bits at integer scale, plus the opened bits once the
/// bit check has passed.
#[derive(Debug, Clone)]
pub struct ComparisonResult {
    pub bits: ArithShared,
    pub opened: Option<BitVector>,
}

impl ComparisonResult {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Runs the bit check and, if it passes, opens the bits.
    pub fn check_and_open(&mut self, mpc: &mut Mpc) -> Result<&BitVector> {
        if !bit_check(self, mpc)? {
            return Err(Error::BitCheckFailed);
        }
        let raw = mpc.open_arith(&self.bits)?;
        self.opened = Some(BitVector::from_bools(raw.iter().map(|v| *v == 1)));
        Ok(self.opened.as_ref().expect("just set"))
    }
}

/// Elementwise `[x ≤ α]` on the fixed-point values.
///
/// The sign of `α - x` is read from its top bit: `c = (α - x) + r` is opened
/// for an edaBit `r`, and the top bit of `c - r` comes out of a borrow chain
/// over the shared bits of `r`. The comparison is exact on the encoded
/// values; `|x|` and `|α|` must stay below `2^61` raw units.
pub fn secure_leq(x: &ArithShared, alpha: f64, mpc: &mut Mpc) -> Result<ComparisonResult> {
    let f = x.frac_bits();
    let limit = (RAW_LIMIT / 2) as f64 / (1u64 << f) as f64;
    if !alpha.is_finite() || alpha.abs() >= limit {
        return Err(Error::RangeOverflow(format!(
            "threshold {alpha} does not fit {f} fractional bits"
        )));
    }
    let alpha_raw = encode_fixed(alpha, f);
    let v = x.neg().add_public_scalar(alpha_raw);
    let eda = mpc.dealer.edabits(x.len(), 0)?;
    eda.consume()?;
    let c = mpc.open_arith(&v.add(&eda.arith.clone().with_frac_bits(f))?)?;
    let (msb, _) = mpc.subtract_public_bits(&c, &eda.bits, false)?;
    let bits = mpc.b2a(&msb.not(), 0)?;
    Ok(ComparisonResult { bits, opened: None })
}

/// Masks each shared bit `b` with a fresh shared random bit `ρ`, opens
/// `b ⊕ ρ = b + ρ - 2bρ`, and reports whether every opened value is a bit.
/// A non-bit `b` survives only if the corruption happens to map to `{0,1}`.
pub fn bit_check(r: &ComparisonResult, mpc: &mut Mpc) -> Result<bool> {
    let m = r.len();
    let rho = mpc.dealer.dabits(m)?;
    rho.consume()?;
    let b = r.bits.clone().with_frac_bits(0);
    let prod = mpc.mul_raw(&b, &rho.arith)?;
    let masked = b.add(&rho.arith)?.sub(&prod.scale(2))?;
    let opened = mpc.open_arith(&masked)?;
    Ok(opened.iter().all(|v| *v <= 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpc::{decode_fixed, share_arith, FRAC_BITS};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shared(vals: &[f64], servers: usize, rng: &mut ChaCha8Rng) -> ArithShared {
        let raw: Vec<u64> = vals.iter().map(|v| encode_fixed(*v, FRAC_BITS)).collect();
        share_arith(&raw, FRAC_BITS, servers, rng).unwrap()
    }

    fn leq(vals: &[f64], alpha: f64, mpc: &mut Mpc, rng: &mut ChaCha8Rng) -> Vec<bool> {
        let x = shared(vals, mpc.servers(), rng);
        let mut r = secure_leq(&x, alpha, mpc).unwrap();
        r.check_and_open(mpc).unwrap().iter().collect()
    }

    #[test]
    fn examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut mpc = Mpc::new(3, 2).unwrap();
        assert_eq!(leq(&[1.0, 1.4142, 1.2], 1.2, &mut mpc, &mut rng), vec![true, false, true]);
    }

    #[test]
    fn fuzz_against_plaintext() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut mpc = Mpc::new(4, 4).unwrap();
        let n = 100_000;
        let alpha = 1.2;
        let vals: Vec<f64> = (0..n)
            .map(|i| match i % 3 {
                0 => rng.random_range(-3.0..3.0),
                1 => alpha + rng.random_range(-1e-4..1e-4),
                _ => rng.random_range(-1e5..1e5),
            })
            .collect();
        let got = leq(&vals, alpha, &mut mpc, &mut rng);
        for (v, g) in vals.iter().zip(got) {
            let encoded = decode_fixed(encode_fixed(*v, FRAC_BITS), FRAC_BITS);
            assert_eq!(g, encoded <= decode_fixed(encode_fixed(alpha, FRAC_BITS), FRAC_BITS), "{v}");
        }
    }

    #[test]
    fn threshold_out_of_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut mpc = Mpc::new(3, 6).unwrap();
        let x = shared(&[0.0], 3, &mut rng);
        assert!(matches!(secure_leq(&x, 1e13, &mut mpc), Err(Error::RangeOverflow(_))));
        assert!(matches!(secure_leq(&x, f64::NAN, &mut mpc), Err(Error::RangeOverflow(_))));
    }

    #[test]
    fn honest_bit_check_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut mpc = Mpc::new(3, 8).unwrap();
        let vals: Vec<f64> = (0..10_000).map(|_| rng.random_range(0.0..2.0)).collect();
        let x = shared(&vals, 3, &mut rng);
        let r = secure_leq(&x, 1.2, &mut mpc).unwrap();
        assert!(bit_check(&r, &mut mpc).unwrap());
    }

    #[test]
    fn corruption_by_seven_is_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut mpc = Mpc::new(3, 10).unwrap();
        for trial in 0..200 {
            let x = shared(&[rng.random_range(0.0..2.0)], 3, &mut rng);
            let mut r = secure_leq(&x, 1.2, &mut mpc).unwrap();
            let server = trial % 3;
            r.bits.share_mut(server).elems[0] = r.bits.share(server).elems[0].wrapping_add(7);
            assert!(!bit_check(&r, &mut mpc).unwrap());
            assert_eq!(r.check_and_open(&mut mpc).unwrap_err(), Error::BitCheckFailed);
        }
    }

    #[test]
    fn bit_flip_passes_the_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut mpc = Mpc::new(3, 12).unwrap();
        let x = shared(&[0.5], 3, &mut rng);
        let mut r = secure_leq(&x, 1.2, &mut mpc).unwrap();
        // 1 -> 0
        r.bits.share_mut(1).elems[0] = r.bits.share(1).elems[0].wrapping_sub(1);
        assert!(bit_check(&r, &mut mpc).unwrap());
        assert!(!r.check_and_open(&mut mpc).unwrap().get(0));
    }
}
