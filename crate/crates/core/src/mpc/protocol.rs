use super::dealer::{AndTriple, BeaverTriple, DaBits, Dealer, EdaBits};
use super::share::{ArithShared, BoolShared};
use super::{FRAC_BITS, RAW_LIMIT};
use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Bytes and communication rounds exchanged between servers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Traffic {
    pub bytes: u64,
    pub rounds: u64,
}

impl Traffic {
    pub fn add(&mut self, bytes: u64) {
        self.bytes += bytes;
        self.rounds += 1;
    }
}

/// Lockstep simulation of the server cluster: owns the dealer and meters
/// every opening.
#[derive(Debug, Clone)]
pub struct Mpc {
    pub dealer: Dealer,
    pub traffic: Traffic,
}

impl Mpc {
    pub fn new(servers: usize, seed: u64) -> Result<Self> {
        Ok(Self::with_dealer(Dealer::new(servers, seed)?))
    }

    pub fn with_dealer(dealer: Dealer) -> Self {
        Self {
            dealer,
            traffic: Traffic::default(),
        }
    }

    pub fn servers(&self) -> usize {
        self.dealer.servers()
    }

    fn check(&self, servers: usize) -> Result<()> {
        if servers != self.servers() {
            return Err(Error::MissingShare {
                expected: self.servers(),
                actual: servers,
            });
        }
        Ok(())
    }

    /// Every server broadcasts its share to the others.
    pub fn open_arith(&mut self, x: &ArithShared) -> Result<Vec<u64>> {
        self.check(x.servers())?;
        let s = x.servers() as u64;
        self.traffic.add(s * (s - 1) * 8 * x.len() as u64);
        Ok(x.reveal_raw())
    }

    pub fn open_bool(&mut self, x: &BoolShared) -> Result<BitVector> {
        self.check(x.servers())?;
        let s = x.servers() as u64;
        self.traffic.add(s * (s - 1) * x.len().div_ceil(8) as u64);
        Ok(x.reveal())
    }

    /// Elementwise AND of two boolean sharings.
    pub fn and(&mut self, x: &BoolShared, y: &BoolShared) -> Result<BoolShared> {
        let t = self.dealer.and_triple(x.len())?;
        self.and_with(x, y, t)
    }

    fn and_with(&mut self, x: &BoolShared, y: &BoolShared, t: AndTriple) -> Result<BoolShared> {
        t.consume()?;
        let d = self.open_bool(&x.xor(&t.a)?)?;
        let e = self.open_bool(&y.xor(&t.b)?)?;
        let de = &d & &e;
        let parts = (0..x.servers())
            .map(|s| {
                let mut z = t.c.share(s).bits.clone();
                z.xor_assign(&(&d & &t.b.share(s).bits));
                z.xor_assign(&(&e & &t.a.share(s).bits));
                if s == 0 {
                    z.xor_assign(&de);
                }
                z
            })
            .collect();
        Ok(BoolShared::from_bitvectors(parts))
    }

    /// Converts boolean-shared bits into arithmetic shares at scale
    /// `2^frac_bits`.
    pub fn b2a(&mut self, bits: &BoolShared, frac_bits: u32) -> Result<ArithShared> {
        let db = self.dealer.dabits(bits.len())?;
        self.b2a_with(bits, db, frac_bits)
    }

    fn b2a_with(&mut self, bits: &BoolShared, db: DaBits, frac_bits: u32) -> Result<ArithShared> {
        db.consume()?;
        // [x] = c + (1 - 2c)·[r] where c = x ⊕ r is public
        let c = self.open_bool(&bits.xor(&db.boolean)?)?;
        let unit = 1u64 << frac_bits;
        let parts = (0..bits.servers())
            .map(|s| {
                db.arith
                    .share(s)
                    .elems
                    .iter()
                    .enumerate()
                    .map(|(i, r)| {
                        let ci = c.get(i);
                        let mut v = if ci { r.wrapping_neg() } else { *r };
                        if s == 0 && ci {
                            v = v.wrapping_add(1);
                        }
                        v.wrapping_mul(unit)
                    })
                    .collect()
            })
            .collect();
        Ok(ArithShared::from_vecs(parts, frac_bits))
    }

    /// Beaver multiplication with a fresh triple, followed by fixed-point
    /// rescaling.
    pub fn mul(&mut self, x: &ArithShared, y: &ArithShared) -> Result<ArithShared> {
        let t = self.dealer.beaver_triple(x.len())?;
        beaver_multiply(x, y, t, self)
    }

    /// Product without rescaling; the result carries `fx + fy` fractional
    /// bits.
    pub fn mul_raw(&mut self, x: &ArithShared, y: &ArithShared) -> Result<ArithShared> {
        let t = self.dealer.beaver_triple(x.len())?;
        self.mul_raw_with(x, y, t)
    }

    fn mul_raw_with(&mut self, x: &ArithShared, y: &ArithShared, t: BeaverTriple) -> Result<ArithShared> {
        if x.len() != y.len() || x.len() != t.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                actual: if x.len() != y.len() { y.len() } else { t.len() },
            });
        }
        t.consume()?;
        let d = self.open_arith(&x.sub(&t.a.clone().with_frac_bits(x.frac_bits()))?)?;
        let e = self.open_arith(&y.sub(&t.b.clone().with_frac_bits(y.frac_bits()))?)?;
        let f = x.frac_bits() + y.frac_bits();
        // xy = c + d·b + e·a + d·e
        let parts = (0..x.servers())
            .map(|s| {
                (0..x.len())
                    .map(|i| {
                        let mut v = t.c.share(s).elems[i]
                            .wrapping_add(d[i].wrapping_mul(t.b.share(s).elems[i]))
                            .wrapping_add(e[i].wrapping_mul(t.a.share(s).elems[i]));
                        if s == 0 {
                            v = v.wrapping_add(d[i].wrapping_mul(e[i]));
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        Ok(ArithShared::from_vecs(parts, f))
    }

    /// Signed right shift by `shift` bits on shared values with
    /// `|x| < 2^62`. The result is `floor(x / 2^shift)` or one more.
    ///
    /// `c = x + 2^62 + r` is opened for an edaBit `r`; the wrap bit
    /// `[c < r]` is the borrow-out of `c - r`, computed on the bits of `r`.
    pub fn truncate(&mut self, x: &ArithShared, shift: u32) -> Result<ArithShared> {
        if shift == 0 {
            return Ok(x.clone());
        }
        if shift > x.frac_bits() {
            return Err(Error::ScaleMismatch {
                left: x.frac_bits(),
                right: shift,
            });
        }
        let eda = self.dealer.edabits(x.len(), shift)?;
        self.truncate_with(x, eda)
    }

    fn truncate_with(&mut self, x: &ArithShared, eda: EdaBits) -> Result<ArithShared> {
        eda.consume()?;
        let shift = eda.shift;
        let offset = x.add_public_scalar(RAW_LIMIT);
        let masked = offset.add(&eda.arith.clone().with_frac_bits(x.frac_bits()))?;
        let c = self.open_arith(&masked)?;
        let (_, wrap) = self.subtract_public_bits(&c, &eda.bits, true)?;
        let wrap = self.b2a(&wrap.expect("borrow-out requested"), 0)?;
        let frac = x.frac_bits() - shift;
        let c_high: Vec<u64> = c.iter().map(|v| v >> shift).collect();
        let out = wrap
            .scale(1i64.wrapping_shl(64 - shift))
            .with_frac_bits(frac)
            .sub(&eda.high.clone().with_frac_bits(frac))?
            .add_public(&c_high)
            .add_public_scalar((RAW_LIMIT >> shift).wrapping_neg());
        Ok(out)
    }

    /// Ripple-borrow subtraction `c - r` of public values `c` and shared
    /// bits `r`. Returns the shared most-significant difference bit and,
    /// if requested, the shared borrow-out (`c < r` as unsigned).
    pub(crate) fn subtract_public_bits(
        &mut self,
        c: &[u64],
        r_bits: &[BoolShared],
        want_borrow_out: bool,
    ) -> Result<(BoolShared, Option<BoolShared>)> {
        let m = c.len();
        let servers = self.servers();
        let c_bit = |i: usize| BitVector::from_bools(c.iter().map(|v| (v >> i) & 1 == 1));
        // borrow_1 = ¬c_0 ∧ r_0
        let mut borrow = r_bits[0].and_public(&c_bit(0).not());
        for i in 1..63 {
            let t = self.and(&r_bits[i], &borrow)?;
            // borrow_{i+1} = t ⊕ (¬c_i ∧ (r_i ⊕ borrow_i))
            borrow = t.xor(&r_bits[i].xor(&borrow)?.and_public(&c_bit(i).not()))?;
        }
        let msb = r_bits[63].xor(&borrow)?.xor_public(&c_bit(63));
        let borrow_out = if want_borrow_out {
            let t = self.and(&r_bits[63], &borrow)?;
            Some(t.xor(&r_bits[63].xor(&borrow)?.and_public(&c_bit(63).not()))?)
        } else {
            None
        };
        debug_assert_eq!(msb.servers(), servers);
        debug_assert_eq!(msb.len(), m);
        Ok((msb, borrow_out))
    }
}

/// Converts boolean shares to arithmetic shares at the default fixed-point
/// scale: a shared bit `1` reconstructs to raw `2^FRAC_BITS`.
pub fn b2a_convert(bits: &BoolShared, mpc: &mut Mpc) -> Result<ArithShared> {
    mpc.b2a(bits, FRAC_BITS)
}

/// `[[xy]] = c + (x-a)·[[b]] + (y-b)·[[a]] + (x-a)(y-b)`, then a truncation by
/// `min(fx, fy)` bits so fixed-point products keep their scale.
pub fn beaver_multiply(
    x: &ArithShared,
    y: &ArithShared,
    triple: BeaverTriple,
    mpc: &mut Mpc,
) -> Result<ArithShared> {
    let shift = x.frac_bits().min(y.frac_bits());
    let raw = mpc.mul_raw_with(x, y, triple)?;
    mpc.truncate(&raw, shift)
}
