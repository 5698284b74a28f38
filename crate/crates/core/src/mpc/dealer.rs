use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::share::{share_arith, share_bits, ArithShared, BoolShared};
use super::MIN_SERVERS;
use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Single-use marker shared by all clones of a piece of correlated
/// randomness.
#[derive(Debug, Clone, Default)]
struct UseOnce(Arc<AtomicBool>);

impl UseOnce {
    fn consume(&self) -> Result<()> {
        if self.0.swap(true, Ordering::SeqCst) {
            Err(Error::TripleReused)
        } else {
            Ok(())
        }
    }

    fn is_spent(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }
}

/// Shares of `(a, b, c = a·b mod 2^64)`, elementwise over a batch.
#[derive(Debug, Clone)]
pub struct BeaverTriple {
    pub a: ArithShared,
    pub b: ArithShared,
    pub c: ArithShared,
    once: UseOnce,
}

impl BeaverTriple {
    pub(crate) fn consume(&self) -> Result<()> {
        self.once.consume()
    }

    pub fn is_spent(&self) -> bool {
        self.once.is_spent()
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// Boolean shares of `(a, b, c = a ∧ b)`.
#[derive(Debug, Clone)]
pub struct AndTriple {
    pub a: BoolShared,
    pub b: BoolShared,
    pub c: BoolShared,
    once: UseOnce,
}

impl AndTriple {
    pub(crate) fn consume(&self) -> Result<()> {
        self.once.consume()
    }
}

/// Random bits shared both in `GF(2)` and in `Z_{2^64}` (integer scale).
#[derive(Debug, Clone)]
pub struct DaBits {
    pub boolean: BoolShared,
    pub arith: ArithShared,
    once: UseOnce,
}

impl DaBits {
    pub(crate) fn consume(&self) -> Result<()> {
        self.once.consume()
    }
}

/// Random ring elements `r` shared arithmetically, together with shares of
/// `r >> shift` and boolean shares of each of the 64 bits of `r`.
#[derive(Debug, Clone)]
pub struct EdaBits {
    pub arith: ArithShared,
    pub high: ArithShared,
    /// `bits[i]` holds bit `i` of every element.
    pub bits: Vec<BoolShared>,
    pub shift: u32,
    once: UseOnce,
}

impl EdaBits {
    pub(crate) fn consume(&self) -> Result<()> {
        self.once.consume()
    }
}

/// Element counts emitted so far, per kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DealerStats {
    pub triples: usize,
    pub and_triples: usize,
    pub dabits: usize,
    pub edabits: usize,
}

impl DealerStats {
    pub fn total(&self) -> usize {
        self.triples + self.and_triples + self.dabits + self.edabits
    }
}

/// Trusted source of correlated randomness.
///
/// Emissions are deterministic given the seed and the request sequence. An
/// optional budget caps the total number of elements handed out.
#[derive(Debug, Clone)]
pub struct Dealer {
    servers: usize,
    rng: ChaCha8Rng,
    budget: Option<usize>,
    stats: DealerStats,
}

impl Dealer {
    pub fn new(servers: usize, seed: u64) -> Result<Self> {
        if servers < MIN_SERVERS {
            return Err(Error::TooFewServers(servers));
        }
        Ok(Self {
            servers,
            rng: ChaCha8Rng::seed_from_u64(seed),
            budget: None,
            stats: DealerStats::default(),
        })
    }

    pub fn with_budget(servers: usize, seed: u64, budget: usize) -> Result<Self> {
        let mut d = Self::new(servers, seed)?;
        d.budget = Some(budget);
        Ok(d)
    }

    pub fn servers(&self) -> usize {
        self.servers
    }

    pub fn stats(&self) -> DealerStats {
        self.stats
    }

    fn reserve(&mut self, requested: usize) -> Result<()> {
        if let Some(budget) = self.budget {
            let remaining = budget.saturating_sub(self.stats.total());
            if requested > remaining {
                return Err(Error::DealerExhausted {
                    requested,
                    remaining,
                });
            }
        }
        Ok(())
    }

    fn share_raw(&mut self, values: &[u64], frac_bits: u32) -> ArithShared {
        share_arith(values, frac_bits, self.servers, &mut self.rng).expect("servers checked")
    }

    fn share_bitvec(&mut self, bits: &BitVector) -> BoolShared {
        share_bits(bits, self.servers, &mut self.rng).expect("servers checked")
    }

    /// `m` Beaver triples over the raw ring.
    pub fn beaver_triple(&mut self, m: usize) -> Result<BeaverTriple> {
        self.reserve(m)?;
        self.stats.triples += m;
        let a: Vec<u64> = (0..m).map(|_| self.rng.next_u64()).collect();
        let b: Vec<u64> = (0..m).map(|_| self.rng.next_u64()).collect();
        let c: Vec<u64> = a.iter().zip(&b).map(|(x, y)| x.wrapping_mul(*y)).collect();
        Ok(BeaverTriple {
            a: self.share_raw(&a, 0),
            b: self.share_raw(&b, 0),
            c: self.share_raw(&c, 0),
            once: UseOnce::default(),
        })
    }

    /// `m` boolean AND triples.
    pub fn and_triple(&mut self, m: usize) -> Result<AndTriple> {
        self.reserve(m)?;
        self.stats.and_triples += m;
        let a = BitVector::random(m, &mut self.rng);
        let b = BitVector::random(m, &mut self.rng);
        let c = &a & &b;
        Ok(AndTriple {
            a: self.share_bitvec(&a),
            b: self.share_bitvec(&b),
            c: self.share_bitvec(&c),
            once: UseOnce::default(),
        })
    }

    /// `m` daBits.
    pub fn dabits(&mut self, m: usize) -> Result<DaBits> {
        self.reserve(m)?;
        self.stats.dabits += m;
        let r = BitVector::random(m, &mut self.rng);
        let vals: Vec<u64> = r.iter().map(u64::from).collect();
        Ok(DaBits {
            boolean: self.share_bitvec(&r),
            arith: self.share_raw(&vals, 0),
            once: UseOnce::default(),
        })
    }

    /// `m` edaBits with the high part precomputed for a right shift by
    /// `shift` bits.
    pub fn edabits(&mut self, m: usize, shift: u32) -> Result<EdaBits> {
        assert!(shift < 64);
        self.reserve(m)?;
        self.stats.edabits += m;
        let r: Vec<u64> = (0..m).map(|_| self.rng.next_u64()).collect();
        let high: Vec<u64> = r.iter().map(|v| v >> shift).collect();
        let bits = (0..64)
            .map(|i| {
                let column = BitVector::from_bools(r.iter().map(|v| (v >> i) & 1 == 1));
                self.share_bitvec(&column)
            })
            .collect();
        Ok(EdaBits {
            arith: self.share_raw(&r, 0),
            high: self.share_raw(&high, 0),
            bits,
            shift,
            once: UseOnce::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triples_are_consistent() {
        let mut d = Dealer::new(3, 1).unwrap();
        let t = d.beaver_triple(100).unwrap();
        let (a, b, c) = (t.a.reveal_raw(), t.b.reveal_raw(), t.c.reveal_raw());
        for i in 0..100 {
            assert_eq!(c[i], a[i].wrapping_mul(b[i]));
        }
        let t = d.and_triple(200).unwrap();
        assert_eq!(t.c.reveal(), &t.a.reveal() & &t.b.reveal());
    }

    #[test]
    fn dabits_agree_across_domains() {
        let mut d = Dealer::new(4, 2).unwrap();
        let db = d.dabits(500).unwrap();
        let bits = db.boolean.reveal();
        let vals = db.arith.reveal_raw();
        for i in 0..500 {
            assert_eq!(vals[i], bits.get(i) as u64);
        }
    }

    #[test]
    fn edabits_decompose() {
        let mut d = Dealer::new(3, 3).unwrap();
        let e = d.edabits(50, 20).unwrap();
        let r = e.arith.reveal_raw();
        let hi = e.high.reveal_raw();
        for k in 0..50 {
            let from_bits = (0..64).fold(0u64, |acc, i| acc | ((e.bits[i].reveal().get(k) as u64) << i));
            assert_eq!(from_bits, r[k]);
            assert_eq!(hi[k], r[k] >> 20);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let mut a = Dealer::new(3, 9).unwrap();
        let mut b = Dealer::new(3, 9).unwrap();
        assert_eq!(
            a.beaver_triple(10).unwrap().c.reveal_raw(),
            b.beaver_triple(10).unwrap().c.reveal_raw()
        );
    }

    #[test]
    fn budget_exhaustion() {
        let mut d = Dealer::with_budget(3, 1, 10).unwrap();
        d.dabits(6).unwrap();
        assert_eq!(
            d.beaver_triple(5).unwrap_err(),
            Error::DealerExhausted {
                requested: 5,
                remaining: 4
            }
        );
        d.beaver_triple(4).unwrap();
        assert_eq!(d.stats().total(), 10);
    }

    #[test]
    fn single_use_is_shared_by_clones() {
        let mut d = Dealer::new(3, 1).unwrap();
        let t = d.beaver_triple(1).unwrap();
        let copy = t.clone();
        t.consume().unwrap();
        assert!(copy.is_spent());
        assert_eq!(copy.consume().unwrap_err(), Error::TripleReused);
    }
}
