//! Additively homomorphic hashing for aggregate verification, and the
//! majority vote clients run over the servers' indicator-matrix broadcasts.
//!
//! `H(x) = (g^{⟨δ,x⟩}, h^{⟨φ,x⟩})` with `g` and `h` of prime order `q` in
//! `Z_{p1}^*` and `Z_{p2}^*`. Since the exponent maps are linear,
//! `H(x)·H(y) = H(x + y)`, so a client can check a cluster aggregate
//! against the product of the members' published digests.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use rand::RngCore;

use crate::bits::BitVector;
use crate::clustering::IndMatrix;
use crate::error::{Error, Result};
use crate::mpc::MIN_SERVERS;
use crate::seed;

/// Group parameters shared by every key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HhfGroup {
    /// Prime order of both subgroups (128 bits).
    pub q: BigUint,
    /// Safe prime `2q + 1`; `g = 4` generates its order-`q` subgroup.
    pub p1: BigUint,
    pub g: BigUint,
    /// Prime `12q + 1`; `h = 2^12` has order `q`.
    pub p2: BigUint,
    pub h: BigUint,
}

impl HhfGroup {
    pub fn standard() -> &'static HhfGroup {
        static GROUP: OnceLock<HhfGroup> = OnceLock::new();
        GROUP.get_or_init(|| {
            let q = BigUint::from(0x800000088f89697fba6dd33e22266ed7u128);
            let p1 = &q * 2u32 + 1u32;
            let p2 = &q * 12u32 + 1u32;
            HhfGroup {
                q,
                p1,
                g: BigUint::from(4u32),
                p2,
                h: BigUint::from(4096u32),
            }
        })
    }
}

/// Keyed linear maps `δ`, `φ` over `Z_q`, one entry per coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HhfKey {
    pub delta: Vec<BigUint>,
    pub phi: Vec<BigUint>,
    pub group: HhfGroup,
}

impl HhfKey {
    /// Derives a key for `dim` coordinates from an experiment seed.
    pub fn generate(dim: usize, seed_value: u64) -> Self {
        let group = HhfGroup::standard().clone();
        let mut rng = seed::rng(seed_value, &[seed::tag::HHF_KEY]);
        let q = group.q.clone();
        let mut draw = || loop {
            // rejection sampling keeps exponents uniform on Z_q
            let v = ((rng.next_u64() as u128) << 64) | rng.next_u64() as u128;
            let v = BigUint::from(v);
            if v < q {
                break v;
            }
        };
        let delta = (0..dim).map(|_| draw()).collect();
        let phi = (0..dim).map(|_| draw()).collect();
        Self { delta, phi, group }
    }

    pub fn dim(&self) -> usize {
        self.delta.len()
    }
}

/// A pair of group elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Digest {
    pub g_part: BigUint,
    pub h_part: BigUint,
}

impl Digest {
    pub fn identity() -> Self {
        Self {
            g_part: BigUint::one(),
            h_part: BigUint::one(),
        }
    }

    /// Componentwise group product.
    pub fn combine(&self, other: &Digest, group: &HhfGroup) -> Digest {
        Digest {
            g_part: (&self.g_part * &other.g_part) % &group.p1,
            h_part: (&self.h_part * &other.h_part) % &group.p2,
        }
    }
}

fn inner_mod_q(key: &[BigUint], x: &[i64], q: &BigUint) -> BigUint {
    let mut acc = BigInt::zero();
    for (k, v) in key.iter().zip(x) {
        if *v != 0 {
            acc += BigInt::from_biguint(Sign::Plus, k.clone()) * *v;
        }
    }
    // negative entries behave as q - |v|
    let q = BigInt::from_biguint(Sign::Plus, q.clone());
    let r = ((acc % &q) + &q) % &q;
    r.to_biguint().expect("reduced into [0, q)")
}

/// `(g^{⟨δ,x⟩ mod q} mod p1, h^{⟨φ,x⟩ mod q} mod p2)`.
pub fn hhf_hash(key: &HhfKey, x: &[i64]) -> Result<Digest> {
    if x.len() != key.dim() {
        return Err(Error::DimensionMismatch {
            expected: key.dim(),
            actual: x.len(),
        });
    }
    let gr = &key.group;
    let e1 = inner_mod_q(&key.delta, x, &gr.q);
    let e2 = inner_mod_q(&key.phi, x, &gr.q);
    Ok(Digest {
        g_part: gr.g.modpow(&e1, &gr.p1),
        h_part: gr.h.modpow(&e2, &gr.p2),
    })
}

/// Checks `Π H(DCD(ḡ_i)) = H(G)` for a reconstructed integer aggregate.
pub fn verify_aggregate(key: &HhfKey, member_digests: &[Digest], aggregate: &[i64]) -> Result<bool> {
    let product = member_digests
        .iter()
        .fold(Digest::identity(), |acc, d| acc.combine(d, &key.group));
    Ok(product == hhf_hash(key, aggregate)?)
}

/// Elementwise majority over the servers' broadcasts. A split vote (only
/// possible with an even number of servers) is a protocol fault.
pub fn indm_majority_vote(broadcasts: &[IndMatrix]) -> Result<IndMatrix> {
    if broadcasts.len() < MIN_SERVERS {
        return Err(Error::TooFewServers(broadcasts.len()));
    }
    let n = broadcasts[0].n();
    if let Some(b) = broadcasts.iter().find(|b| b.n() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.n(),
        });
    }
    let s = broadcasts.len();
    let mut out = BitVector::zeros(n * n);
    for i in 0..n {
        for j in 0..n {
            let ones = broadcasts.iter().filter(|b| b.get(i, j)).count();
            if 2 * ones == s {
                return Err(Error::VoteTie { row: i, col: j });
            }
            out.set(i * n + j, 2 * ones > s);
        }
    }
    IndMatrix::from_raw(n, out)
}
