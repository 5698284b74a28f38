use rand::RngCore;

use super::MIN_SERVERS;
use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::updates::SignVector;

/// One server's boolean share of a bit vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolShareVec {
    pub server_id: usize,
    pub bits: BitVector,
}

/// One server's arithmetic share of a vector of ring elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArithShareVec {
    pub server_id: usize,
    pub elems: Vec<u64>,
    pub frac_bits: u32,
}

/// A boolean-shared vector: every server's share, indexed by server id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolShared {
    shares: Vec<BoolShareVec>,
}

/// An arithmetic-shared vector: every server's share, indexed by server id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArithShared {
    shares: Vec<ArithShareVec>,
}

fn check_servers(servers: usize) -> Result<()> {
    if servers < MIN_SERVERS {
        return Err(Error::TooFewServers(servers));
    }
    Ok(())
}

/// XOR-shares `bits` among `servers`: the first `S - 1` shares are uniform,
/// the last one completes the XOR.
pub fn share_bits<R: RngCore + ?Sized>(
    bits: &BitVector,
    servers: usize,
    rng: &mut R,
) -> Result<BoolShared> {
    check_servers(servers)?;
    let mut last = bits.clone();
    let mut shares = Vec::with_capacity(servers);
    for server_id in 0..servers - 1 {
        let r = BitVector::random(bits.len(), rng);
        last.xor_assign(&r);
        shares.push(BoolShareVec { server_id, bits: r });
    }
    shares.push(BoolShareVec {
        server_id: servers - 1,
        bits: last,
    });
    Ok(BoolShared { shares })
}

/// `[[ḡ]] <- ḡ`: boolean-shares a sign vector.
pub fn share_binary<R: RngCore + ?Sized>(
    s: &SignVector,
    servers: usize,
    rng: &mut R,
) -> Result<BoolShared> {
    share_bits(s.bits(), servers, rng)
}

/// XOR of all `servers` shares. Shares must come from distinct servers
/// `0..servers` and have equal lengths.
pub fn reconstruct_binary(shares: &[BoolShareVec], servers: usize) -> Result<SignVector> {
    if shares.len() != servers {
        return Err(Error::MissingShare {
            expected: servers,
            actual: shares.len(),
        });
    }
    let mut seen = vec![false; servers];
    for s in shares {
        if s.server_id >= servers || std::mem::replace(&mut seen[s.server_id], true) {
            return Err(Error::MissingShare {
                expected: servers,
                actual: seen.iter().filter(|b| **b).count(),
            });
        }
    }
    let len = shares[0].bits.len();
    let mut out = BitVector::zeros(len);
    for s in shares {
        if s.bits.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                actual: s.bits.len(),
            });
        }
        out.xor_assign(&s.bits);
    }
    Ok(SignVector::from_bits(out))
}

/// Additively shares raw ring elements among `servers`.
pub fn share_arith<R: RngCore + ?Sized>(
    values: &[u64],
    frac_bits: u32,
    servers: usize,
    rng: &mut R,
) -> Result<ArithShared> {
    check_servers(servers)?;
    let mut last = values.to_vec();
    let mut shares = Vec::with_capacity(servers);
    for server_id in 0..servers - 1 {
        let r: Vec<u64> = (0..values.len()).map(|_| rng.next_u64()).collect();
        for (l, x) in last.iter_mut().zip(&r) {
            *l = l.wrapping_sub(*x);
        }
        shares.push(ArithShareVec {
            server_id,
            elems: r,
            frac_bits,
        });
    }
    shares.push(ArithShareVec {
        server_id: servers - 1,
        elems: last,
        frac_bits,
    });
    Ok(ArithShared { shares })
}

/// Wrapping sum of all shares.
pub fn reconstruct_arith(shares: &[ArithShareVec]) -> Vec<u64> {
    let len = shares.first().map_or(0, |s| s.elems.len());
    let mut out = vec![0u64; len];
    for s in shares {
        for (o, e) in out.iter_mut().zip(&s.elems) {
            *o = o.wrapping_add(*e);
        }
    }
    out
}

/// Local XOR of two shares held by the same server.
pub fn xor_shares_local(a: &BoolShareVec, b: &BoolShareVec) -> Result<BoolShareVec> {
    if a.server_id != b.server_id {
        return Err(Error::ServerMismatch {
            left: a.server_id,
            right: b.server_id,
        });
    }
    if a.bits.len() != b.bits.len() {
        return Err(Error::DimensionMismatch {
            expected: a.bits.len(),
            actual: b.bits.len(),
        });
    }
    Ok(BoolShareVec {
        server_id: a.server_id,
        bits: &a.bits ^ &b.bits,
    })
}

/// Local addition of two shares held by the same server.
pub fn add_shares_local(a: &ArithShareVec, b: &ArithShareVec) -> Result<ArithShareVec> {
    if a.server_id != b.server_id {
        return Err(Error::ServerMismatch {
            left: a.server_id,
            right: b.server_id,
        });
    }
    if a.frac_bits != b.frac_bits {
        return Err(Error::ScaleMismatch {
            left: a.frac_bits,
            right: b.frac_bits,
        });
    }
    if a.elems.len() != b.elems.len() {
        return Err(Error::DimensionMismatch {
            expected: a.elems.len(),
            actual: b.elems.len(),
        });
    }
    Ok(ArithShareVec {
        server_id: a.server_id,
        elems: a
            .elems
            .iter()
            .zip(&b.elems)
            .map(|(x, y)| x.wrapping_add(*y))
            .collect(),
        frac_bits: a.frac_bits,
    })
}

/// Local multiplication of a share by a public integer constant. The scale
/// is unchanged, so `c` acts on the represented value directly.
pub fn scale_shares_local(x: &ArithShareVec, c: i64) -> ArithShareVec {
    ArithShareVec {
        server_id: x.server_id,
        elems: x.elems.iter().map(|e| e.wrapping_mul(c as u64)).collect(),
        frac_bits: x.frac_bits,
    }
}

impl BoolShared {
    pub fn from_shares(shares: Vec<BoolShareVec>) -> Result<Self> {
        check_servers(shares.len())?;
        let len = shares[0].bits.len();
        for (i, s) in shares.iter().enumerate() {
            if s.server_id != i {
                return Err(Error::ServerMismatch {
                    left: i,
                    right: s.server_id,
                });
            }
            if s.bits.len() != len {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    actual: s.bits.len(),
                });
            }
        }
        Ok(Self { shares })
    }

    pub(crate) fn from_bitvectors(parts: Vec<BitVector>) -> Self {
        Self {
            shares: parts
                .into_iter()
                .enumerate()
                .map(|(server_id, bits)| BoolShareVec { server_id, bits })
                .collect(),
        }
    }

    /// A sharing of a public vector (server 0 holds it, others hold zero).
    pub fn public(bits: &BitVector, servers: usize) -> Self {
        Self::from_bitvectors(
            (0..servers)
                .map(|s| {
                    if s == 0 {
                        bits.clone()
                    } else {
                        BitVector::zeros(bits.len())
                    }
                })
                .collect(),
        )
    }

    pub fn shares(&self) -> &[BoolShareVec] {
        &self.shares
    }

    pub fn share(&self, server: usize) -> &BoolShareVec {
        &self.shares[server]
    }

    pub fn share_mut(&mut self, server: usize) -> &mut BoolShareVec {
        &mut self.shares[server]
    }

    pub fn into_shares(self) -> Vec<BoolShareVec> {
        self.shares
    }

    pub fn servers(&self) -> usize {
        self.shares.len()
    }

    pub fn len(&self) -> usize {
        self.shares[0].bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Local reconstruction, without traffic accounting. Tests and oracles
    /// only; protocol code opens through [`super::Mpc`].
    pub fn reveal(&self) -> BitVector {
        let mut out = BitVector::zeros(self.len());
        for s in &self.shares {
            out.xor_assign(&s.bits);
        }
        out
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            shares: self
                .shares
                .iter()
                .zip(&other.shares)
                .map(|(a, b)| xor_shares_local(a, b))
                .collect::<Result<_>>()?,
        })
    }

    /// XOR with a public vector (applied by server 0 only).
    pub fn xor_public(&self, c: &BitVector) -> Self {
        let mut out = self.clone();
        out.shares[0].bits.xor_assign(c);
        out
    }

    /// AND with a public vector (every server masks its share).
    pub fn and_public(&self, c: &BitVector) -> Self {
        let mut out = self.clone();
        for s in &mut out.shares {
            s.bits.and_assign(c);
        }
        out
    }

    pub fn not(&self) -> Self {
        self.xor_public(&BitVector::ones(self.len()))
    }

    /// Concatenates several sharings held by the same servers.
    pub fn concat(parts: &[BoolShared]) -> Self {
        let servers = parts[0].servers();
        Self::from_bitvectors(
            (0..servers)
                .map(|s| BitVector::from_bools(parts.iter().flat_map(|p| p.shares[s].bits.iter())))
                .collect(),
        )
    }
}

impl ArithShared {
    pub fn from_shares(shares: Vec<ArithShareVec>) -> Result<Self> {
        check_servers(shares.len())?;
        let len = shares[0].elems.len();
        let f = shares[0].frac_bits;
        for (i, s) in shares.iter().enumerate() {
            if s.server_id != i {
                return Err(Error::ServerMismatch {
                    left: i,
                    right: s.server_id,
                });
            }
            if s.elems.len() != len {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    actual: s.elems.len(),
                });
            }
            if s.frac_bits != f {
                return Err(Error::ScaleMismatch {
                    left: f,
                    right: s.frac_bits,
                });
            }
        }
        Ok(Self { shares })
    }

    pub(crate) fn from_vecs(parts: Vec<Vec<u64>>, frac_bits: u32) -> Self {
        Self {
            shares: parts
                .into_iter()
                .enumerate()
                .map(|(server_id, elems)| ArithShareVec {
                    server_id,
                    elems,
                    frac_bits,
                })
                .collect(),
        }
    }

    /// A sharing of public raw values (server 0 holds them).
    pub fn public(values: &[u64], frac_bits: u32, servers: usize) -> Self {
        Self::from_vecs(
            (0..servers)
                .map(|s| {
                    if s == 0 {
                        values.to_vec()
                    } else {
                        vec![0; values.len()]
                    }
                })
                .collect(),
            frac_bits,
        )
    }

    pub fn shares(&self) -> &[ArithShareVec] {
        &self.shares
    }

    pub fn share(&self, server: usize) -> &ArithShareVec {
        &self.shares[server]
    }

    pub fn share_mut(&mut self, server: usize) -> &mut ArithShareVec {
        &mut self.shares[server]
    }

    pub fn into_shares(self) -> Vec<ArithShareVec> {
        self.shares
    }

    pub fn servers(&self) -> usize {
        self.shares.len()
    }

    pub fn len(&self) -> usize {
        self.shares[0].elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn frac_bits(&self) -> u32 {
        self.shares[0].frac_bits
    }

    /// Local reconstruction of raw ring values (tests and oracles only).
    pub fn reveal_raw(&self) -> Vec<u64> {
        reconstruct_arith(&self.shares)
    }

    /// Local reconstruction decoded at the sharing's fixed-point scale.
    pub fn reveal(&self) -> Vec<f64> {
        let f = self.frac_bits();
        self.reveal_raw()
            .into_iter()
            .map(|r| super::decode_fixed(r, f))
            .collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            shares: self
                .shares
                .iter()
                .zip(&other.shares)
                .map(|(a, b)| add_shares_local(a, b))
                .collect::<Result<_>>()?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    pub fn scale(&self, c: i64) -> Self {
        Self {
            shares: self
                .shares
                .iter()
                .map(|s| scale_shares_local(s, c))
                .collect(),
        }
    }

    /// Elementwise multiplication by public integers.
    pub fn mul_public(&self, c: &[u64]) -> Self {
        let mut out = self.clone();
        for s in &mut out.shares {
            for (e, k) in s.elems.iter_mut().zip(c) {
                *e = e.wrapping_mul(*k);
            }
        }
        out
    }

    /// Adds public raw values (applied by server 0 only).
    pub fn add_public(&self, c: &[u64]) -> Self {
        let mut out = self.clone();
        for (e, k) in out.shares[0].elems.iter_mut().zip(c) {
            *e = e.wrapping_add(*k);
        }
        out
    }

    pub fn add_public_scalar(&self, c: u64) -> Self {
        self.add_public(&vec![c; self.len()])
    }

    /// Reinterprets the scale without touching the ring values. Used after
    /// multiplying by a public power of two.
    pub fn with_frac_bits(mut self, frac_bits: u32) -> Self {
        for s in &mut self.shares {
            s.frac_bits = frac_bits;
        }
        self
    }

    /// Gathers elements by index.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            shares: self
                .shares
                .iter()
                .map(|s| ArithShareVec {
                    server_id: s.server_id,
                    elems: idx.iter().map(|&i| s.elems[i]).collect(),
                    frac_bits: s.frac_bits,
                })
                .collect(),
        }
    }

    /// Sums consecutive chunks of `chunk` elements.
    pub fn chunk_sums(&self, chunk: usize) -> Self {
        Self {
            shares: self
                .shares
                .iter()
                .map(|s| ArithShareVec {
                    server_id: s.server_id,
                    elems: s
                        .elems
                        .chunks(chunk)
                        .map(|c| c.iter().fold(0u64, |a, b| a.wrapping_add(*b)))
                        .collect(),
                    frac_bits: s.frac_bits,
                })
                .collect(),
        }
    }

    pub fn concat(parts: &[ArithShared]) -> Result<Self> {
        let servers = parts[0].servers();
        let f = parts[0].frac_bits();
        if let Some(p) = parts.iter().find(|p| p.frac_bits() != f) {
            return Err(Error::ScaleMismatch {
                left: f,
                right: p.frac_bits(),
            });
        }
        Ok(Self::from_vecs(
            (0..servers)
                .map(|s| {
                    parts
                        .iter()
                        .flat_map(|p| p.shares[s].elems.iter().copied())
                        .collect()
                })
                .collect(),
            f,
        ))
    }
}
