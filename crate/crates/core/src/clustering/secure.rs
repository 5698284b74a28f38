use super::{IndMatrix, SquareMatrix};
use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::mpc::{secure_leq, ArithShared, BoolShared, ComparisonResult, Mpc, FRAC_BITS};

/// Largest client count the secure distance polynomial supports: with rows
/// of length `n` the squared distance can reach `4n`, and its cube (at
/// scale `2^{2f}`) must stay below `2^61`.
pub const MAX_CLIENTS: usize = 32;

/// Largest sign-vector length. The public constant `4/np²` is rounded to an
/// integer at scale `2^{f+shift}`; past this length its rounding error in
/// the squared distance exceeds one ulp.
pub const MAX_DIM: usize = 1 << 14;

/// Extra precision bits for the public constant `2/np`.
const COS_SHIFT: u32 = 30;
/// Fractional bits kept below `2^-f` for the squared distance.
const LOW_BITS: u32 = 16;

/// `⌈log2(4n)⌉`: the squared row distance is below `2^bits`.
fn distance_bits(n: usize) -> u32 {
    (4 * n).next_power_of_two().trailing_zeros()
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Shared cosine matrix. Alongside the fixed-point cosines the servers keep
/// the integer Hamming distances they were derived from, which the distance
/// step reuses exactly.
#[derive(Debug, Clone)]
pub struct SharedCosMatrix {
    pub n: usize,
    pub np: usize,
    /// `n × n` integers (scale `2^0`), zero on the diagonal.
    pub hamming: ArithShared,
    /// `n × n` at [`FRAC_BITS`].
    pub cos: ArithShared,
}

impl SharedCosMatrix {
    pub fn reveal(&self) -> SquareMatrix {
        let v = self.cos.reveal();
        SquareMatrix::from_fn(self.n, |i, j| v[i * self.n + j])
    }
}

/// Shared distance matrix at [`FRAC_BITS`]; only the strict upper triangle
/// is computed, in [`SharedEucMatrix::pairs`] order.
#[derive(Debug, Clone)]
pub struct SharedEucMatrix {
    pub n: usize,
    pub upper: ArithShared,
}

impl SharedEucMatrix {
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        pairs(self.n)
    }

    /// The diagonal carries the polynomial at zero, which is never
    /// compared.
    pub fn reveal(&self) -> SquareMatrix {
        let v = self.upper.reveal();
        let mut full = vec![super::taylor_sqrt(0.0); self.n * self.n];
        for (k, (i, j)) in self.pairs().into_iter().enumerate() {
            full[i * self.n + j] = v[k];
            full[j * self.n + i] = v[k];
        }
        SquareMatrix::from_fn(self.n, |i, j| full[i * self.n + j])
    }
}

/// `CosM_ij = 1 - 2·H_ij/np` from boolean shares of the clients' sign bits.
///
/// `H_ij` is the popcount of `ḡ_i ⊕ ḡ_j`. The XOR is local; the bits are
/// lifted to the ring with daBits and summed per pair.
pub fn cosine_from_xor(clients: &[BoolShared], mpc: &mut Mpc) -> Result<SharedCosMatrix> {
    let n = clients.len();
    if n == 0 {
        return Err(Error::Empty("client shares"));
    }
    if n > MAX_CLIENTS {
        return Err(Error::RangeOverflow(format!("{n} clients exceed the limit of {MAX_CLIENTS}")));
    }
    let np = clients[0].len();
    if let Some(c) = clients.iter().find(|c| c.len() != np) {
        return Err(Error::DimensionMismatch {
            expected: np,
            actual: c.len(),
        });
    }
    if np == 0 || np > MAX_DIM {
        return Err(Error::RangeOverflow(format!("sign-vector length {np}")));
    }
    let servers = mpc.servers();
    let pair_list = pairs(n);
    let hamming_pairs = if pair_list.is_empty() {
        ArithShared::public(&[], 0, servers)
    } else {
        let xors = pair_list
            .iter()
            .map(|&(i, j)| clients[i].xor(&clients[j]))
            .collect::<Result<Vec<_>>>()?;
        let lifted = mpc.b2a(&BoolShared::concat(&xors), 0)?;
        lifted.chunk_sums(np)
    };

    // 1 − cos = 2H/np, computed once per unordered pair so that the
    // truncation cannot break symmetry
    let f = FRAC_BITS;
    let gap = if (1usize << (f + 1)) % np == 0 {
        let step = ((1u64 << (f + 1)) / np as u64) as i64;
        hamming_pairs.scale(step).with_frac_bits(f)
    } else {
        let k = ((1u128 << (f + 1 + COS_SHIFT)) as f64 / np as f64).round() as i64;
        let scaled = hamming_pairs.scale(k).with_frac_bits(f + COS_SHIFT);
        mpc.truncate(&scaled, COS_SHIFT)?
    };

    // scatter the pair values into a symmetric n × n layout
    let mut idx = vec![usize::MAX; n * n];
    for (k, &(i, j)) in pair_list.iter().enumerate() {
        idx[i * n + j] = k;
        idx[j * n + i] = k;
    }
    let scatter = |x: &ArithShared| {
        let parts = (0..servers)
            .map(|s| {
                let e = &x.share(s).elems;
                idx.iter().map(|&k| if k == usize::MAX { 0 } else { e[k] }).collect()
            })
            .collect();
        ArithShared::from_vecs(parts, x.frac_bits())
    };
    let hamming = scatter(&hamming_pairs);
    let cos = scatter(&gap).neg().add_public_scalar(1u64 << f);
    Ok(SharedCosMatrix { n, np, hamming, cos })
}

/// Taylor-approximated distances between rows of the cosine matrix.
///
/// Row differences are taken on the Hamming counts, where they are exact:
/// `CosM_ik - CosM_jk = 2(H_jk - H_ik)/np`. The squared norm is then
/// `4/np² · Σ_k D_k²` and the polynomial is evaluated in Horner form
/// `1 + u·(u(u-2) + 8)/16` with `u = x - 1`.
pub fn euclid_rows(cos: &SharedCosMatrix, mpc: &mut Mpc) -> Result<SharedEucMatrix> {
    let n = cos.n;
    let f = FRAC_BITS;
    let pair_list = pairs(n);
    let servers = mpc.servers();
    if pair_list.is_empty() {
        return Ok(SharedEucMatrix {
            n,
            upper: ArithShared::public(&[], f, servers),
        });
    }
    let mut minuend = Vec::with_capacity(pair_list.len() * n);
    let mut subtrahend = Vec::with_capacity(pair_list.len() * n);
    for &(i, j) in &pair_list {
        for k in 0..n {
            minuend.push(j * n + k);
            subtrahend.push(i * n + k);
        }
    }
    let d = cos.hamming.select(&minuend).sub(&cos.hamming.select(&subtrahend))?;
    let sq = mpc.mul_raw(&d, &d)?.chunk_sums(n);

    // x = 4·sq/np² is produced at frac f + shift, as wide as the ring allows
    let a = distance_bits(n);
    let shift = 40 - a;
    let np = cos.np as f64;
    let k2 = ((1u128 << (f + shift)) as f64 * 4.0 / (np * np)).round() as i64;
    let x_wide = sq.scale(k2).with_frac_bits(f + shift);
    let x = mpc.truncate(&x_wide, shift)?;
    // the part of x below 2^-f; P(x + δ) ≈ P(x) + P'(x)·δ, and P'(x) grows
    // like 3x²/16, so dropping δ would cost up to a few hundred ulp
    let x_fine = mpc.truncate(&x_wide, shift - LOW_BITS)?;
    let delta = x_fine.sub(&x.scale(1 << LOW_BITS).with_frac_bits(f + LOW_BITS))?;

    // u²−2u is carried with h extra bits, as many as keep u·(u²−2u+8) < 2^61
    let h = (61 - 3 * a as i32 - 2 * f as i32).clamp(0, f as i32) as u32;
    let one = 1u64 << f;
    let one_h = 1u64 << (f + h);
    let u = x.add_public_scalar(one.wrapping_neg());
    let w1 = u.add_public_scalar((2 * one).wrapping_neg());
    let w2 = mpc.mul_raw(&u, &w1)?;
    let w2 = mpc.truncate(&w2, f - h)?;
    let w3 = w2.add_public_scalar(8 * one_h);
    // 16·P'(x) = 3(u²−2u) + 2u + 8
    let slope = w2
        .scale(3)
        .add(&u.scale(2 << h).with_frac_bits(f + h))?
        .add_public_scalar(8 * one_h);
    let cube = mpc.mul_raw(&u, &w3)?;
    let corr = mpc.mul_raw(&slope, &delta)?;
    let corr = mpc.truncate(&corr, LOW_BITS)?;
    // (u·w3 + 16·P'·δ) sits at scale 2^{2f+h}; shifting by f + h + 4
    // divides by 16 and lands back on scale 2^f
    let t = mpc.truncate(&cube.add(&corr)?, f + h + 4)?.with_frac_bits(f);
    Ok(SharedEucMatrix {
        n,
        upper: t.add_public_scalar(one),
    })
}

/// Shared comparison bits `[EucM_ij ≤ α]` for every unordered pair.
pub fn compare_pairs(euc: &SharedEucMatrix, alpha: f64, mpc: &mut Mpc) -> Result<ComparisonResult> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("{alpha} is outside (0, 2]"),
        });
    }
    secure_leq(&euc.upper, alpha, mpc)
}

/// Assembles an indicator matrix from opened pair bits.
pub fn indicator_from_bits(n: usize, bits: &BitVector) -> Result<IndMatrix> {
    let expected = n * n.saturating_sub(1) / 2;
    if bits.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: bits.len(),
        });
    }
    let mut idx = vec![0; n * n];
    for (k, (i, j)) in pairs(n).into_iter().enumerate() {
        idx[i * n + j] = k;
    }
    Ok(IndMatrix::from_upper(n, |i, j| bits.get(idx[i * n + j])))
}

/// Compares every pair against α, checks the output bits, and opens the
/// indicator matrix. A failed bit check aborts with
/// [`Error::BitCheckFailed`].
pub fn indicator_matrix(euc: &SharedEucMatrix, alpha: f64, mpc: &mut Mpc) -> Result<IndMatrix> {
    let mut r = compare_pairs(euc, alpha, mpc)?;
    let bits = r.check_and_open(mpc)?.clone();
    indicator_from_bits(euc.n, &bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{dbscan_labels, plaintext_clustering_oracle, taylor_sqrt};
    use crate::mpc::{decode_fixed, encode_fixed, share_arith, share_binary};
    use crate::updates::SignVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn share_all(signs: &[SignVector], servers: usize, rng: &mut ChaCha8Rng) -> Vec<BoolShared> {
        signs.iter().map(|s| share_binary(s, servers, rng).unwrap()).collect()
    }

    fn random_signs(n: usize, np: usize, rng: &mut ChaCha8Rng) -> Vec<SignVector> {
        (0..n).map(|_| SignVector::from_bits(BitVector::random(np, rng))).collect()
    }

    #[test]
    fn cosine_examples_over_shares() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut mpc = Mpc::new(3, 2).unwrap();
        let mk = |b: &[bool]| SignVector::from_bits(BitVector::from_bools(b.iter().copied()));
        let signs = [mk(&[true; 4]), mk(&[true, true, false, false]), mk(&[false; 4])];
        let cos = cosine_from_xor(&share_all(&signs, 3, &mut rng), &mut mpc).unwrap().reveal();
        assert_eq!(cos.get(0, 0), 1.0);
        assert_eq!(cos.get(0, 1), 0.0);
        assert_eq!(cos.get(1, 0), 0.0);
        assert_eq!(cos.get(0, 2), -1.0);
    }

    #[test]
    fn cosine_matches_oracle_for_odd_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut mpc = Mpc::new(3, 4).unwrap();
        for np in [3, 17, 170, 511] {
            let signs = random_signs(6, np, &mut rng);
            let oracle = plaintext_clustering_oracle(&signs, 1.2, 2).unwrap();
            let cos = cosine_from_xor(&share_all(&signs, 3, &mut rng), &mut mpc).unwrap().reveal();
            for (a, b) in cos.values().iter().zip(oracle.cos.values()) {
                assert!((a - b).abs() <= 2.0 / (1u64 << FRAC_BITS) as f64, "np={np}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn polynomial_over_shares() {
        // x = 0, 1, 2 and a spread of values, fed straight into the Horner step
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut mpc = Mpc::new(3, 6).unwrap();
        let xs: Vec<f64> = [0.0, 1.0, 2.0]
            .into_iter()
            .chain((0..200).map(|_| rng.random_range(0.0..40.0)))
            .collect();
        let raw: Vec<u64> = xs.iter().map(|v| encode_fixed(*v, FRAC_BITS)).collect();
        let x = share_arith(&raw, FRAC_BITS, 3, &mut rng).unwrap();
        let one = 1u64 << FRAC_BITS;
        let u = x.add_public_scalar(one.wrapping_neg());
        let w2 = mpc.mul(&u, &u.add_public_scalar((2 * one).wrapping_neg())).unwrap();
        let t = mpc.mul_raw(&u, &w2.add_public_scalar(8 * one)).unwrap();
        let p = mpc.truncate(&t, FRAC_BITS + 4).unwrap().with_frac_bits(FRAC_BITS).add_public_scalar(one);
        let got = p.reveal();
        assert_eq!(&got[..3], &[0.3125, 1.0, 1.4375]);
        for (g, x) in got.iter().zip(&xs) {
            let exact = taylor_sqrt(decode_fixed(encode_fixed(*x, FRAC_BITS), FRAC_BITS));
            assert!((g - exact).abs() < 8.0 * 3.0 / (1u64 << FRAC_BITS) as f64 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn secure_pipeline_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let servers = 3;
        let mut mpc = Mpc::new(servers, 8).unwrap();
        let ulp = 1.0 / (1u64 << FRAC_BITS) as f64;
        let tau = 4.0 * servers as f64 * ulp;
        for trial in 0..10 {
            let n = rng.random_range(2..10);
            let np = rng.random_range(8..300);
            // correlated clients so that some pairs fall under α
            let base = BitVector::random(np, &mut rng);
            let signs: Vec<SignVector> = (0..n)
                .map(|i| {
                    let flip = if i % 2 == 0 { 0.1 } else { 0.5 };
                    SignVector::from_bits(BitVector::from_bools(base.iter().map(|b| b ^ rng.random_bool(flip))))
                })
                .collect();
            let oracle = plaintext_clustering_oracle(&signs, 1.2, 2).unwrap();
            let cos = cosine_from_xor(&share_all(&signs, servers, &mut rng), &mut mpc).unwrap();
            let euc = euclid_rows(&cos, &mut mpc).unwrap();
            let got = euc.reveal();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let want = oracle.euc_taylor.get(i, j);
                        assert!((got.get(i, j) - want).abs() <= tau, "trial {trial}");
                    }
                }
            }
            let ind = indicator_matrix(&euc, 1.2, &mut mpc).unwrap();
            assert!(ind.is_symmetric() && ind.is_reflexive());
            let banded = (0..n).any(|i| (0..n).any(|j| i != j && (oracle.euc_taylor.get(i, j) - 1.2).abs() <= tau));
            for i in 0..n {
                for j in 0..n {
                    if (oracle.euc_taylor.get(i, j) - 1.2).abs() > tau {
                        assert_eq!(ind.get(i, j), oracle.ind.get(i, j));
                    }
                }
            }
            if !banded {
                assert_eq!(dbscan_labels(&ind, 2), oracle.labels);
            }
        }
    }

    #[test]
    fn opposite_groups_at_full_range() {
        // two groups with opposite signs put every cross-group row distance
        // at the 4n ceiling, where P' is largest
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let mut mpc = Mpc::new(3, 16).unwrap();
        let tau = 12.0 / (1u64 << FRAC_BITS) as f64;
        for (n, np) in [(16, 509), (MAX_CLIENTS, 1000)] {
            let base = BitVector::random(np, &mut rng);
            let signs: Vec<SignVector> = (0..n)
                .map(|i| SignVector::from_bits(if i % 2 == 0 { base.clone() } else { base.not() }))
                .collect();
            let oracle = plaintext_clustering_oracle(&signs, 1.2, 2).unwrap();
            let euc = euclid_rows(&cosine_from_xor(&share_all(&signs, 3, &mut rng), &mut mpc).unwrap(), &mut mpc)
                .unwrap()
                .reveal();
            let x = 4.0 * n as f64;
            assert_eq!(oracle.euc_taylor.get(0, 1), taylor_sqrt(x));
            for i in 0..n {
                for j in (0..n).filter(|&j| j != i) {
                    assert!((euc.get(i, j) - oracle.euc_taylor.get(i, j)).abs() <= tau, "n={n} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn long_vectors_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut mpc = Mpc::new(3, 18).unwrap();
        let shares = share_all(&random_signs(2, MAX_DIM + 1, &mut rng), 3, &mut rng);
        assert!(cosine_from_xor(&shares, &mut mpc).is_err());
    }

    #[test]
    fn single_client_is_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut mpc = Mpc::new(3, 10).unwrap();
        let signs = random_signs(1, 16, &mut rng);
        let cos = cosine_from_xor(&share_all(&signs, 3, &mut rng), &mut mpc).unwrap();
        let euc = euclid_rows(&cos, &mut mpc).unwrap();
        let ind = indicator_matrix(&euc, 1.2, &mut mpc).unwrap();
        assert_eq!(ind, IndMatrix::from_upper(1, |_, _| true));
    }

    #[test]
    fn identical_clients_are_all_adjacent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut mpc = Mpc::new(3, 12).unwrap();
        let s = SignVector::from_bits(BitVector::random(64, &mut rng));
        let signs = vec![s; 5];
        let cos = cosine_from_xor(&share_all(&signs, 3, &mut rng), &mut mpc).unwrap();
        let euc = euclid_rows(&cos, &mut mpc).unwrap();
        let ind = indicator_matrix(&euc, 1.2, &mut mpc).unwrap();
        assert_eq!(ind, IndMatrix::from_upper(5, |_, _| true));
    }

    #[test]
    fn input_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut mpc = Mpc::new(3, 14).unwrap();
        let mut shares = share_all(&random_signs(3, 16, &mut rng), 3, &mut rng);
        shares.push(share_all(&random_signs(1, 15, &mut rng), 3, &mut rng).remove(0));
        assert!(matches!(cosine_from_xor(&shares, &mut mpc), Err(Error::DimensionMismatch { .. })));
        let many = share_all(&random_signs(MAX_CLIENTS + 1, 4, &mut rng), 3, &mut rng);
        assert!(matches!(cosine_from_xor(&many, &mut mpc), Err(Error::RangeOverflow(_))));
        let ok = share_all(&random_signs(3, 16, &mut rng), 3, &mut rng);
        let euc = euclid_rows(&cosine_from_xor(&ok, &mut mpc).unwrap(), &mut mpc).unwrap();
        assert!(indicator_matrix(&euc, 2.5, &mut mpc).is_err());
    }
}
