use rand::seq::index::sample;
use rand::Rng;

use super::run::clustering_rates;
use crate::attacks::AttackKind;
use crate::bits::BitVector;
use crate::clustering::{
    cosine_from_xor, dbscan_labels, default_m_pts, euclid_rows, indicator_matrix, ClusterAssignment, IndMatrix,
    DEFAULT_ALPHA,
};
use crate::error::{Error, Result};
use crate::mpc::{share_binary, Mpc, Traffic};
use crate::seed::{self, tag};
use crate::updates::SignVector;

/// Sign vectors for one clustering round without training: honest clients
/// copy a shared direction with each bit flipped at rate `flip`; GA clients
/// are uniform; other attacks copy the opposite direction at the same rate.
pub fn synthetic_signs(
    malicious: &[bool],
    np: usize,
    flip: f64,
    attack: AttackKind,
    seed_value: u64,
) -> Result<Vec<SignVector>> {
    if !(0.0..=0.5).contains(&flip) {
        return Err(Error::InvalidParameter {
            name: "flip",
            reason: format!("{flip} is outside [0, 0.5]"),
        });
    }
    if attack == AttackKind::Ea {
        return Err(Error::UnsupportedAttack("EA".into()));
    }
    let mut rng = seed::rng(seed_value, &[tag::ADVERSARY]);
    let base = BitVector::random(np, &mut rng);
    let noisy = |center: &BitVector, rng: &mut rand_chacha::ChaCha8Rng| {
        BitVector::from_bools(center.iter().map(|b| b ^ rng.random_bool(flip)))
    };
    Ok(malicious
        .iter()
        .map(|&bad| {
            let bits = match (bad, attack) {
                (false, _) | (true, AttackKind::None) => noisy(&base, &mut rng),
                (true, AttackKind::Ga) => BitVector::random(np, &mut rng),
                (true, _) => noisy(&base.not(), &mut rng),
            };
            SignVector::from_bits(bits)
        })
        .collect())
}

/// Result of [`cluster_demo`].
#[derive(Debug, Clone)]
pub struct ClusterDemo {
    pub malicious: Vec<bool>,
    pub ind: IndMatrix,
    pub labels: ClusterAssignment,
    pub tpr: f64,
    pub tnr: f64,
    pub traffic: Traffic,
}

/// One secure clustering round over [`synthetic_signs`] with
/// `round(xi·n)` malicious clients.
pub fn cluster_demo(
    n: usize,
    servers: usize,
    np: usize,
    xi: f64,
    attack: AttackKind,
    seed_value: u64,
) -> Result<ClusterDemo> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::InvalidParameter {
            name: "xi",
            reason: format!("{xi} is outside [0, 1]"),
        });
    }
    let mut malicious = vec![false; n];
    let mut rng = seed::rng(seed_value, &[tag::ROLES]);
    for i in sample(&mut rng, n, (xi * n as f64).round() as usize) {
        malicious[i] = true;
    }
    let signs = synthetic_signs(&malicious, np, 0.1, attack, seed_value)?;
    let mut share_rng = seed::rng(seed_value, &[tag::SHARE]);
    let shares = signs
        .iter()
        .map(|s| share_binary(s, servers, &mut share_rng))
        .collect::<Result<Vec<_>>>()?;
    let mut mpc = Mpc::new(servers, seed::derive(seed_value, &[tag::DEALER]))?;
    let cos = cosine_from_xor(&shares, &mut mpc)?;
    let euc = euclid_rows(&cos, &mut mpc)?;
    let ind = indicator_matrix(&euc, DEFAULT_ALPHA, &mut mpc)?;
    let labels = dbscan_labels(&ind, default_m_pts(n));
    let (tpr, tnr) = clustering_rates(&labels, &malicious);
    Ok(ClusterDemo {
        malicious,
        ind,
        labels,
        tpr,
        tnr,
        traffic: mpc.traffic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signs_have_the_intended_correlation() {
        let truth = [false, false, true];
        let s = synthetic_signs(&truth, 4096, 0.1, AttackKind::Lfa, 1).unwrap();
        let frac = |a: &SignVector, b: &SignVector| a.bits().hamming(b.bits()) as f64 / 4096.0;
        // two honest copies differ in about 2·0.1·0.9 of the bits
        assert!((frac(&s[0], &s[1]) - 0.18).abs() < 0.03);
        assert!(frac(&s[0], &s[2]) > 0.75);
    }

    #[test]
    fn demo_separates_ga() {
        let d = cluster_demo(12, 3, 256, 0.5, AttackKind::Ga, 2).unwrap();
        assert_eq!(d.tnr, 1.0);
        assert_eq!(d.tpr, 1.0);
        assert!(d.traffic.bytes > 0);
    }
}
