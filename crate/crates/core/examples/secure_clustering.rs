//! Cosine, row distance, indicator matrix and DBSCAN computed over shares,
//! next to the plaintext reference.
//!
//! cargo run --example secure_clustering

use fedseg::attacks::AttackKind;
use fedseg::clustering::{
    cosine_from_xor, dbscan_labels, default_m_pts, euclid_rows, indicator_matrix, plaintext_clustering_oracle,
    DEFAULT_ALPHA,
};
use fedseg::harness::synthetic_signs;
use fedseg::mpc::{share_binary, Mpc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fedseg::Result<()> {
    // 6 honest clients around one direction, 4 Gaussian attackers
    let malicious = [false, true, false, false, true, false, true, false, false, true];
    let n = malicious.len();
    let signs = synthetic_signs(&malicious, 512, 0.1, AttackKind::Ga, 5)?;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let shares = signs
        .iter()
        .map(|s| share_binary(s, 3, &mut rng))
        .collect::<fedseg::Result<Vec<_>>>()?;
    let mut mpc = Mpc::new(3, 7)?;
    let cos = cosine_from_xor(&shares, &mut mpc)?;
    let euc = euclid_rows(&cos, &mut mpc)?;
    let ind = indicator_matrix(&euc, DEFAULT_ALPHA, &mut mpc)?;
    let labels = dbscan_labels(&ind, default_m_pts(n));

    let oracle = plaintext_clustering_oracle(&signs, DEFAULT_ALPHA, default_m_pts(n))?;
    let shown = euc.reveal();
    println!("row distances from client 0 (secure / plaintext Taylor):");
    for j in 0..n {
        println!("  {j}: {:.4} / {:.4}", shown.get(0, j), oracle.euc_taylor.get(0, j));
    }
    println!("IndM:\n{ind:?}");
    println!("labels {:?}", labels.labels);
    println!("same as plaintext: {}", labels == oracle.labels);
    println!("server traffic {} bytes", mpc.traffic.bytes);
    Ok(())
}
