//! Per-cluster aggregation over shares: each cluster only ever sees the sum
//! of its own members' signs, and noise clients get nothing.
//!
//! cargo run --example model_segmentation

use fedseg::aggregation::model_segmentation;
use fedseg::bits::BitVector;
use fedseg::clustering::ClusterAssignment;
use fedseg::mpc::{share_binary, Mpc};
use fedseg::updates::SignVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fedseg::Result<()> {
    let rows = [
        [1, 1, 0, 1],
        [1, 0, 0, 1],
        [1, 1, 1, 1],
        [0, 0, 1, 0],
        [0, 1, 1, 0],
        [1, 0, 1, 0],
    ];
    let labels = ClusterAssignment {
        labels: vec![Some(0), Some(0), Some(0), Some(1), Some(1), None],
        clusters: 2,
        m_pts: 2,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let shares = rows
        .iter()
        .map(|r| share_binary(&SignVector::from_bits(BitVector::from_bools(r.iter().map(|b| *b == 1))), 3, &mut rng))
        .collect::<fedseg::Result<Vec<_>>>()?;
    let mut mpc = Mpc::new(3, 9)?;
    let seg = model_segmentation(&shares, &labels, &mut mpc)?;
    for (z, agg) in seg.reveal().iter().enumerate() {
        println!("cluster {z} members {:?} aggregate {agg:?}", seg.routing[z]);
    }
    println!("client 5 receives: {:?}", seg.cluster_of(5));
    Ok(())
}
