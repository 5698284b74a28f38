//! Clients publish digests of their sign vectors; a cluster aggregate is
//! accepted only if its digest equals the product of the members' digests.
//! Also shows the majority vote over the servers' indicator matrices.
//!
//! cargo run --example hhf_verification

use fedseg::clustering::IndMatrix;
use fedseg::hhf::{hhf_hash, indm_majority_vote, verify_aggregate, HhfKey};

fn main() -> fedseg::Result<()> {
    let key = HhfKey::generate(6, 42);
    let members = [vec![1, -1, 1, 1, -1, 1], vec![1, 1, -1, 1, -1, -1], vec![-1, -1, 1, 1, 1, 1]];
    let digests = members.iter().map(|m| hhf_hash(&key, m)).collect::<fedseg::Result<Vec<_>>>()?;
    let aggregate: Vec<i64> = (0..6).map(|k| members.iter().map(|m| m[k]).sum()).collect();
    println!("aggregate {aggregate:?}");
    println!("honest aggregate verifies: {}", verify_aggregate(&key, &digests, &aggregate)?);

    let mut forged = aggregate.clone();
    forged[2] += 1;
    println!("forged aggregate verifies: {}", verify_aggregate(&key, &digests, &forged)?);

    let honest = IndMatrix::from_upper(4, |i, j| (i < 2) == (j < 2));
    let lying = IndMatrix::from_upper(4, |i, j| (i < 2) != (j < 2));
    let voted = indm_majority_vote(&[honest.clone(), lying, honest.clone()])?;
    println!("vote restores the honest matrix: {}", voted == honest);
    Ok(())
}
