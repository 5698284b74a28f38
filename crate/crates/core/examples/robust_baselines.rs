//! Plaintext robust aggregators on a toy round with one outlier.
//!
//! cargo run --example robust_baselines

use fedseg::aggregation::{fedavg, krum, krum_index, median, trim_mean};
use fedseg::updates::GradientVector;

fn main() -> fedseg::Result<()> {
    let updates = [
        vec![1.0, 0.9],
        vec![1.1, 1.0],
        vec![0.9, 1.2],
        vec![1.0, 1.1],
        vec![1.2, 0.8],
        vec![-50.0, 40.0],
    ]
    .into_iter()
    .map(GradientVector::new)
    .collect::<fedseg::Result<Vec<_>>>()?;

    println!("fedavg    {:?}", fedavg(&updates, &[1.0; 6])?.values());
    println!("median    {:?}", median(&updates)?.values());
    println!("trim_mean {:?}", trim_mean(&updates, 1)?.values());
    println!("krum      {:?} (client {})", krum(&updates, 1)?.values(), krum_index(&updates, 1)?);
    Ok(())
}
