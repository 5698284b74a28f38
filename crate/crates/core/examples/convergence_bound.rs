//! Majority-vote error of a mixed cluster against its Cantelli bound.
//!
//! cargo run --example convergence_bound

use fedseg::harness::{cantelli_bound, empirical_vote_error, ConvergenceBoundParams};

fn main() -> fedseg::Result<()> {
    println!("{:>4} {:>4} {:>5} {:>5} {:>9} {:>9}", "h", "m", "p_h", "p_m", "bound", "empirical");
    for (h, m, p_h, p_m) in [(100, 0, 0.6, 0.5), (60, 40, 0.8, 0.3), (12, 8, 0.9, 0.1), (5, 0, 0.9, 0.5)] {
        let p = ConvergenceBoundParams::new(h, m, p_h, p_m);
        let bound = cantelli_bound(&p)?;
        let emp = empirical_vote_error(&p, 100_000, 1)?;
        println!("{h:>4} {m:>4} {p_h:>5} {p_m:>5} {bound:>9.4} {emp:>9.4}");
    }
    // not enough correct votes in expectation
    println!("{:?}", cantelli_bound(&ConvergenceBoundParams::new(5, 5, 0.6, 0.2)).unwrap_err());
    Ok(())
}
