pub mod aggregation;
pub mod attacks;
pub mod bits;
pub mod clustering;
pub mod dp;
pub mod error;
pub mod harness;
pub mod hhf;
pub mod mpc;
pub mod seed;
pub mod training;
pub mod updates;

pub use error::{Error, Result};
