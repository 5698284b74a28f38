//! Sign compression and the majority step.
//!
//! cargo run --example sign_encoding

use fedseg::updates::{apply_majority_step, decode_sign, encode_sign, GradientVector, ModelParams};

fn main() -> fedseg::Result<()> {
    let g = GradientVector::new(vec![0.3, -1.2, 0.0, 4.5, -0.01])?;
    let s = encode_sign(&g)?;
    println!("gradient {:?}", g.values());
    println!("bits     {:?}", s.bits().iter().map(u8::from).collect::<Vec<_>>());
    println!("decoded  {:?}", decode_sign(&s).values());

    // three clients vote; the model moves by η against the majority sign
    let votes = [vec![1, 1, -1, 1, -1], vec![1, -1, -1, 1, 1], vec![-1, 1, -1, 1, -1]];
    let sum: Vec<f64> = (0..5).map(|k| votes.iter().map(|v| v[k] as f64).sum()).collect();
    let model = ModelParams::zeros(5, 0.1)?;
    let next = apply_majority_step(&model, &GradientVector::new(sum.clone())?)?;
    println!("vote sum {sum:?}");
    println!("weights  {:?}", next.weights);
    Ok(())
}
