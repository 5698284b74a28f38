//! Gaussian mechanism followed by KS denoising. The denoised vector keeps
//! the noised vector's signs, so only the noise changes what is sent.
//!
//! cargo run --example dp_noise

use fedseg::dp::{derive_sigma, inject_noise, ks_denoise, ks_distance, DpParams};
use fedseg::updates::{encode_sign, GradientVector};

fn main() -> fedseg::Result<()> {
    println!("sigma(1e-5) = {:.4}", derive_sigma(1e-5)?);
    let g = GradientVector::new((0..1000).map(|i| ((i as f64) * 0.37).sin() * 0.05).collect())?;
    for sensitivity in [0.0, 0.001, 0.01, 0.1] {
        let p = DpParams::new(5.0, 1e-5, sensitivity)?;
        let noised = inject_noise(&g, &p, 7);
        let denoised = ks_denoise(&noised, &p);
        let flips = encode_sign(&g)?.bits().hamming(encode_sign(&denoised)?.bits());
        println!(
            "Δ = {sensitivity:<5}  noise std {:.4}  KS {:.3}  sign flips vs clean {flips}/1000",
            p.noise_std(),
            ks_distance(noised.values(), p.noise_std())
        );
    }
    Ok(())
}
