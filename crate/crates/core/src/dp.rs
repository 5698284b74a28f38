//! Gaussian-mechanism noise and Kolmogorov-Smirnov denoising.
//!
//! Clients perturb their gradient with `N(0, Δ²σ²)` and then rescale the
//! noised vector by its KS distance to that noise distribution. The rescale
//! is a positive scalar, so the sign encoding downstream never changes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as NormalDist};

use crate::error::{invalid, Result};
use crate::updates::GradientVector;

/// `σ = sqrt(2·ln(1.25/δ))` for `0 < δ < 1`.
pub fn derive_sigma(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("{delta} is outside (0, 1)")));
    }
    Ok((2.0 * (1.25 / delta).ln()).sqrt())
}

/// Privacy parameters. `sigma` is always derived from `delta`.
///
/// A sensitivity of zero disables the mechanism (the noise std is zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpParams {
    pub epsilon: f64,
    pub delta: f64,
    pub sensitivity: f64,
    sigma: f64,
}

impl DpParams {
    pub fn new(epsilon: f64, delta: f64, sensitivity: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid("epsilon", format!("{epsilon} is not > 0")));
        }
        if !(sensitivity >= 0.0 && sensitivity.is_finite()) {
            return Err(invalid("sensitivity", format!("{sensitivity} is negative")));
        }
        Ok(Self {
            epsilon,
            delta,
            sensitivity,
            sigma: derive_sigma(delta)?,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Standard deviation of the injected noise, `Δ·σ`.
    pub fn noise_std(&self) -> f64 {
        self.sensitivity * self.sigma
    }
}

/// `g + N(0, Δ²σ²)` per coordinate, reproducible from `rng_seed`.
pub fn inject_noise(g: &GradientVector, p: &DpParams, rng_seed: u64) -> GradientVector {
    let std = p.noise_std();
    if std == 0.0 {
        return g.clone();
    }
    let normal = Normal::new(0.0, std).expect("noise std is finite and positive");
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let values = g
        .values()
        .iter()
        .map(|v| v + normal.sample(&mut rng))
        .collect();
    GradientVector::new(values).expect("finite input plus finite noise")
}

/// Sup-distance between the empirical CDF of `sample` and the CDF of
/// `N(0, std²)`; a zero std compares against the point mass at 0.
pub fn ks_distance(sample: &[f64], std: f64) -> f64 {
    if sample.is_empty() {
        return 0.0;
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let cdf: Box<dyn Fn(f64) -> f64> = if std > 0.0 {
        let n = NormalDist::new(0.0, std).expect("std is positive");
        Box::new(move |x| n.cdf(x))
    } else {
        Box::new(|x| if x >= 0.0 { 1.0 } else { 0.0 })
    };
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d.clamp(0.0, 1.0)
}

/// `KS(g̃, N)·g̃`.
pub fn ks_denoise(noised: &GradientVector, p: &DpParams) -> GradientVector {
    let k = ks_distance(noised.values(), p.noise_std());
    noised.scaled(k).expect("scaling by k in [0, 1] stays finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::updates::encode_sign;
    use rand::Rng;

    #[test]
    fn sigma_examples() {
        assert!((derive_sigma(1e-5).unwrap() - 4.8445).abs() < 1e-3);
        assert!((derive_sigma(0.5).unwrap() - (2.0 * 2.5f64.ln()).sqrt()).abs() < 1e-12);
        assert!((derive_sigma(0.5).unwrap() - 1.3537).abs() < 1e-4);
        assert!(derive_sigma(1.25).is_err());
        assert!(derive_sigma(0.0).is_err());
        assert!(derive_sigma(1.0).is_err());
    }

    #[test]
    fn zero_sensitivity_is_identity() {
        let p = DpParams::new(5.0, 1e-5, 0.0).unwrap();
        let g = GradientVector::new(vec![0.5, -1.0, 2.0]).unwrap();
        assert_eq!(inject_noise(&g, &p, 9), g);
    }

    #[test]
    fn noise_std_within_two_percent() {
        let p = DpParams::new(5.0, 1e-5, 0.1).unwrap();
        let g = GradientVector::zeros(100_000);
        let out = inject_noise(&g, &p, 123);
        let n = out.dim() as f64;
        let mean = out.values().iter().sum::<f64>() / n;
        let var = out.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var.sqrt() / p.noise_std() - 1.0).abs() < 0.02);
    }

    #[test]
    fn noise_is_seeded() {
        let p = DpParams::new(5.0, 1e-5, 0.3).unwrap();
        let g = GradientVector::new(vec![1.0; 50]).unwrap();
        assert_eq!(inject_noise(&g, &p, 4), inject_noise(&g, &p, 4));
        assert_ne!(inject_noise(&g, &p, 4), inject_noise(&g, &p, 5));
    }

    #[test]
    fn ks_of_matched_sample_is_small() {
        let p = DpParams::new(5.0, 1e-5, 0.2).unwrap();
        let noised = inject_noise(&GradientVector::zeros(50_000), &p, 77);
        let k = ks_distance(noised.values(), p.noise_std());
        // Kolmogorov 99.9% quantile ≈ 1.95/sqrt(n)
        assert!(k < 1.95 / (50_000f64).sqrt(), "k = {k}");
        let out = ks_denoise(&noised, &p);
        let max = out.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max < 0.05);
    }

    #[test]
    fn ks_of_far_constant_is_near_one() {
        let p = DpParams::new(5.0, 1e-5, 0.01).unwrap();
        let g = GradientVector::new(vec![10.0; 100]).unwrap();
        let k = ks_distance(g.values(), p.noise_std());
        assert!(k > 0.999);
        let out = ks_denoise(&g, &p);
        assert!((out.values()[0] - 10.0).abs() < 0.01);
    }

    #[test]
    fn denoising_preserves_sign_encoding() {
        let p = DpParams::new(5.0, 1e-5, 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10_000 {
            let dim = rng.random_range(1..30);
            let g = GradientVector::new((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                .unwrap();
            let k = ks_distance(g.values(), p.noise_std());
            assert!((0.0..=1.0).contains(&k));
            if k > 0.0 {
                assert_eq!(encode_sign(&ks_denoise(&g, &p)).unwrap(), encode_sign(&g).unwrap());
            }
        }
    }

    #[test]
    fn sign_flip_probability_matches_normal_cdf() {
        let p = DpParams::new(5.0, 1e-5, 0.1).unwrap();
        let std = p.noise_std();
        let normal = NormalDist::new(0.0, 1.0).unwrap();
        for &g in &[0.05, 0.2, 0.5] {
            let trials = 20_000;
            let v = GradientVector::new(vec![g; trials]).unwrap();
            let out = inject_noise(&v, &p, (g * 1000.0) as u64);
            let flips = out.values().iter().filter(|x| **x < 0.0).count() as f64;
            let expected = normal.cdf(-g / std);
            let se = (expected * (1.0 - expected) / trials as f64).sqrt();
            let observed = flips / trials as f64;
            assert!((observed - expected).abs() < 3.0 * se + 1e-9, "g={g} obs={observed} exp={expected}");
        }
    }
}
