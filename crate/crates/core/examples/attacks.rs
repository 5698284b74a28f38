//! What each client-side attack submits for the same local state.
//!
//! cargo run --example attacks

use fedseg::attacks::{
    adaptive_attack, ga_update, krum_attack, lfa_relabel, poison_batch, trim_attack, AttackKind, AttackSpec,
};
use fedseg::training::{gen_synthetic, local_grad, SoftmaxShape};
use fedseg::updates::{GradientVector, ModelParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn head(g: &GradientVector) -> Vec<String> {
    g.values().iter().take(5).map(|v| format!("{v:+.3}")).collect()
}

fn main() -> fedseg::Result<()> {
    let shape = SoftmaxShape::new(8, 4);
    let ds = gen_synthetic(4, 8, 30, 1.0, 1)?;
    let model = ModelParams::zeros(shape.num_params(), 0.05)?;
    let batch = ds.all();
    let mut rng = ChaCha8Rng::seed_from_u64(2);

    let benign = local_grad(&shape, &model, &batch)?;
    println!("benign  {:?}", head(&benign));
    println!("GA      {:?}", head(&ga_update(&mut rng, shape.num_params())));
    println!("LFA     labels 0..4 -> {:?}", (0..4).map(|c| lfa_relabel(c, 4)).collect::<Result<Vec<_>, _>>()?);
    let lfa = poison_batch(&batch, &AttackSpec::new(AttackKind::Lfa), 4, &mut rng)?;
    println!("LFA     {:?}", head(&local_grad(&shape, &model, &lfa)?));
    let ba = poison_batch(&batch, &AttackSpec::new(AttackKind::Ba), 4, &mut rng)?;
    println!("BA      first poisoned sample {:?} label {}", ba.x[40], ba.y[40]);
    println!("AA      {:?}", head(&adaptive_attack(&shape, &model, &batch, 5, 0.1)?));

    let coalition: Vec<GradientVector> = (0..4)
        .map(|k| {
            let idx: Vec<usize> = (k * 30..k * 30 + 30).collect();
            local_grad(&shape, &model, &ds.batch(&idx))
        })
        .collect::<fedseg::Result<_>>()?;
    println!("KRUM    {:?}", head(&krum_attack(&coalition)?));
    println!("TRIM    {:?}", head(&trim_attack(&coalition)?));
    Ok(())
}
