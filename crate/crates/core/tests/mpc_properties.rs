use fedseg::bits::BitVector;
use fedseg::clustering::{cosine_from_xor, dbscan_labels, euclid_rows, indicator_matrix, IndMatrix};
use fedseg::mpc::{
    decode_fixed, encode_fixed, reconstruct_arith, reconstruct_binary, secure_leq, share_arith, share_binary, Mpc,
    FRAC_BITS,
};
use fedseg::updates::SignVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ULP: f64 = 1.0 / (1u64 << FRAC_BITS) as f64;

fn signs_from(bits: &[bool]) -> SignVector {
    SignVector::from_bits(BitVector::from_bools(bits.iter().copied()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binary_shares_reconstruct(bits in prop::collection::vec(any::<bool>(), 1..300), servers in 3usize..7, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = signs_from(&bits);
        let shared = share_binary(&s, servers, &mut rng).unwrap();
        prop_assert_eq!(reconstruct_binary(shared.shares(), servers).unwrap(), s);
    }

    #[test]
    fn arithmetic_shares_reconstruct(values in prop::collection::vec(any::<u64>(), 1..100), servers in 3usize..7, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shared = share_arith(&values, 0, servers, &mut rng).unwrap();
        prop_assert_eq!(reconstruct_arith(shared.shares()), values);
    }

    #[test]
    fn fewer_than_all_binary_shares_look_uniform(seed: u64) {
        // every strict subset of shares of the all-zero vector is independent of it
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zero = signs_from(&[false; 4096]);
        let shared = share_binary(&zero, 3, &mut rng).unwrap();
        let mut partial = shared.share(0).bits.clone();
        partial.xor_assign(&shared.share(1).bits);
        let ones = partial.count_ones() as f64;
        prop_assert!((ones / 4096.0 - 0.5).abs() < 0.05);
    }

    #[test]
    fn multiplication_within_two_ulp(pairs in prop::collection::vec((-1000.0f64..1000.0, -1000.0f64..1000.0), 1..50), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mpc = Mpc::new(3, seed).unwrap();
        let xs: Vec<u64> = pairs.iter().map(|p| encode_fixed(p.0, FRAC_BITS)).collect();
        let ys: Vec<u64> = pairs.iter().map(|p| encode_fixed(p.1, FRAC_BITS)).collect();
        let x = share_arith(&xs, FRAC_BITS, 3, &mut rng).unwrap();
        let y = share_arith(&ys, FRAC_BITS, 3, &mut rng).unwrap();
        let got = mpc.mul(&x, &y).unwrap().reveal();
        for ((a, b), g) in xs.iter().zip(&ys).zip(got) {
            let want = decode_fixed(*a, FRAC_BITS) * decode_fixed(*b, FRAC_BITS);
            prop_assert!((g - want).abs() <= 2.0 * ULP, "{} vs {}", g, want);
        }
    }

    #[test]
    fn truncation_is_floor_within_one(values in prop::collection::vec(-(1i64 << 60)..(1i64 << 60), 1..50), shift in 1u32..40, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mpc = Mpc::new(4, seed).unwrap();
        let raw: Vec<u64> = values.iter().map(|v| *v as u64).collect();
        let x = share_arith(&raw, 40, 4, &mut rng).unwrap();
        let got = mpc.truncate(&x, shift).unwrap().reveal_raw();
        for (v, g) in values.iter().zip(got) {
            let floor = v >> shift;
            prop_assert!((g as i64 - floor).abs() <= 1, "{} >> {} gave {}", v, shift, g as i64);
        }
    }

    #[test]
    fn comparison_agrees_outside_band(values in prop::collection::vec(-4.0f64..4.0, 1..60), alpha in 0.1f64..2.0, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mpc = Mpc::new(3, seed).unwrap();
        let tau = 4.0 * 3.0 * ULP;
        let raw: Vec<u64> = values.iter().map(|v| encode_fixed(*v, FRAC_BITS)).collect();
        let x = share_arith(&raw, FRAC_BITS, 3, &mut rng).unwrap();
        let mut r = secure_leq(&x, alpha, &mut mpc).unwrap();
        let bits = r.check_and_open(&mut mpc).unwrap().clone();
        for (i, v) in values.iter().enumerate() {
            if (v - alpha).abs() > tau {
                prop_assert_eq!(bits.get(i), *v <= alpha);
            }
        }
    }

    #[test]
    fn b2a_preserves_bits(bits in prop::collection::vec(any::<bool>(), 1..200), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mpc = Mpc::new(3, seed).unwrap();
        let shared = share_binary(&signs_from(&bits), 3, &mut rng).unwrap();
        let arith = mpc.b2a(&shared, FRAC_BITS).unwrap().reveal();
        for (b, a) in bits.iter().zip(arith) {
            prop_assert_eq!(a, if *b { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn clustering_outputs_are_symmetric(n in 2usize..10, np in 8usize..200, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mpc = Mpc::new(3, seed).unwrap();
        let shares: Vec<_> = (0..n)
            .map(|_| share_binary(&SignVector::from_bits(BitVector::random(np, &mut rng)), 3, &mut rng).unwrap())
            .collect();
        let cos = cosine_from_xor(&shares, &mut mpc).unwrap();
        let plain = cos.reveal();
        prop_assert!(plain.is_symmetric());
        prop_assert!(plain.values().iter().all(|c| c.abs() <= 1.0 + ULP));
        let euc = euclid_rows(&cos, &mut mpc).unwrap();
        let ind = indicator_matrix(&euc, 1.2, &mut mpc).unwrap();
        prop_assert!(ind.is_symmetric() && ind.is_reflexive());
        let labels = dbscan_labels(&ind, 2);
        prop_assert_eq!(labels.labels.len(), n);
    }
}

#[test]
fn identical_inputs_form_one_block() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mpc = Mpc::new(5, 3).unwrap();
    let base = SignVector::from_bits(BitVector::random(100, &mut rng));
    let shares: Vec<_> = (0..6).map(|_| share_binary(&base, 5, &mut rng).unwrap()).collect();
    let cos = cosine_from_xor(&shares, &mut mpc).unwrap();
    let ind = indicator_matrix(&euclid_rows(&cos, &mut mpc).unwrap(), 1.2, &mut mpc).unwrap();
    assert_eq!(ind, IndMatrix::from_upper(6, |_, _| true));
}
