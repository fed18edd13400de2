mod common;

use ivreach::neural::{crown_with, AlphaRule};
use ivreach::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lin(c: &[f64], d: f64, x: &[f64]) -> f64 {
    c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_alpha_rule_is_sound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=3);
        let net = common::random_network(n, 2, rng.gen_range(2..=4), 12, &mut rng);
        let bx = common::random_box(n, 1.5, &mut rng);
        for rule in [AlphaRule::Auto, AlphaRule::Adaptive, AlphaRule::Zero, AlphaRule::One] {
            let b = crown_with(&net, &bx, rule).unwrap();
            for _ in 0..200 {
                let x = common::sample(&bx, &mut rng);
                let y = net.forward(&x).unwrap();
                for (r, &yr) in y.iter().enumerate() {
                    prop_assert!(lin(&b.c_lower[r], b.d_lower[r], &x) <= yr + 1e-9, "{rule:?}");
                    prop_assert!(yr <= lin(&b.c_upper[r], b.d_upper[r], &x) + 1e-9, "{rule:?}");
                }
            }
        }
    }

    #[test]
    fn fastlin_shares_one_slope_and_is_sound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = common::random_network(3, 2, 3, 16, &mut rng);
        let bx = common::random_box(3, 1.0, &mut rng);
        let b = fastlin(&net, &bx).unwrap();
        for r in 0..2 {
            prop_assert!(b.d_lower[r] <= b.d_upper[r]);
        }
        for _ in 0..200 {
            let x = common::sample(&bx, &mut rng);
            let y = net.forward(&x).unwrap();
            for (r, &yr) in y.iter().enumerate() {
                prop_assert!(lin(&b.c[r], b.d_lower[r], &x) <= yr + 1e-9);
                prop_assert!(yr <= lin(&b.c[r], b.d_upper[r], &x) + 1e-9);
            }
        }
    }
}

#[test]
fn affine_network_bounds_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let net = common::random_network(3, 2, 1, 4, &mut rng);
    let bx = common::random_box(3, 1.0, &mut rng);
    let ibp = nn_ibp(&net, &bx).unwrap();
    let cr = crown(&net, &bx).unwrap().output_box(&bx);
    for (a, b) in ibp.iter().zip(&cr) {
        assert!((a.lower - b.lower).abs() < 1e-12 && (a.upper - b.upper).abs() < 1e-12);
    }
}
