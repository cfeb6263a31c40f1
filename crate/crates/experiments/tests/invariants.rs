use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symavg_experiments::figure1::{average_field, field, Figure1};
use symavg_experiments::mlp::{full_group_prediction, pattern_signs, random_point, Mlp};
use symavg_experiments::regression::{regression_risk, RegressionConfig, RepChoice};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn full_sign_group_average_is_invariant(seed in any::<u64>(), d in 1usize..7, flip in any::<u32>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = Mlp::new(d, 6, 5, &mut rng);
        let x = random_point(d, &mut rng);
        let flipped = &x * &pattern_signs(flip & ((1 << d) - 1), d);
        prop_assert_eq!(full_group_prediction(&net, flipped.view()), full_group_prediction(&net, x.view()));
    }

    #[test]
    fn full_rotation_average_is_invariant(x in -1.0f64..1.0, y in -1.0f64..1.0, k in 0usize..100) {
        let all: Vec<usize> = (0..100).collect();
        let t = 2.0 * PI * k as f64 / 100.0;
        let (s, c) = t.sin_cos();
        let base = average_field(&[(x, y)], &all, 100)[0];
        let moved = average_field(&[(c * x - s * y, s * x + c * y)], &all, 100)[0];
        prop_assert!((base - moved).abs() <= 1e-12);
    }

    #[test]
    fn identity_rotation_reproduces_the_field(x in -1.0f64..1.0, y in -1.0f64..1.0) {
        prop_assert_eq!(average_field(&[(x, y)], &[0], 100)[0], field(x, y));
    }
}

#[test]
fn exact_risk_below_erm() {
    for (group, rep) in [
        ("signflip:2", RepChoice::Regular),
        ("cyclic:5", RepChoice::Regular),
        ("symmetric:3", RepChoice::Permutation),
    ] {
        let r = regression_risk(&RegressionConfig {
            group: group.into(),
            rep,
            n: 60,
            trials: 1000,
            seed: 17,
            ..RegressionConfig::default()
        })
        .unwrap();
        let slack = 2.0 * (r.rows[0].stderr.powi(2) + r.rows[1].stderr.powi(2)).sqrt();
        assert!(r.risk("exact") <= r.risk("erm") + slack, "{group}");
    }
}

#[test]
fn figure1_distances_shrink_with_subset_size() {
    let fig = Figure1::new(100, 40);
    let (one, _) = fig.subset(1, 3);
    let (five, _) = fig.subset(5, 3);
    let (all, avg) = fig.subset(100, 3);
    assert!(five.relative_l2_to_full < one.relative_l2_to_full);
    assert_eq!(all.relative_l2_to_full, 0.0);
    assert_eq!(avg.len(), 1600);
}
