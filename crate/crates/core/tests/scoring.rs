mod common;

use approx::assert_abs_diff_eq;
use common::crps_oracle;
use fpld::dist::SupportInterval;
use fpld::scoring::{
    crps_fpld, crps_quadrature, crps_quadrature_fpld, mean_crps, mean_crps_single, permutation_test_crps,
    pit_errors, pit_values, qq_points, skill_score, SkillMode,
};
use fpld::simstudy::sample_lambda_star;
use fpld::{FpldNatural, FpldStar};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform() -> FpldNatural<f64> {
    FpldNatural::new(0.0, 2.0, 0.0, 1.0, 1.0).unwrap()
}

#[test]
fn uniform_crps() {
    assert_abs_diff_eq!(crps_fpld(&uniform(), 0.0).unwrap().value(), 1.0 / 6.0, epsilon = 1e-12);
    assert!(crps_fpld(&uniform(), 0.0).unwrap() < crps_fpld(&uniform(), 0.9).unwrap());
    // Outside the support the score grows by the distance to the boundary.
    let at_edge = crps_fpld(&uniform(), 1.0).unwrap().value();
    assert_abs_diff_eq!(crps_fpld(&uniform(), 3.0).unwrap().value(), at_edge + 2.0, epsilon = 1e-12);
}

#[test]
fn quadrature_examples() {
    let range = SupportInterval { lower: 0.0, upper: 1.0 };
    let cdf = |t: f64| t.clamp(0.0, 1.0);
    assert_abs_diff_eq!(crps_quadrature(cdf, range, 0.5).unwrap().value(), 1.0 / 12.0, epsilon = 1e-8);
    let mut last = 0.0;
    for y in [-0.5, -1.0, -2.0, -4.0] {
        let v = crps_quadrature(cdf, range, y).unwrap().value();
        assert!(v > last);
        last = v;
    }
    assert!(crps_quadrature(cdf, SupportInterval { lower: 0.0, upper: f64::INFINITY }, 0.5).is_err());
}

#[test]
fn closed_form_matches_probability_space_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..100 {
        let nat = sample_lambda_star(&mut rng).unwrap().to_natural();
        let y = nat.quantile(rng.gen_range(0.001..0.999)).unwrap();
        let got = crps_fpld(&nat, y).unwrap().value();
        let want = crps_oracle(nat.to_array(), y);
        assert!((got - want).abs() <= 1e-6, "{:?} y={y}: {got} vs {want}", nat.to_array());
    }
}

#[test]
fn closed_form_matches_library_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..100 {
        let nat = sample_lambda_star(&mut rng).unwrap().to_natural();
        let y = nat.quantile(rng.gen_range(0.001..0.999)).unwrap() + rng.gen_range(-1.0..1.0);
        let a = crps_fpld(&nat, y).unwrap().value();
        let b = crps_quadrature_fpld(&nat, y).unwrap().value();
        assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
    }
}

#[test]
fn crps_outside_bounded_support() {
    let nat = FpldNatural::new(1.0, 2.0, 0.3, 1.2, 1.5).unwrap();
    let s = nat.support();
    for y in [s.lower - 2.0, s.upper + 0.5] {
        let got = crps_fpld(&nat, y).unwrap().value();
        assert!((got - crps_oracle(nat.to_array(), y)).abs() <= 1e-6);
    }
}

#[test]
fn mean_crps_examples() {
    let nat = FpldNatural::new(2.0, 1.0, 0.1, 0.4, 0.3).unwrap();
    assert_eq!(mean_crps_single(&nat, &[1.3]).unwrap(), crps_fpld(&nat, 1.3).unwrap().value());
    let y = nat.sample(100, 2);
    let doubled: Vec<f64> = y.iter().chain(&y).copied().collect();
    assert_abs_diff_eq!(mean_crps_single(&nat, &y).unwrap(), mean_crps_single(&nat, &doubled).unwrap(), epsilon = 1e-12);
    let per_case = vec![nat; y.len()];
    assert_abs_diff_eq!(mean_crps(&per_case, &y).unwrap(), mean_crps_single(&nat, &y).unwrap(), epsilon = 1e-12);
    assert!(mean_crps(&per_case[..3], &y).is_err());
}

#[test]
fn skill_examples() {
    let truth = FpldStar::new(7.0, 3.0, 0.1, 0.4, 0.2).unwrap().to_natural();
    let y = truth.sample(1000, 6);
    assert_eq!(skill_score(&truth, &truth, &y, SkillMode::Empirical, 0, 0).unwrap(), 0.0);
    let off = FpldStar::new(12.0, 3.0, 0.1, 0.4, 0.2).unwrap().to_natural();
    assert!(skill_score(&off, &truth, &y, SkillMode::Expected, 4096, 1).unwrap() > 0.0);
}

#[test]
fn pit_examples() {
    assert_eq!(pit_errors(&[0.25, 0.75]).unwrap().e_mu, 0.0);
    let n = 1000;
    let grid: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
    let e = pit_errors(&grid).unwrap();
    assert!(e.e_mu.abs() < 1e-12 && e.e_sigma.abs() < 1e-3, "{e:?}");
    assert!(pit_errors(&[0.5, 1.5]).is_err());
}

#[test]
fn pit_of_true_model_shrinks_with_n() {
    let truth = FpldStar::new(0.0, 1.0, 0.2, 0.3, 0.5).unwrap().to_natural();
    let mut sigma = Vec::new();
    for (n, seed) in [(500usize, 1u64), (50_000, 2)] {
        let u = pit_values(&truth, &truth.sample(n, seed)).unwrap();
        let e = pit_errors(&u).unwrap();
        assert!(e.e_mu.abs() <= 3.0 / (12.0 * n as f64).sqrt());
        sigma.push(e.e_sigma.abs());
    }
    assert!(sigma[1] < 0.01);
}

#[test]
fn permutation_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let b: Vec<f64> = (0..100).map(|_| rng.gen_range(0.0..2.0)).collect();
    assert_eq!(permutation_test_crps(&b, &b, 999, 1).unwrap(), 1.0);
    let a: Vec<f64> = b.iter().map(|v| v + 1.0).collect();
    assert!(permutation_test_crps(&a, &b, 999, 1).unwrap() <= 0.01);
    assert!(permutation_test_crps(&a, &b, 0, 1).is_err());
    assert_eq!(permutation_test_crps(&a, &b, 999, 7).unwrap(), permutation_test_crps(&a, &b, 999, 7).unwrap());
}

#[test]
fn qq_examples() {
    let star = FpldStar::new(4.0, 2.0, -0.1, 0.5, 0.3).unwrap();
    let nat = star.to_natural();
    let y = nat.sample(100_000, 12);
    let pts = qq_points(&nat, &y).unwrap();
    let n = pts.len();
    let worst = pts[n / 20..n - n / 20].iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst <= 0.05 * star.iqr(), "{worst}");

    let exact: Vec<f64> = (0..50).map(|i| nat.quantile((i as f64 + 0.5) / 50.0).unwrap()).collect();
    for (a, b) in qq_points(&nat, &exact).unwrap() {
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn crps_is_nonnegative_and_translation_equivariant(
        m in -5.0..5.0f64, s in 0.2..5.0f64, l3 in -0.9..0.9f64, l4 in 0.05..1.5f64, l5 in 0.05..1.5f64,
        p in 0.01..0.99f64, shift in -10.0..10.0f64,
    ) {
        let nat = FpldStar::new(m, s, l3, l4, l5).unwrap().to_natural();
        let y = nat.quantile(p).unwrap();
        let a = crps_fpld(&nat, y).unwrap().value();
        let b = crps_fpld(&nat.shifted(shift), y + shift).unwrap().value();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn pit_values_are_probabilities(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nat = sample_lambda_star(&mut rng).unwrap().to_natural();
        let u = pit_values(&nat, &nat.sample(50, seed)).unwrap();
        prop_assert!(u.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
