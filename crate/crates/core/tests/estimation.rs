mod common;

use approx::assert_abs_diff_eq;
use common::naive_quantile;
use fpld::estimation::{
    anderson_darling, empirical_quantiles, fit, fit_gamma_ml, fit_lognormal_ml, fit_ml, fit_mq, fit_starship,
    grid_search_init, log_likelihood, mq_loss, Estimator, FitConfig, QuantileSet,
};
use fpld::scoring::{pit_errors, pit_values};
use fpld::simstudy::sample_lambda_star;
use fpld::{FpldNatural, FpldStar};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

fn exact_quantiles(star: &FpldStar<f64>, m: usize) -> QuantileSet {
    let nat = star.to_natural();
    let pairs = (1..=m)
        .map(|i| {
            let p = i as f64 / (m + 1) as f64;
            (p, nat.quantile(p).unwrap())
        })
        .collect();
    QuantileSet::new(pairs).unwrap()
}

#[test]
fn empirical_quantile_examples() {
    let qs = empirical_quantiles(&[3.0, 1.0, 2.0]).unwrap();
    let pairs: Vec<_> = qs.pairs().collect();
    for (got, want) in pairs.iter().zip([(1.0 / 6.0, 1.0), (0.5, 2.0), (5.0 / 6.0, 3.0)]) {
        assert_abs_diff_eq!(got.0, want.0, epsilon = 1e-15);
        assert_eq!(got.1, want.1);
    }
    let qs = empirical_quantiles(&[5.0; 4]).unwrap();
    assert_eq!(qs.probabilities(), &[0.125, 0.375, 0.625, 0.875]);
    assert!(qs.values().iter().all(|&v| v == 5.0));
    assert!(empirical_quantiles(&[]).is_err());
    assert!(empirical_quantiles(&[1.0, f64::NAN]).is_err());
}

#[test]
fn empirical_median_of_large_sample() {
    let star = FpldStar::new(3.0, 1.5, 0.2, 0.4, 0.3).unwrap();
    let y = star.to_natural().sample(10_000, 9);
    let qs = empirical_quantiles(&y).unwrap();
    assert!((qs.interpolate(0.5) - 3.0).abs() < 0.05);
}

#[test]
fn mq_loss_examples() {
    let star = FpldStar::new(1.0, 2.0, -0.3, 0.5, 0.2).unwrap();
    let qs = exact_quantiles(&star, 40);
    assert!(mq_loss(&star, &qs) < 1e-12);
    let shifted = QuantileSet::new(qs.pairs().map(|(p, q)| (p, q + 1.0)).collect()).unwrap();
    assert_abs_diff_eq!(mq_loss(&star, &shifted), 40.0, epsilon = 1e-9);
}

#[test]
fn mq_loss_matches_term_by_term_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for case in 0..20 {
        let star = sample_lambda_star(&mut rng).unwrap();
        let y = FpldStar::new(0.5, 1.0, 0.1, 0.3, 0.6).unwrap().to_natural().sample(200, case);
        let qs = empirical_quantiles(&y).unwrap();
        let l = star.to_natural().to_array();
        let naive: f64 = qs.pairs().map(|(p, q)| (q - naive_quantile(l, p)).abs()).sum();
        let got = mq_loss(&star, &qs);
        assert!((got - naive).abs() <= 1e-9 * naive.max(1.0), "{got} vs {naive}");
    }
}

#[test]
fn grid_search_recovers_grid_truth() {
    let star = FpldStar::new(2.0, 1.0, 0.25, 0.4, 0.2).unwrap();
    let qs = exact_quantiles(&star, 99);
    let init = grid_search_init(&qs, &FitConfig::default()).unwrap();
    assert_eq!([init.lambda3(), init.lambda4(), init.lambda5()], [0.25, 0.4, 0.2]);
}

#[test]
fn grid_search_is_exhaustive() {
    let cfg = FitConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for case in 0..20 {
        let truth = sample_lambda_star(&mut rng).unwrap();
        let qs = empirical_quantiles(&truth.to_natural().sample(500, case)).unwrap();
        let init = grid_search_init(&qs, &cfg).unwrap();
        let best = mq_loss(&init, &qs);
        let (median, iqr) = (init.median(), init.iqr());
        for &l3 in &cfg.grid_lambda3 {
            for &l4 in &cfg.grid_lambda4 {
                for &l5 in &cfg.grid_lambda5 {
                    let other = FpldStar::new(median, iqr, l3, l4, l5).unwrap();
                    assert!(best <= mq_loss(&other, &qs) + 1e-12);
                }
            }
        }
    }
}

#[test]
fn mq_fits_exact_quantiles() {
    let truth = FpldStar::new(5.0, 2.0, 0.3, 0.6, 0.15).unwrap();
    let pairs = (1..=99)
        .map(|k| {
            let p = k as f64 / 100.0;
            (p, truth.to_natural().quantile(p).unwrap())
        })
        .collect();
    let qs = QuantileSet::new(pairs).unwrap();
    let res = fit_mq(&qs, &FitConfig::default()).unwrap();
    let (a, b) = (res.params.to_natural(), truth.to_natural());
    let worst = (1..=99)
        .map(|k| {
            let p = k as f64 / 100.0;
            (a.quantile(p).unwrap() - b.quantile(p).unwrap()).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst <= 1e-3 * truth.iqr(), "max quantile error {worst}");
}

#[test]
fn positivity_constraint_holds() {
    let truth = FpldStar::new(1.0, 1.2, -0.3, 0.3, 0.5).unwrap();
    let y: Vec<f64> = truth.to_natural().sample(2000, 4).into_iter().filter(|&v| v > 0.0).collect();
    let cfg = FitConfig { enforce_positive_support: true, ..FitConfig::default() };
    for estimator in Estimator::ALL {
        let res = fit(&y, &FitConfig { estimator, ..cfg.clone() }).unwrap();
        let q = res.params.to_natural().quantile(1e-4).unwrap();
        assert!(q >= -1e-6, "{estimator:?}: Q(1e-4) = {q}");
    }
}

#[test]
fn log_likelihood_examples() {
    let uniform = FpldNatural::new(0.0, 2.0, 0.0, 1.0, 1.0).unwrap();
    assert_abs_diff_eq!(log_likelihood(&uniform, &[-0.9, -0.1, 0.3, 0.8]), 4.0 * 0.5f64.ln(), epsilon = 1e-12);
    assert_eq!(log_likelihood(&uniform, &[0.0, 1.5]), f64::NEG_INFINITY);
}

#[test]
fn ml_uniform_density() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let y: Vec<f64> = (0..1024).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
    let res = fit_ml(&y, &FitConfig::with_estimator(Estimator::Ml)).unwrap();
    let d = res.params.to_natural().density(0.0).unwrap();
    assert!((0.45..=0.55).contains(&d), "density at zero {d}");
}

#[test]
fn anderson_darling_examples() {
    let n = 100;
    let grid: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
    assert!(anderson_darling(&grid) < 0.1);
    let small = anderson_darling(&[0.5; 10]);
    let large = anderson_darling(&[0.5; 100]);
    assert!(small > 1.0 && large > small);
}

#[test]
fn starship_calibrates_exact_data() {
    let truth = FpldStar::new(0.0, 1.0, -0.2, 0.5, 0.3).unwrap();
    let nat = truth.to_natural();
    let n = 1024;
    let y: Vec<f64> = (1..=n).map(|i| nat.quantile((i as f64 - 0.5) / n as f64).unwrap()).collect();
    let res = fit_starship(&y, &FitConfig::with_estimator(Estimator::Starship)).unwrap();
    let u = pit_values(&res.params.to_natural(), &y).unwrap();
    assert!(pit_errors(&u).unwrap().e_mu.abs() < 0.01);
}

#[test]
fn baseline_fits_recover_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let y: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).map(|z: f64| z.exp()).collect();
    let ln = fit_lognormal_ml(&y).unwrap();
    assert!(ln.meanlog.abs() < 0.02 && (ln.sdlog - 1.0).abs() < 0.02, "{ln:?}");

    let g = Gamma::new(2.0, 1.0).unwrap();
    let y: Vec<f64> = (0..100_000).map(|_| g.sample(&mut rng)).collect();
    let fit = fit_gamma_ml(&y).unwrap();
    assert!((fit.shape - 2.0).abs() < 0.05, "{fit:?}");
    assert!(fit_gamma_ml(&[1.0, -1.0]).is_err());
}

#[test]
fn fits_are_deterministic() {
    let y = FpldStar::new(2.0, 1.0, 0.1, 0.4, 0.2).unwrap().to_natural().sample(300, 8);
    for estimator in Estimator::ALL {
        let cfg = FitConfig::with_estimator(estimator);
        assert_eq!(fit(&y, &cfg).unwrap().params, fit(&y, &cfg).unwrap().params);
    }
}
