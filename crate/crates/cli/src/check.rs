use fpld::dist::{fpld_from_gpd_pair, FpldNatural, FpldStar, GpdParams};
use fpld::scoring::{crps_fpld, crps_quadrature_fpld, integrate_adaptive};
use fpld::simstudy::sample_lambda_star;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest discrepancy seen by one check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {} cases, max error {:.3e} (tolerance {:.0e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.max_error,
            self.tolerance
        )
    }
}

type Rng8 = ChaCha8Rng;

fn truth(rng: &mut Rng8) -> FpldNatural<f64> {
    sample_lambda_star(rng).expect("sampler yields valid parameters").to_natural()
}

fn worst(errors: impl Iterator<Item = f64>) -> f64 {
    errors.fold(0.0, |m, e| if e.is_nan() { f64::INFINITY } else { m.max(e) })
}

fn crps_vs_quadrature(rng: &mut Rng8, cases: usize) -> CheckOutcome {
    let max_error = worst((0..cases).map(|i| {
        let mut f = truth(rng);
        if i % 5 == 0 {
            let tiny = rng.gen_range(-1e-9..1e-9);
            let [l1, l2, l3, l4, l5] = f.to_array();
            f = if i % 10 == 0 { FpldNatural::new(l1, l2, l3, tiny, l5) } else { FpldNatural::new(l1, l2, l3, l4, tiny) }
                .expect("valid parameters");
        }
        let y = f.sample_with(rng, 1)[0];
        match (crps_fpld(&f, y), crps_quadrature_fpld(&f, y)) {
            (Ok(a), Ok(b)) => (a.value() - b.value()).abs(),
            _ => f64::INFINITY,
        }
    }));
    CheckOutcome { name: "crps closed form vs quadrature", cases, max_error, tolerance: 1e-6 }
}

fn cdf_inverse(rng: &mut Rng8, cases: usize) -> CheckOutcome {
    let max_error = worst((0..cases).flat_map(|_| {
        let f = truth(rng);
        (1..=50).map(move |k| {
            let p = (k as f64 - 0.5) / 50.0;
            f.quantile(p).and_then(|q| f.cdf(q)).map_or(f64::INFINITY, |u| (u - p).abs())
        })
    }));
    CheckOutcome { name: "cdf inverts quantile", cases: cases * 50, max_error, tolerance: 1e-9 }
}

fn gpd_identity(rng: &mut Rng8, cases: usize) -> CheckOutcome {
    let max_error = worst((0..cases).flat_map(|_| {
        let hi = GpdParams::new(rng.gen_range(-5.0..5.0), rng.gen_range(0.1..5.0), rng.gen_range(-0.45..1.0)).unwrap();
        let lo = GpdParams::new(rng.gen_range(-5.0..5.0), rng.gen_range(0.1..5.0), rng.gen_range(0.05..1.0)).unwrap();
        let a = rng.gen_range(0.2..3.0);
        let f = fpld_from_gpd_pair(&hi, &lo, a).unwrap();
        (1..=99).map(move |k| {
            let p = k as f64 / 100.0;
            let direct = hi.quantile(p).unwrap() + lo.reflected_quantile(p.powf(a)).unwrap();
            (f.quantile(p).unwrap() - direct).abs()
        })
    }));
    CheckOutcome { name: "GPD pair construction", cases, max_error, tolerance: 1e-10 }
}

fn roundtrips(rng: &mut Rng8, cases: usize) -> CheckOutcome {
    let max_error = worst((0..cases).map(|i| {
        let s = sample_lambda_star(rng).unwrap();
        let iqr = match i % 3 {
            0 => 1e-4,
            1 => 500.0,
            _ => s.iqr(),
        };
        let s = FpldStar::new(s.median(), iqr, s.lambda3(), s.lambda4(), s.lambda5()).unwrap();
        let nat = s.to_natural();
        let back = nat.to_star();
        let via_u = s.to_unconstrained().map(|u| u.to_star());
        let mut e = 0.0f64;
        for (a, b) in s.to_array().iter().zip(back.to_array()) {
            e = e.max((a - b).abs());
        }
        match via_u {
            Ok(u) => {
                for (a, b) in s.to_array().iter().zip(u.to_array()) {
                    e = e.max((a - b).abs());
                }
            }
            Err(_) => e = f64::INFINITY,
        }
        let again = back.to_natural();
        for (a, b) in nat.to_array().iter().zip(again.to_array()) {
            e = e.max((a - b).abs());
        }
        e
    }));
    CheckOutcome { name: "parametrisation roundtrips", cases, max_error, tolerance: 1e-10 }
}

fn uniform_case() -> CheckOutcome {
    let f = FpldNatural::<f64>::new(0.0, 2.0, 0.0, 1.0, 1.0).unwrap();
    let s = f.support();
    let errors = [
        (crps_fpld(&f, 0.0).unwrap().value() - 1.0 / 6.0).abs(),
        (f.density(0.3).unwrap() - 0.5).abs(),
        (s.lower + 1.0).abs() + (s.upper - 1.0).abs(),
    ];
    CheckOutcome { name: "uniform special case", cases: errors.len(), max_error: worst(errors.into_iter()), tolerance: 1e-8 }
}

fn density_mass(rng: &mut Rng8, cases: usize) -> CheckOutcome {
    let max_error = worst((0..cases).map(|_| {
        let f = truth(rng);
        let (lo, hi) = (f.quantile(1e-9).unwrap(), f.quantile(1.0 - 1e-9).unwrap());
        let mass = integrate_adaptive(|t| f.density(t).unwrap_or(f64::NAN), lo, hi, 1e-10);
        mass.map_or(f64::INFINITY, |m| (m + 2e-9 - 1.0).abs())
    }));
    CheckOutcome { name: "density integrates to one", cases, max_error, tolerance: 1e-6 }
}

/// Runs every check with a fixed seed; results are deterministic.
pub fn run_checks(cases: usize, seed: u64) -> Vec<CheckOutcome> {
    let mut rng = Rng8::seed_from_u64(seed);
    let small = (cases / 2).max(1);
    vec![
        crps_vs_quadrature(&mut rng, cases),
        cdf_inverse(&mut rng, small),
        gpd_identity(&mut rng, small),
        roundtrips(&mut rng, cases),
        density_mass(&mut rng, (cases / 10).max(1)),
        uniform_case(),
    ]
}
