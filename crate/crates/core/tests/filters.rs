use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sparse_mcc::filters::{cim_attractor, cim_attractor_bound};
use sparse_mcc::{Algorithm, FilterParams, FilterSpec, FilterState, KernelWidth, TapWeights};

const M: usize = 16;

/// Sparse system driven by Gaussian input with occasional large outliers.
fn data(seed: u64, steps: usize) -> Vec<(Vec<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<f64> = (0..M).map(|i| if i % 5 == 0 { 1.0 } else { 0.0 }).collect();
    (0..steps)
        .map(|_| {
            let x: Vec<f64> = (0..M).map(|_| rng.sample(StandardNormal)).collect();
            let z: f64 = rng.sample(StandardNormal);
            let v = if rng.random_bool(0.05) { 10.0 * z } else { 0.01 * z };
            let d = truth.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + v;
            (x, d)
        })
        .collect()
}

fn trajectory(spec: FilterSpec, data: &[(Vec<f64>, f64)]) -> Vec<Vec<f64>> {
    let mut f = FilterState::new(spec, M, None).unwrap();
    data.iter()
        .map(|(x, d)| {
            f.step(x, *d).unwrap();
            f.weights().to_vec()
        })
        .collect()
}

#[test]
fn zero_rho_collapses_to_the_base_filter() {
    let data = data(1, 1000);
    let (mu, s1) = (0.01, 2.0);
    let pairs = [
        (FilterSpec::zalms(mu, 0.0).unwrap(), FilterSpec::lms(mu).unwrap()),
        (FilterSpec::rzalms(mu, 0.0, 10.0).unwrap(), FilterSpec::lms(mu).unwrap()),
        (FilterSpec::zamcc(mu, 0.0, s1).unwrap(), FilterSpec::mcc(mu, s1).unwrap()),
        (FilterSpec::rzamcc(mu, 0.0, s1, 10.0).unwrap(), FilterSpec::mcc(mu, s1).unwrap()),
        (FilterSpec::cimmcc(mu, 0.0, s1, 0.01).unwrap(), FilterSpec::mcc(mu, s1).unwrap()),
    ];
    for (sparse, base) in pairs {
        assert_eq!(trajectory(sparse, &data), trajectory(base, &data), "{}", sparse.algorithm());
    }
}

#[test]
fn wide_kernel_collapses_to_lms_family() {
    let data = data(2, 1000);
    let (mu, rho, wide) = (0.005, 1e-4, 1e6);
    let pairs = [
        (FilterSpec::mcc(mu, wide).unwrap(), FilterSpec::lms(mu).unwrap()),
        (FilterSpec::zamcc(mu, rho, wide).unwrap(), FilterSpec::zalms(mu, rho).unwrap()),
        (FilterSpec::rzamcc(mu, rho, wide, 10.0).unwrap(), FilterSpec::rzalms(mu, rho, 10.0).unwrap()),
    ];
    for (mcc, lms) in pairs {
        let a = trajectory(mcc, &data);
        let b = trajectory(lms, &data);
        for (step, (wa, wb)) in a.iter().zip(&b).enumerate() {
            let norm = wb.iter().map(|v| v * v).sum::<f64>().sqrt();
            let diff = wa.iter().zip(wb).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            assert!(diff <= 1e-6 * norm.max(1e-12), "{} step {step}: {diff} vs {norm}", mcc.algorithm());
        }
    }
}

#[test]
fn lmp_with_p_two_is_lms_with_double_step() {
    let data = data(3, 1000);
    let mu = 0.004;
    assert_eq!(
        trajectory(FilterSpec::lmp(mu, 2.0).unwrap(), &data),
        trajectory(FilterSpec::lms(2.0 * mu).unwrap(), &data)
    );
}

fn any_spec() -> impl Strategy<Value = FilterSpec> {
    (
        prop::sample::select(Algorithm::ALL.to_vec()),
        0.001f64..0.05,
        0.0f64..1e-3,
        0.5f64..5.0,
        0.005f64..0.5,
        1.0f64..20.0,
        1.05f64..2.0,
    )
        .prop_map(|(algorithm, mu, rho, sigma1, sigma2, delta_prime, p)| {
            let params = FilterParams {
                mu,
                rho: Some(rho),
                sigma1: Some(sigma1),
                sigma2: Some(sigma2),
                delta_prime: Some(delta_prime),
                p: Some(p),
            };
            FilterSpec::new(algorithm, &params).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn updates_are_odd_in_the_data(spec in any_spec(), seed in any::<u64>(), init in prop::collection::vec(-1f64..1.0, M)) {
        let data = data(seed, 50);
        let neg: Vec<(Vec<f64>, f64)> = data.iter().map(|(x, d)| (x.clone(), -d)).collect();
        let w0 = TapWeights::new(init.clone()).unwrap();
        let w0n = TapWeights::new(init.iter().map(|v| -v).collect()).unwrap();
        let mut a = FilterState::new(spec, M, Some(&w0)).unwrap();
        let mut b = FilterState::new(spec, M, Some(&w0n)).unwrap();
        for ((x, d), (_, dn)) in data.iter().zip(&neg) {
            let ea = a.step(x, *d).unwrap();
            let eb = b.step(x, *dn).unwrap();
            prop_assert_eq!(ea, -eb);
            for (p, q) in a.weights().iter().zip(b.weights()) {
                prop_assert_eq!(*p, -*q);
            }
        }
    }

    #[test]
    fn step_returns_the_a_priori_error(spec in any_spec(), seed in any::<u64>()) {
        let mut f = FilterState::new(spec, M, None).unwrap();
        for (x, d) in data(seed, 30) {
            let expected = f.predict_error(&x, d).unwrap();
            prop_assert_eq!(f.step(&x, d).unwrap(), expected);
        }
    }

    #[test]
    fn cim_attractor_is_odd(w in prop::collection::vec(-1f64..1.0, 1..32), s in 0.001f64..1.0) {
        let s = KernelWidth::new(s).unwrap();
        let neg: Vec<f64> = w.iter().map(|v| -v).collect();
        let a = cim_attractor(&w, s);
        let b = cim_attractor(&neg, s);
        for (p, q) in a.iter().zip(&b) {
            prop_assert_eq!(*p, -*q);
        }
    }
}

// A hand-rolled loop keeps 10^5 cases fast; shrinking is not needed for a
// bound check.
#[test]
fn cim_attractor_never_exceeds_its_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA77);
    for _ in 0..100_000 {
        let m = rng.random_range(1..=64);
        let s: f64 = 10f64.powf(rng.random_range(-3.0..0.5));
        let sigma2 = KernelWidth::new(s).unwrap();
        let spread = s * 10f64.powf(rng.random_range(-2.0..2.0));
        let w: Vec<f64> = (0..m).map(|_| rng.random_range(-spread..spread)).collect();
        let bound = cim_attractor_bound(m, sigma2);
        let peak = cim_attractor(&w, sigma2).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(peak <= bound * (1.0 + 1e-12), "m={m} s={s} peak={peak} bound={bound}");

        let at_width: Vec<f64> = (0..m).map(|i| if i % 2 == 0 { s } else { -s }).collect();
        for v in cim_attractor(&at_width, sigma2) {
            assert!((v.abs() - bound).abs() <= 1e-9 * bound, "m={m} s={s}");
        }
    }
}
