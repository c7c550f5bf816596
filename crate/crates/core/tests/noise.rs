use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use sparse_mcc::noise::{empirical_char_fn, mixture_variance};
use sparse_mcc::rng::{shared_stream, StreamRole};
use sparse_mcc::{AlphaStableParams, MixedGaussianParams, NoiseModel};

const DRAWS: usize = 1_000_000;
const GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

fn draws(model: NoiseModel, seed: u64) -> Vec<f64> {
    model.sample_n(&mut shared_stream(seed, StreamRole::Noise), DRAWS)
}

fn check_cf(p: AlphaStableParams, seed: u64) {
    let xs = draws(NoiseModel::AlphaStable(p), seed);
    for t in GRID {
        let got = empirical_char_fn(&xs, t).unwrap();
        let want = p.characteristic_function(t);
        assert!(
            (got - want).norm() < 0.01,
            "{p:?} t={t}: empirical {got} vs closed form {want}"
        );
    }
}

#[test]
fn symmetric_stable_matches_characteristic_function() {
    for (alpha, gamma) in [(1.2, 0.2), (1.4, 1.0), (2.0, 0.5)] {
        check_cf(AlphaStableParams::symmetric(alpha, gamma).unwrap(), 11);
    }
}

#[test]
fn skewed_and_cauchy_like_stable_match_characteristic_function() {
    check_cf(AlphaStableParams::new(1.5, 0.5, 1.0, 0.0).unwrap(), 12);
    check_cf(AlphaStableParams::new(1.0, 0.5, 1.0, 0.3).unwrap(), 13);
    check_cf(AlphaStableParams::new(0.8, -0.7, 0.5, 0.0).unwrap(), 14);
    check_cf(AlphaStableParams::new(1.0, -1.0, 0.3, -0.5).unwrap(), 15);
}

#[test]
fn closed_form_reference_values() {
    let cases = [
        ((1.5, 0.5, 1.0, 0.0), 1.0, Complex64::new(0.322_844_582_450_033, 0.176_370_799_225_031_95)),
        ((1.0, 0.5, 1.0, 0.3), 2.0, Complex64::new(0.133_633_984_882_305_6, 0.021_391_516_384_069_06)),
        ((1.2, 0.0, 0.2, 0.0), 0.5, Complex64::new(0.916_626_628_146_117, 0.0)),
    ];
    for ((a, b, g, d), t, want) in cases {
        let got = AlphaStableParams::new(a, b, g, d).unwrap().characteristic_function(t);
        assert_abs_diff_eq!(got.re, want.re, epsilon = 1e-14);
        assert_abs_diff_eq!(got.im, want.im, epsilon = 1e-14);
    }
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

#[test]
fn mixed_gaussian_variance_within_five_standard_errors() {
    for (seed, p) in [
        (21, MixedGaussianParams::new(0.0, 0.0, 0.0001, 20.0, 0.05).unwrap()),
        (22, MixedGaussianParams::new(0.5, -2.0, 1.0, 9.0, 0.3).unwrap()),
    ] {
        let xs = draws(NoiseModel::MixedGaussian(p), seed);
        let var = mixture_variance(&p);
        let mean = (1.0 - p.theta) * p.mu1 + p.theta * p.mu2;
        let n = xs.len() as f64;
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        let se = ((m4 - var * var) / n).sqrt();
        let got = sample_variance(&xs);
        assert!((got - var).abs() < 5.0 * se, "{p:?}: {got} vs {var} (se {se})");
    }
}

#[test]
fn gaussian_limit_has_variance_two_gamma() {
    let gamma = 0.5;
    let xs = draws(NoiseModel::AlphaStable(AlphaStableParams::symmetric(2.0, gamma).unwrap()), 31);
    let var = 2.0 * gamma;
    let se = var * (2.0 / xs.len() as f64).sqrt();
    assert!((sample_variance(&xs) - var).abs() < 5.0 * se);
}

/// Two-sample Kolmogorov–Smirnov statistic between `xs` and `-xs`.
fn reflection_ks(xs: &[f64]) -> f64 {
    let mut a = xs.to_vec();
    a.sort_by(f64::total_cmp);
    let mut b: Vec<f64> = a.iter().rev().map(|x| -x).collect();
    b.sort_by(f64::total_cmp);
    let n = a.len() as f64;
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 - j as f64).abs() / n);
    }
    d
}

#[test]
fn symmetric_draws_are_symmetric() {
    let xs = draws(NoiseModel::AlphaStable(AlphaStableParams::symmetric(1.2, 0.2).unwrap()), 41);
    let n = xs.len() as f64;
    // 0.1% critical value of the two-sample statistic
    let critical = 1.95 * (2.0 / n).sqrt();
    assert!(reflection_ks(&xs) < critical);

    let skewed = draws(NoiseModel::AlphaStable(AlphaStableParams::new(1.2, 0.8, 0.2, 0.0).unwrap()), 42);
    assert!(reflection_ks(&skewed) > critical);
}

#[test]
fn location_shifts_the_median() {
    let mut xs = draws(NoiseModel::AlphaStable(AlphaStableParams::new(1.2, 0.0, 0.2, 3.0).unwrap()), 51);
    xs.sort_by(f64::total_cmp);
    assert_abs_diff_eq!(xs[xs.len() / 2], 3.0, epsilon = 0.01);
}

#[test]
fn samples_are_finite() {
    for p in [(0.5, 0.0, 1.0), (1.0, 1.0, 1.0), (1.99, -1.0, 2.0)] {
        let m = NoiseModel::AlphaStable(AlphaStableParams::new(p.0, p.1, p.2, 0.0).unwrap());
        assert!(m.sample_n(&mut shared_stream(61, StreamRole::Noise), 100_000).iter().all(|x| x.is_finite()));
    }
}
