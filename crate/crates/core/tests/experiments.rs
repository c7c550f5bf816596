use sparse_mcc::channels::observe;
use sparse_mcc::experiments::{aggregate, run_monte_carlo, run_trial, step_size_bound, window_mean};
use sparse_mcc::rng::{shared_stream, trial_stream, StreamRole};
use sparse_mcc::{
    Algorithm, AlphaStableParams, ChannelSchedule, ExperimentConfig, FilterSpec, FilterState, InputKind,
    InputProcess, KernelWidth, MixedGaussianParams, MsdScale, NoiseModel, TrialOutcome,
};

fn config(filters: Vec<FilterSpec>, noise: NoiseModel, iterations: u64, trials: u64) -> ExperimentConfig {
    ExperimentConfig {
        filters,
        noise,
        schedule: ChannelSchedule::paper_tv20(),
        input: InputProcess::new(InputKind::WhiteGaussian { variance: 1.0 }, 20).unwrap(),
        iterations,
        trials,
        base_seed: 77,
        msd_window: iterations / 10,
        msd_scale: MsdScale::Db,
        clamp: None,
    }
}

fn mixed() -> NoiseModel {
    NoiseModel::MixedGaussian(MixedGaussianParams::new(0.0, 0.0, 0.0001, 20.0, 0.05).unwrap())
}

fn line_up() -> Vec<FilterSpec> {
    vec![
        FilterSpec::lmp(0.02, 1.2).unwrap(),
        FilterSpec::mcc(0.02, 2.0).unwrap(),
        FilterSpec::zalms(0.02, 1e-4).unwrap(),
        FilterSpec::rzamcc(0.02, 6e-4, 2.0, 10.0).unwrap(),
        FilterSpec::cimmcc(0.02, 1e-4, 2.0, 0.01).unwrap(),
    ]
}

#[test]
fn every_filter_sees_the_same_first_error() {
    let cfg = config(line_up(), mixed(), 300, 3);
    for trial in 0..cfg.trials {
        let mut first_errors = Vec::new();
        for (k, spec) in cfg.filters.iter().enumerate() {
            // replay the documented stream layout and compare against run_trial
            let mut f = FilterState::new(*spec, 20, None).unwrap();
            let mut regressors = cfg.input.stream();
            let mut input_rng = trial_stream(cfg.base_seed, trial, StreamRole::Input);
            let mut noise_rng = trial_stream(cfg.base_seed, trial, StreamRole::Noise);
            let mut curve = Vec::new();
            for n in 1..=cfg.iterations {
                let x = regressors.next_regressor(&mut input_rng);
                let truth = cfg.schedule.taps_at(n);
                let d = observe(truth, x, cfg.noise.sample(&mut noise_rng)).unwrap();
                let e = f.step(x, d).unwrap();
                if n == 1 {
                    first_errors.push(e);
                }
                curve.push(sparse_mcc::experiments::msd(f.weights(), truth).unwrap());
            }
            assert_eq!(run_trial(&cfg, k, trial).unwrap().msd(), &curve[..]);
        }
        assert!(first_errors.windows(2).all(|p| p[0] == p[1]), "{first_errors:?}");
    }
}

#[test]
fn a_filter_result_does_not_depend_on_its_neighbours() {
    let cimmcc = FilterSpec::cimmcc(0.02, 1e-4, 2.0, 0.01).unwrap();
    let alone = run_monte_carlo(&config(vec![cimmcc], mixed(), 500, 4)).unwrap();
    let crowd = run_monte_carlo(&config(line_up(), mixed(), 500, 4)).unwrap();
    assert_eq!(alone.filters[0], crowd.filters[4]);
}

#[test]
fn aggregate_is_independent_of_thread_count() {
    let cfg = config(line_up(), mixed(), 400, 6);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_monte_carlo(&cfg).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
    assert_eq!(one, run_monte_carlo(&cfg).unwrap());
}

#[test]
fn two_trial_aggregation_matches_hand_computation() {
    let cfg = config(vec![FilterSpec::mcc(0.02, 2.0).unwrap()], mixed(), 200, 2);
    let a = run_trial(&cfg, 0, 0).unwrap();
    let b = run_trial(&cfg, 0, 1).unwrap();
    let agg = &run_monte_carlo(&cfg).unwrap().filters[0];
    let mean = agg.mean_msd.as_ref().unwrap();
    let std = agg.std_msd.as_ref().unwrap();
    for k in 0..200 {
        let (p, q) = (a.msd()[k], b.msd()[k]);
        assert_eq!(mean[k], (p + q) / 2.0);
        let m = (p + q) / 2.0;
        let s = (((p - m) * (p - m) + (q - m) * (q - m)) / 2.0).sqrt();
        assert!((std[k] - s).abs() <= 1e-15 * s.max(1e-300));
    }
    let tail = |c: &[f64]| c[180..].iter().sum::<f64>() / 20.0;
    let expected_db = 10.0 * ((tail(a.msd()) + tail(b.msd())) / 2.0).log10();
    assert!((agg.steady_state_msd.unwrap() - expected_db).abs() < 1e-9);
    assert_eq!(agg.diverged_trials, 0);
}

#[test]
fn diverged_trials_are_counted_not_averaged() {
    let msd = |v: f64| vec![v; 4];
    let outcomes = vec![
        TrialOutcome::Completed { msd: msd(1.0), final_weights: vec![0.0; 20] },
        TrialOutcome::Diverged { iteration: 3, msd: vec![5.0, 6.0] },
        TrialOutcome::Completed { msd: msd(3.0), final_weights: vec![0.0; 20] },
    ];
    let mut cfg = config(vec![FilterSpec::lms(0.1).unwrap()], NoiseModel::None, 4, 3);
    cfg.msd_window = 2;
    cfg.msd_scale = MsdScale::Linear;
    let agg = aggregate(Algorithm::Lms, &outcomes, &cfg).unwrap();
    assert_eq!(agg.diverged_trials, 1);
    assert_eq!(agg.first_divergence, Some(3));
    assert_eq!(agg.mean_msd.as_deref(), Some(&[2.0; 4][..]));
    assert_eq!(agg.steady_state_msd, Some(2.0));

    cfg.clamp = Some(10.0);
    let clamped = aggregate(Algorithm::Lms, &outcomes, &cfg).unwrap();
    assert_eq!(clamped.mean_msd.as_deref(), Some(&[3.0, 10.0 / 3.0, 14.0 / 3.0, 14.0 / 3.0][..]));

    let all_bad = vec![TrialOutcome::Diverged { iteration: 1, msd: vec![] }];
    cfg.clamp = None;
    cfg.trials = 1;
    let none = aggregate(Algorithm::Lms, &all_bad, &cfg).unwrap();
    assert_eq!(none.steady_state_msd, None);
    assert_eq!(none.diverged_trials, 1);
}

#[test]
fn zalms_is_unstable_under_alpha_stable_noise() {
    let noise = NoiseModel::AlphaStable(AlphaStableParams::symmetric(1.2, 0.2).unwrap());
    let filters = vec![
        FilterSpec::zalms(0.02, 1e-4).unwrap(),
        FilterSpec::mcc(0.02, 2.0).unwrap(),
        FilterSpec::zamcc(0.02, 1e-4, 2.0).unwrap(),
        FilterSpec::cimmcc(0.02, 1e-4, 2.0, 0.01).unwrap(),
    ];
    let r = run_monte_carlo(&config(filters, noise, 2000, 20)).unwrap();
    let zalms = &r.filters[0];
    let worst_mcc = r.filters[1..].iter().map(|f| f.window_msd(1500, 2000).unwrap()).fold(0.0, f64::max);
    assert!(zalms.diverged_trials > 0 || zalms.window_msd(1500, 2000).unwrap() > worst_mcc);
}

#[test]
fn mean_final_weights_stay_bounded() {
    let cfg = config(line_up(), mixed(), 4000, 10);
    let truth_norm = cfg.schedule.taps_at(4000).norm();
    for f in run_monte_carlo(&cfg).unwrap().filters {
        let w = f.mean_final_weights.unwrap();
        assert!(w.iter().all(|v| v.is_finite()));
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm <= 2.0 * truth_norm, "{}: {norm}", f.algorithm);
    }
}

#[test]
fn same_seed_same_bytes() {
    let cfg = config(line_up(), mixed(), 300, 3);
    assert_eq!(run_trial(&cfg, 4, 2).unwrap(), run_trial(&cfg, 4, 2).unwrap());
    let mut other = cfg.clone();
    other.base_seed += 1;
    assert_ne!(run_trial(&cfg, 4, 2).unwrap(), run_trial(&other, 4, 2).unwrap());
}

#[test]
fn bound_matches_gaussian_closed_form() {
    let (s, sigma1) = (1.5f64, 2.0f64);
    let noise = NoiseModel::MixedGaussian(MixedGaussianParams::new(0.0, 0.0, s * s, 1.0, 0.0).unwrap());
    let b = step_size_bound(
        &noise,
        KernelWidth::new(sigma1).unwrap(),
        20,
        1.0,
        200_000,
        &mut shared_stream(5, StreamRole::Bound),
    )
    .unwrap();
    let ef = 1.0 / (1.0 + s * s / (sigma1 * sigma1)).sqrt();
    let ef2 = 1.0 / (1.0 + 2.0 * s * s / (sigma1 * sigma1)).sqrt();
    let want = 2.0 / (22.0 * ef);
    assert!((b.conservative - want).abs() < 3.0 * b.conservative_se, "{b:?} vs {want}");
    let want_full = 2.0 * ef / (22.0 * ef2);
    assert!((b.full - want_full).abs() < 3.0 * b.full_se.max(1e-12), "{b:?} vs {want_full}");
    assert!(b.full <= b.conservative);
}

#[test]
fn bound_rejects_too_few_samples() {
    let w = KernelWidth::new(2.0).unwrap();
    assert!(step_size_bound(&NoiseModel::None, w, 20, 1.0, 1000, &mut shared_stream(0, StreamRole::Bound)).is_err());
}

#[test]
fn window_mean_matches_arithmetic_mean() {
    let curve: Vec<f64> = (1..=50).map(|k| (k as f64).sqrt()).collect();
    let direct = curve[9..30].iter().sum::<f64>() / 21.0;
    assert_eq!(window_mean(&curve, 10, 30).unwrap(), direct);
}
