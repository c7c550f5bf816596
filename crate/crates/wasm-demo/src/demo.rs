//! Plain-Rust logic behind the browser page, testable natively.

use sparse_mcc::experiments::run_monte_carlo;
use sparse_mcc::filters::{cim_attractor, cim_attractor_bound};
use sparse_mcc::rng::{shared_stream, StreamRole};
use sparse_mcc::{
    Algorithm, AlphaStableParams, ChannelSchedule, ExperimentConfig, FilterParams, FilterSpec, InputKind,
    InputProcess, KernelWidth, MixedGaussianParams, MsdScale, NoiseModel,
};

/// Filters drawn on the MSD plot, in order.
pub const CURVE_FILTERS: [Algorithm; 5] = [
    Algorithm::Zalms,
    Algorithm::Mcc,
    Algorithm::Zamcc,
    Algorithm::Rzamcc,
    Algorithm::Cimmcc,
];

const MAX_WORK: u64 = 50_000_000;

/// Builds a noise model from the page's two numeric inputs.
///
/// `mixed`: `a` is the outlier probability, `b` the outlier variance.
/// `stable`: `a` is alpha, `b` is gamma.
pub fn noise(kind: &str, a: f64, b: f64) -> Result<NoiseModel, String> {
    let model = match kind {
        "mixed" => NoiseModel::MixedGaussian(MixedGaussianParams::new(0.0, 0.0, 0.0001, b, a).map_err(|e| e.to_string())?),
        "stable" => NoiseModel::AlphaStable(AlphaStableParams::symmetric(a, b).map_err(|e| e.to_string())?),
        "none" => NoiseModel::None,
        other => return Err(format!("unknown noise kind `{other}`")),
    };
    Ok(model)
}

/// Mean MSD in dB for each of [`CURVE_FILTERS`] on the 20-tap
/// time-varying channel, concatenated filter by filter. Iterations where
/// every trial of a filter diverged are NaN.
pub fn msd_curves(noise: NoiseModel, mu: f64, rho: f64, iterations: u64, trials: u64, seed: u64) -> Result<Vec<f64>, String> {
    if iterations * trials * CURVE_FILTERS.len() as u64 > MAX_WORK {
        return Err(format!("iterations × trials is too large for the page (limit {})", MAX_WORK / 5));
    }
    let params = FilterParams {
        mu,
        rho: Some(rho),
        sigma1: Some(2.0),
        sigma2: Some(0.01),
        delta_prime: Some(10.0),
        p: Some(1.2),
    };
    let filters = CURVE_FILTERS
        .iter()
        .map(|a| FilterSpec::new(*a, &params))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let config = ExperimentConfig {
        filters,
        noise,
        schedule: ChannelSchedule::paper_tv20(),
        input: InputProcess::new(InputKind::WhiteGaussian { variance: 1.0 }, 20).map_err(|e| e.to_string())?,
        iterations,
        trials,
        base_seed: seed,
        msd_window: ExperimentConfig::default_window(iterations),
        msd_scale: MsdScale::Db,
        clamp: None,
    };
    let result = run_monte_carlo(&config).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(iterations as usize * CURVE_FILTERS.len());
    for f in &result.filters {
        match &f.mean_msd {
            Some(mean) => out.extend(mean.iter().map(|v| MsdScale::Db.apply(*v))),
            None => out.extend(std::iter::repeat_n(f64::NAN, iterations as usize)),
        }
    }
    Ok(out)
}

/// Per-tap sparsity penalties on a grid of `points` values of w in
/// `[-half_range, half_range]`, as rows `[w, cim_penalty, l0, attractor]`
/// flattened. `cim_penalty` is the CIM-based ℓ₀ surrogate of a single tap
/// and the attractor is scaled so its peak is 1.
pub fn cim_profile(sigma2: f64, half_range: f64, points: usize) -> Result<Vec<f64>, String> {
    let width = KernelWidth::new(sigma2).map_err(|e| e.to_string())?;
    if !(half_range.is_finite() && half_range > 0.0) || points < 2 {
        return Err("need a positive range and at least two points".into());
    }
    let bound = cim_attractor_bound(1, width);
    let mut out = Vec::with_capacity(points * 4);
    for i in 0..points {
        let w = -half_range + 2.0 * half_range * i as f64 / (points - 1) as f64;
        let penalty = 1.0 - width.unnormalized(w);
        let l0 = if w == 0.0 { 0.0 } else { 1.0 };
        let attr = cim_attractor(&[w], width)[0] / bound;
        out.extend([w, penalty, l0, attr]);
    }
    Ok(out)
}

/// Density histogram of `samples` noise draws over `[lo, hi)`, followed by
/// the fraction of draws that fell outside the range.
pub fn noise_histogram(noise: NoiseModel, samples: usize, bins: usize, lo: f64, hi: f64, seed: u64) -> Result<Vec<f64>, String> {
    if bins == 0 || lo.is_nan() || hi.is_nan() || lo >= hi || samples == 0 {
        return Err("need bins > 0, samples > 0 and lo < hi".into());
    }
    let mut counts = vec![0u64; bins];
    let mut outside = 0u64;
    let width = (hi - lo) / bins as f64;
    let mut rng = shared_stream(seed, StreamRole::Noise);
    for _ in 0..samples {
        let v = noise.sample(&mut rng);
        if v >= lo && v < hi {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        } else {
            outside += 1;
        }
    }
    let n = samples as f64;
    let mut out: Vec<f64> = counts.iter().map(|c| *c as f64 / (n * width)).collect();
    out.push(outside as f64 / n);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_have_one_block_per_filter() {
        let c = msd_curves(noise("mixed", 0.05, 20.0).unwrap(), 0.02, 1e-4, 300, 3, 1).unwrap();
        assert_eq!(c.len(), 5 * 300);
        // every filter starts from zero weights against a unit-norm channel
        assert!(c.iter().all(|v| v.is_finite() || v.is_nan()));
        let cim_tail = c[4 * 300 + 299];
        assert!(cim_tail < -10.0, "{cim_tail}");
    }

    #[test]
    fn curves_are_reproducible() {
        let n = noise("stable", 1.2, 0.2).unwrap();
        assert_eq!(
            msd_curves(n, 0.02, 1e-4, 200, 2, 9).unwrap().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            msd_curves(n, 0.02, 1e-4, 200, 2, 9).unwrap().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(noise("laplace", 1.0, 1.0).is_err());
        assert!(noise("stable", 2.5, 1.0).is_err());
        assert!(msd_curves(NoiseModel::None, -1.0, 0.0, 10, 1, 0).is_err());
        assert!(msd_curves(NoiseModel::None, 0.02, 0.0, 10_000_000, 100, 0).is_err());
        assert!(cim_profile(0.0, 1.0, 10).is_err());
        assert!(noise_histogram(NoiseModel::None, 10, 0, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn cim_profile_shape() {
        let p = cim_profile(0.1, 1.0, 201).unwrap();
        let rows: Vec<&[f64]> = p.chunks(4).collect();
        assert_eq!(rows.len(), 201);
        let mid = rows[100];
        assert_eq!(mid[0], 0.0);
        assert_eq!((mid[1], mid[2], mid[3]), (0.0, 0.0, 0.0));
        // far from zero the surrogate saturates at the true count
        assert!((rows[0][1] - 1.0).abs() < 1e-12);
        let peak = rows.iter().map(|r| r[3].abs()).fold(0.0, f64::max);
        assert!(peak <= 1.0 + 1e-12 && peak > 0.99);
    }

    #[test]
    fn histogram_integrates_to_one() {
        let h = noise_histogram(noise("mixed", 0.05, 20.0).unwrap(), 100_000, 50, -5.0, 5.0, 3).unwrap();
        let (density, outside) = h.split_at(50);
        let mass: f64 = density.iter().sum::<f64>() * 0.2 + outside[0];
        assert!((mass - 1.0).abs() < 1e-9);
        assert!(outside[0] > 0.0);
    }
}
