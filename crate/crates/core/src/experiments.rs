//! Seeded Monte Carlo experiments over adaptive filters.
//!
//! A trial is fully determined by `(base_seed, trial_index)`: the input and
//! noise streams do not depend on which filter is running, so every filter
//! in a config sees the same `(X(n), v(n))` sequence within a trial.
//! Aggregates are reduced in trial order, which makes them independent of
//! how trials were scheduled across threads.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{observe, ChannelSchedule, InputProcess};
use crate::error::{check_len, Error, Result};
use crate::filters::{Algorithm, FilterSpec, FilterState, StepError};
use crate::kernels::KernelWidth;
use crate::noise::NoiseModel;
use crate::rng::{trial_stream, StreamRole};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MsdScale {
    #[default]
    Linear,
    Db,
}

impl MsdScale {
    pub fn apply(self, linear: f64) -> f64 {
        match self {
            MsdScale::Linear => linear,
            // floored so an exact zero reads as a very small dB value, not -inf
            MsdScale::Db => 10.0 * linear.max(f64::MIN_POSITIVE).log10(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Filters compared on identical data streams.
    pub filters: Vec<FilterSpec>,
    pub noise: NoiseModel,
    pub schedule: ChannelSchedule,
    pub input: InputProcess,
    pub iterations: u64,
    pub trials: u64,
    pub base_seed: u64,
    /// Number of trailing iterations averaged into the steady-state MSD.
    pub msd_window: u64,
    pub msd_scale: MsdScale,
    /// When set, diverged trials stay in the averages with their MSD capped
    /// at this value (and held at the cap after the divergence).
    pub clamp: Option<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.filters.is_empty() {
            return Err(Error::Empty("filters"));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("iterations", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if self.msd_window == 0 || self.msd_window > self.iterations {
            return Err(Error::invalid(
                "msd_window",
                format!("must lie in 1..={}, got {}", self.iterations, self.msd_window),
            ));
        }
        if let Some(cap) = self.clamp {
            if !(cap.is_finite() && cap > 0.0) {
                return Err(Error::invalid("clamp", format!("cap must be positive, got {cap}")));
            }
        }
        self.noise.validate()?;
        self.input.kind.validate()?;
        check_len(self.schedule.taps_len(), self.input.taps)
    }

    pub fn taps(&self) -> usize {
        self.schedule.taps_len()
    }

    /// Default steady-state window: the final 10% of the run.
    pub fn default_window(iterations: u64) -> u64 {
        (iterations / 10).max(1)
    }
}

/// Squared deviation `‖truth - estimate‖²`.
pub fn msd(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    check_len(truth.len(), estimate.len())?;
    Ok(estimate.iter().zip(truth).map(|(w, t)| (t - w) * (t - w)).sum())
}

/// Result of one filter on one trial. `msd[k]` is the deviation after the
/// `(k+1)`-th update.
#[derive(Debug, Clone, PartialEq)]
pub enum TrialOutcome {
    Completed { msd: Vec<f64>, final_weights: Vec<f64> },
    /// `msd` holds the deviations recorded before the failing update.
    Diverged { iteration: u64, msd: Vec<f64> },
}

impl TrialOutcome {
    pub fn msd(&self) -> &[f64] {
        match self {
            TrialOutcome::Completed { msd, .. } | TrialOutcome::Diverged { msd, .. } => msd,
        }
    }

    pub fn is_diverged(&self) -> bool {
        matches!(self, TrialOutcome::Diverged { .. })
    }
}

pub fn run_trial(config: &ExperimentConfig, filter_index: usize, trial_index: u64) -> Result<TrialOutcome> {
    let spec = *config.filters.get(filter_index).ok_or_else(|| {
        Error::invalid("filter_index", format!("{filter_index} out of range"))
    })?;
    if trial_index >= config.trials {
        return Err(Error::invalid("trial_index", format!("{trial_index} out of range")));
    }
    let m = config.taps();
    let mut filter = FilterState::new(spec, m, None)?;
    let mut regressors = config.input.stream();
    let mut input_rng = trial_stream(config.base_seed, trial_index, StreamRole::Input);
    let mut noise_rng = trial_stream(config.base_seed, trial_index, StreamRole::Noise);
    let mut curve = Vec::with_capacity(config.iterations as usize);

    for n in 1..=config.iterations {
        let x = regressors.next_regressor(&mut input_rng);
        let v = config.noise.sample(&mut noise_rng);
        let truth = config.schedule.taps_at(n);
        let d = observe(truth, x, v)?;
        match filter.step(x, d) {
            Ok(_) => {}
            Err(StepError::Diverged(div)) => {
                return Ok(TrialOutcome::Diverged {
                    iteration: div.iteration,
                    msd: curve,
                })
            }
            Err(StepError::Input(e)) => return Err(e),
        }
        let dev = msd(filter.weights(), truth)?;
        if !dev.is_finite() {
            return Ok(TrialOutcome::Diverged { iteration: n, msd: curve });
        }
        curve.push(dev);
    }
    Ok(TrialOutcome::Completed {
        msd: curve,
        final_weights: filter.weights().to_vec(),
    })
}

/// Per-filter summary over all trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterAggregate {
    pub algorithm: Algorithm,
    pub trials: u64,
    pub diverged_trials: u64,
    /// Earliest divergence iteration among diverged trials.
    pub first_divergence: Option<u64>,
    /// `None` when no trial contributed (all diverged, no clamp).
    pub mean_msd: Option<Vec<f64>>,
    pub std_msd: Option<Vec<f64>>,
    /// Mean of `mean_msd` over the steady-state window, in `msd_scale` units.
    pub steady_state_msd: Option<f64>,
    /// Spread across trials of each trial's window-averaged MSD (linear).
    pub steady_state_std: Option<f64>,
    /// Average final weight vector over completed trials.
    pub mean_final_weights: Option<Vec<f64>>,
}

impl FilterAggregate {
    /// Linear mean of `mean_msd` over iterations `start..=end` (1-based).
    pub fn window_msd(&self, start: u64, end: u64) -> Option<f64> {
        let mean = self.mean_msd.as_ref()?;
        window_mean(mean, start, end).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateResult {
    pub iterations: u64,
    pub msd_window: u64,
    pub msd_scale: MsdScale,
    pub filters: Vec<FilterAggregate>,
}

/// Runs every `(filter, trial)` pair and aggregates by filter.
pub fn run_monte_carlo(config: &ExperimentConfig) -> Result<AggregateResult> {
    config.validate()?;
    let nf = config.filters.len();
    let nt = config.trials as usize;
    let work = |k: usize| run_trial(config, k / nt, (k % nt) as u64);

    #[cfg(feature = "parallel")]
    let outcomes: Vec<TrialOutcome> = {
        use rayon::prelude::*;
        (0..nf * nt).into_par_iter().map(work).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<TrialOutcome> = (0..nf * nt).map(work).collect::<Result<_>>()?;

    let filters = outcomes
        .chunks(nt)
        .zip(&config.filters)
        .map(|(trials, spec)| aggregate(spec.algorithm(), trials, config))
        .collect::<Result<_>>()?;
    Ok(AggregateResult {
        iterations: config.iterations,
        msd_window: config.msd_window,
        msd_scale: config.msd_scale,
        filters,
    })
}

/// Order-dependent reduction of one filter's trials (in trial order).
pub fn aggregate(algorithm: Algorithm, outcomes: &[TrialOutcome], config: &ExperimentConfig) -> Result<FilterAggregate> {
    let len = config.iterations as usize;
    let diverged: Vec<u64> = outcomes
        .iter()
        .filter_map(|o| match o {
            TrialOutcome::Diverged { iteration, .. } => Some(*iteration),
            _ => None,
        })
        .collect();

    let curves: Vec<Vec<f64>> = match config.clamp {
        Some(cap) => outcomes
            .iter()
            .map(|o| {
                let mut c: Vec<f64> = o.msd().iter().map(|v| v.min(cap)).collect();
                c.resize(len, cap);
                c
            })
            .collect(),
        None => outcomes
            .iter()
            .filter(|o| !o.is_diverged())
            .map(|o| o.msd().to_vec())
            .collect(),
    };

    let finals: Vec<&Vec<f64>> = outcomes
        .iter()
        .filter_map(|o| match o {
            TrialOutcome::Completed { final_weights, .. } => Some(final_weights),
            _ => None,
        })
        .collect();
    let mean_final_weights = (!finals.is_empty()).then(|| {
        let mut acc = vec![0.0; finals[0].len()];
        for w in &finals {
            acc.iter_mut().zip(w.iter()).for_each(|(a, v)| *a += v);
        }
        acc.iter_mut().for_each(|a| *a /= finals.len() as f64);
        acc
    });

    let (mean_msd, std_msd, steady_state_msd, steady_state_std) = if curves.is_empty() {
        (None, None, None, None)
    } else {
        let (mean, std) = mean_std_columns(&curves, len);
        let window = config.msd_window as usize;
        let per_trial: Vec<f64> = curves
            .iter()
            .map(|c| c[len - window..].iter().sum::<f64>() / window as f64)
            .collect();
        let (_, ss_std) = mean_std(&per_trial);
        let ss = steady_state_msd(&mean, config.msd_window, config.msd_scale)?;
        (Some(mean), Some(std), Some(ss), Some(ss_std))
    };

    Ok(FilterAggregate {
        algorithm,
        trials: outcomes.len() as u64,
        diverged_trials: diverged.len() as u64,
        first_divergence: diverged.iter().copied().min(),
        mean_msd,
        std_msd,
        steady_state_msd,
        steady_state_std,
        mean_final_weights,
    })
}

/// Per-column mean and population standard deviation.
fn mean_std_columns(curves: &[Vec<f64>], len: usize) -> (Vec<f64>, Vec<f64>) {
    let k = curves.len() as f64;
    let mut mean = vec![0.0; len];
    for c in curves {
        mean.iter_mut().zip(c).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= k);
    let mut var = vec![0.0; len];
    for c in curves {
        var.iter_mut()
            .zip(c.iter().zip(&mean))
            .for_each(|(s, (v, m))| *s += (v - m) * (v - m));
    }
    let std = var.into_iter().map(|s| (s / k).sqrt()).collect();
    (mean, std)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / k;
    (mean, var.sqrt())
}

/// Mean of the last `window` entries, optionally in dB.
pub fn steady_state_msd(mean_msd: &[f64], window: u64, scale: MsdScale) -> Result<f64> {
    let window = window as usize;
    if window == 0 || window > mean_msd.len() {
        return Err(Error::invalid(
            "msd_window",
            format!("must lie in 1..={}, got {window}", mean_msd.len()),
        ));
    }
    let tail = &mean_msd[mean_msd.len() - window..];
    Ok(scale.apply(tail.iter().sum::<f64>() / window as f64))
}

/// Linear mean over iterations `start..=end` (1-based, inclusive).
pub fn window_mean(curve: &[f64], start: u64, end: u64) -> Result<f64> {
    if start == 0 || start > end || end as usize > curve.len() {
        return Err(Error::invalid(
            "window",
            format!("[{start}, {end}] is not inside 1..={}", curve.len()),
        ));
    }
    let slice = &curve[start as usize - 1..end as usize];
    Ok(slice.iter().sum::<f64>() / slice.len() as f64)
}

/// Monte Carlo estimate of the mean-square step-size bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepSizeBound {
    /// `2 / ((M+2) E[f] σx²)`.
    pub conservative: f64,
    pub conservative_se: f64,
    /// `2 E[f] / ((M+2) E[f²] σx²)`.
    pub full: f64,
    pub full_se: f64,
    pub mean_f: f64,
    pub mean_f2: f64,
    pub samples: u64,
}

pub const MIN_BOUND_SAMPLES: u64 = 10_000;

/// Estimates the step-size bounds with `f(v) = exp(-v²/2σ₁²)` averaged over
/// noise draws. Standard errors come from the delta method.
pub fn step_size_bound<R: Rng + ?Sized>(
    noise: &NoiseModel,
    sigma1: KernelWidth,
    m: usize,
    input_variance: f64,
    samples: u64,
    rng: &mut R,
) -> Result<StepSizeBound> {
    if samples < MIN_BOUND_SAMPLES {
        return Err(Error::invalid(
            "samples",
            format!("at least {MIN_BOUND_SAMPLES} noise draws are needed, got {samples}"),
        ));
    }
    if !(input_variance.is_finite() && input_variance > 0.0) {
        return Err(Error::invalid("input_variance", format!("must be positive, got {input_variance}")));
    }
    if m == 0 {
        return Err(Error::invalid("M", "filter order must be at least 1"));
    }
    noise.validate()?;

    let n = samples as f64;
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..samples {
        let f = sigma1.unnormalized(noise.sample(rng));
        let f2 = f * f;
        s1 += f;
        s2 += f2;
        s3 += f2 * f;
        s4 += f2 * f2;
    }
    let ef = s1 / n;
    let ef2 = s2 / n;
    let var_f = (ef2 - ef * ef).max(0.0);
    let var_f2 = (s4 / n - ef2 * ef2).max(0.0);
    let cov = s3 / n - ef * ef2;

    let c = 2.0 / ((m as f64 + 2.0) * input_variance);
    let conservative = c / ef;
    let full = c * ef / ef2;
    let conservative_se = c / (ef * ef) * (var_f / n).sqrt();
    // gradient of c·a/b at (E[f], E[f²])
    let (ga, gb) = (c / ef2, -c * ef / (ef2 * ef2));
    let full_var = (ga * ga * var_f + gb * gb * var_f2 + 2.0 * ga * gb * cov) / n;
    Ok(StepSizeBound {
        conservative,
        conservative_se,
        full,
        full_se: full_var.max(0.0).sqrt(),
        mean_f: ef,
        mean_f2: ef2,
        samples,
    })
}
