//! Experiment configuration files.
//!
//! A config is a TOML document with optional `[run]`, `[noise]`, `[channel]`,
//! `[input]`, `[defaults]`, `[[filter]]`, `[sweep]` and `[bound]` sections.
//! Every omitted value falls back to the time-varying 20-tap experiment
//! under mixed-Gaussian noise, so an empty file is a complete config.
//! See `presets/README.md` for the full schema.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sparse_mcc::channels::{make_sparse_echo_channel, Segment};
use sparse_mcc::experiments::ExperimentConfig;
use sparse_mcc::rng::{shared_stream, StreamRole};
use sparse_mcc::{
    Algorithm, AlphaStableParams, ChannelSchedule, Error as CoreError, FilterParams, FilterSpec, InputKind,
    InputProcess, MixedGaussianParams, MsdScale, NoiseModel, TapWeights,
};

use crate::error::CliError;

pub const DEFAULT_ITERATIONS: u64 = 4000;
pub const DEFAULT_TRIALS: u64 = 100;
pub const DEFAULT_SEED: u64 = 20_160_101;
pub const DEFAULT_BOUND_SAMPLES: u64 = 1_000_000;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub run: RawRun,
    pub noise: Option<RawNoise>,
    pub channel: Option<RawChannel>,
    pub input: Option<RawInput>,
    #[serde(default)]
    pub defaults: RawDefaults,
    #[serde(default, rename = "filter")]
    pub filters: Vec<RawFilter>,
    pub sweep: Option<RawSweep>,
    pub bound: Option<RawBound>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRun {
    pub iterations: Option<u64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    /// Steady-state averaging window (trailing iterations).
    pub window: Option<u64>,
    pub scale: Option<MsdScale>,
    /// Keep diverged trials in the averages, capped at this MSD.
    pub clamp: Option<f64>,
}

/// How the `nu1`/`nu2` entries of a mixed-Gaussian noise are read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NuReading {
    #[default]
    Variance,
    Std,
}

impl NuReading {
    pub fn name(self) -> &'static str {
        match self {
            NuReading::Variance => "variance",
            NuReading::Std => "std",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RawNoise {
    None,
    MixedGaussian {
        mu1: Option<f64>,
        mu2: Option<f64>,
        nu1: Option<f64>,
        nu2: Option<f64>,
        theta: Option<f64>,
        nu_reading: Option<NuReading>,
    },
    AlphaStable {
        alpha: f64,
        #[serde(default)]
        beta: f64,
        gamma: f64,
        #[serde(default)]
        delta: f64,
    },
}

impl Default for RawNoise {
    fn default() -> Self {
        RawNoise::MixedGaussian {
            mu1: None,
            mu2: None,
            nu1: None,
            nu2: None,
            theta: None,
            nu_reading: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSegment {
    pub start: u64,
    pub taps: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RawChannel {
    #[default]
    PaperTv20,
    Schedule { segments: Vec<RawSegment> },
    SparseEcho {
        #[serde(default = "default_echo_taps")]
        taps: usize,
        #[serde(default = "default_echo_nonzeros")]
        nonzeros: usize,
        /// Defaults to the run seed.
        seed: Option<u64>,
    },
}

fn default_echo_taps() -> usize {
    1024
}

fn default_echo_nonzeros() -> usize {
    52
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RawInput {
    White {
        #[serde(default = "one")]
        variance: f64,
    },
    /// AR process; give either the stationary `variance` or the
    /// `innovation_variance` (default: stationary variance 1).
    Ar {
        coefficients: Vec<f64>,
        variance: Option<f64>,
        innovation_variance: Option<f64>,
    },
    Constant {
        value: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for RawInput {
    fn default() -> Self {
        RawInput::White { variance: 1.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDefaults {
    pub mu: Option<f64>,
    pub rho: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub delta_prime: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFilter {
    pub algorithm: Algorithm,
    pub label: Option<String>,
    pub mu: Option<f64>,
    pub rho: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub delta_prime: Option<f64>,
    pub p: Option<f64>,
}

impl RawFilter {
    pub fn new(algorithm: Algorithm) -> Self {
        RawFilter {
            algorithm,
            label: None,
            mu: None,
            rho: None,
            sigma1: None,
            sigma2: None,
            delta_prime: None,
            p: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "mu")]
    Mu,
    #[serde(rename = "rho")]
    Rho,
    #[serde(rename = "sigma1")]
    Sigma1,
    #[serde(rename = "sigma2")]
    Sigma2,
    #[serde(rename = "p")]
    P,
    #[serde(rename = "noise.alpha")]
    NoiseAlpha,
    #[serde(rename = "noise.gamma")]
    NoiseGamma,
    #[serde(rename = "noise.theta")]
    NoiseTheta,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Mu => "mu",
            SweepParam::Rho => "rho",
            SweepParam::Sigma1 => "sigma1",
            SweepParam::Sigma2 => "sigma2",
            SweepParam::P => "p",
            SweepParam::NoiseAlpha => "noise.alpha",
            SweepParam::NoiseGamma => "noise.gamma",
            SweepParam::NoiseTheta => "noise.theta",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSeries {
    pub parameter: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub parameter: SweepParam,
    pub values: Vec<f64>,
    /// Optional outer parameter; the sweep is repeated for each value.
    pub series: Option<RawSeries>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBound {
    pub sigma1: Option<f64>,
    pub taps: Option<usize>,
    pub input_variance: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
}

pub fn parse_str(text: &str) -> Result<RawConfig, CliError> {
    let de = toml::de::Deserializer::parse(text).map_err(|e| CliError::config("<document>", e.to_string()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "<document>".to_string() } else { path };
        CliError::config(path, e.into_inner().to_string().trim().to_string())
    })
}

pub fn load(path: &Path) -> Result<RawConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_str(&text)
}

/// The seven-algorithm line-up with per-algorithm zero-attractor weights.
fn default_filters() -> Vec<RawFilter> {
    [
        Algorithm::Lmp,
        Algorithm::Mcc,
        Algorithm::Zalms,
        Algorithm::Rzalms,
        Algorithm::Zamcc,
        Algorithm::Rzamcc,
        Algorithm::Cimmcc,
    ]
    .into_iter()
    .map(RawFilter::new)
    .collect()
}

/// Zero-attractor weight used when neither the filter nor `[defaults]` sets one.
///
/// CIMMCC keeps 1e-4: its attractor has slope ρ/(Mσ₂³√2π) at the origin and
/// zero taps stop being stable once that exceeds 2 (ρ ≈ 1.0e-4 for M = 20,
/// σ₂ = 0.01).
pub fn default_rho(algorithm: Algorithm) -> f64 {
    match algorithm {
        Algorithm::Zamcc | Algorithm::Rzamcc => 0.0006,
        _ => 0.0001,
    }
}

/// One concrete experiment (a single sweep point, or the whole run).
#[derive(Debug, Clone)]
pub struct PlannedRun {
    /// `(parameter, value)` pairs identifying the sweep point, outermost first.
    pub point: Vec<(SweepParam, f64)>,
    pub labels: Vec<String>,
    pub experiment: ExperimentConfig,
}

impl PlannedRun {
    /// Relative output directory for this point (empty for a plain run).
    pub fn dir_name(&self) -> String {
        self.point
            .iter()
            .map(|(p, v)| format!("{}={}", p.name(), v))
            .collect::<Vec<_>>()
            .join("/")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedFilter {
    pub label: String,
    pub algorithm: Algorithm,
    pub params: FilterParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ResolvedChannel {
    Schedule { segments: Vec<Segment> },
    SparseEcho { taps: usize, nonzeros: usize, seed: u64, response: TapWeights },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedBound {
    pub sigma1: f64,
    pub taps: usize,
    pub input_variance: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Every value that influences results, after defaults and overrides.
/// Its JSON form is what the run digest hashes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub iterations: u64,
    pub trials: u64,
    pub seed: u64,
    pub window: u64,
    pub scale: MsdScale,
    pub clamp: Option<f64>,
    pub noise: NoiseModel,
    pub nu_reading: Option<NuReading>,
    pub channel: ResolvedChannel,
    pub input: InputKind,
    pub filters: Vec<ResolvedFilter>,
    pub sweep: Option<RawSweep>,
    pub bound: ResolvedBound,
}

impl ResolvedConfig {
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("resolved config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn echo_response(&self) -> Option<&TapWeights> {
        match &self.channel {
            ResolvedChannel::SparseEcho { response, .. } => Some(response),
            ResolvedChannel::Schedule { .. } => None,
        }
    }
}

/// Fully validated configuration ready to run.
#[derive(Debug, Clone)]
pub struct Plan {
    pub resolved: ResolvedConfig,
    pub runs: Vec<PlannedRun>,
}

fn field(path: impl Into<String>) -> impl FnOnce(CoreError) -> CliError {
    let path = path.into();
    move |e| match e {
        CoreError::InvalidParameter { name, reason } => {
            let path = if path.ends_with(name) { path } else { format!("{path}.{name}") };
            CliError::config(path, reason)
        }
        other => CliError::config(path, other.to_string()),
    }
}

fn resolve_noise(raw: &RawNoise) -> Result<(NoiseModel, Option<NuReading>), CliError> {
    match *raw {
        RawNoise::None => Ok((NoiseModel::None, None)),
        RawNoise::MixedGaussian {
            mu1,
            mu2,
            nu1,
            nu2,
            theta,
            nu_reading,
        } => {
            let reading = nu_reading.unwrap_or_default();
            let nu1 = nu1.unwrap_or(0.0001);
            let nu2 = nu2.unwrap_or(20.0);
            let to_var = |nu: f64| match reading {
                NuReading::Variance => nu,
                NuReading::Std => nu * nu,
            };
            let p = MixedGaussianParams {
                mu1: mu1.unwrap_or(0.0),
                mu2: mu2.unwrap_or(0.0),
                var1: to_var(nu1),
                var2: to_var(nu2),
                theta: theta.unwrap_or(0.05),
            };
            p.validate().map_err(|e| match e {
                CoreError::InvalidParameter { name: "var1", reason } => CliError::config("noise.nu1", reason),
                CoreError::InvalidParameter { name: "var2", reason } => CliError::config("noise.nu2", reason),
                other => field("noise")(other),
            })?;
            Ok((NoiseModel::MixedGaussian(p), Some(reading)))
        }
        RawNoise::AlphaStable {
            alpha,
            beta,
            gamma,
            delta,
        } => {
            let p = AlphaStableParams::new(alpha, beta, gamma, delta).map_err(field("noise"))?;
            Ok((NoiseModel::AlphaStable(p), None))
        }
    }
}

/// Same noise with the other reading of `nu1`/`nu2`; `None` unless mixed-Gaussian.
pub fn alternate_noise(raw: &RawConfig, reading: NuReading) -> Result<Option<NoiseModel>, CliError> {
    match raw.noise.clone().unwrap_or_default() {
        RawNoise::MixedGaussian {
            mu1,
            mu2,
            nu1,
            nu2,
            theta,
            ..
        } => {
            let alt = RawNoise::MixedGaussian {
                mu1,
                mu2,
                nu1,
                nu2,
                theta,
                nu_reading: Some(reading),
            };
            Ok(Some(resolve_noise(&alt)?.0))
        }
        _ => Ok(None),
    }
}

fn resolve_input(raw: &RawInput) -> Result<InputKind, CliError> {
    let kind = match raw {
        RawInput::White { variance } => InputKind::WhiteGaussian { variance: *variance },
        RawInput::Constant { value } => InputKind::Constant { value: *value },
        RawInput::Ar {
            coefficients,
            variance,
            innovation_variance,
        } => match (variance, innovation_variance) {
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    "input",
                    "give either `variance` or `innovation_variance`, not both",
                ))
            }
            (None, Some(iv)) => InputKind::ColoredAr {
                coefficients: coefficients.clone(),
                innovation_variance: *iv,
            },
            (v, None) => {
                let v = v.unwrap_or(1.0);
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::config("input.variance", format!("must be positive, got {v}")));
                }
                InputKind::ar_with_variance(coefficients.clone(), v).map_err(field("input"))?
            }
        },
    };
    kind.validate().map_err(field("input"))?;
    Ok(kind)
}

fn resolve_channel(raw: &RawChannel, seed: u64) -> Result<ResolvedChannel, CliError> {
    match raw {
        RawChannel::PaperTv20 => Ok(ResolvedChannel::Schedule {
            segments: ChannelSchedule::paper_tv20().segments().to_vec(),
        }),
        RawChannel::Schedule { segments } => {
            let segs = segments
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    TapWeights::new(s.taps.clone())
                        .map(|taps| Segment { start: s.start, taps })
                        .map_err(field(format!("channel.segments[{i}].taps")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let schedule = ChannelSchedule::new(segs).map_err(field("channel.segments"))?;
            Ok(ResolvedChannel::Schedule {
                segments: schedule.segments().to_vec(),
            })
        }
        RawChannel::SparseEcho { taps, nonzeros, seed: s } => {
            let seed = s.unwrap_or(seed);
            let response = make_sparse_echo_channel(*taps, *nonzeros, &mut shared_stream(seed, StreamRole::Channel))
                .map_err(field("channel"))?;
            Ok(ResolvedChannel::SparseEcho {
                taps: *taps,
                nonzeros: *nonzeros,
                seed,
                response,
            })
        }
    }
}

fn schedule_of(channel: &ResolvedChannel) -> ChannelSchedule {
    match channel {
        ResolvedChannel::Schedule { segments } => {
            ChannelSchedule::new(segments.clone()).expect("validated during resolution")
        }
        ResolvedChannel::SparseEcho { response, .. } => ChannelSchedule::fixed(response.clone()),
    }
}

fn resolve_filters(raw: &RawConfig) -> Result<Vec<ResolvedFilter>, CliError> {
    let filters = if raw.filters.is_empty() {
        default_filters()
    } else {
        raw.filters.clone()
    };
    let d = &raw.defaults;
    let mut out: Vec<ResolvedFilter> = Vec::with_capacity(filters.len());
    for (i, f) in filters.iter().enumerate() {
        let params = FilterParams {
            mu: f.mu.or(d.mu).unwrap_or(0.02),
            rho: Some(f.rho.or(d.rho).unwrap_or_else(|| default_rho(f.algorithm))),
            sigma1: Some(f.sigma1.or(d.sigma1).unwrap_or(2.0)),
            sigma2: Some(f.sigma2.or(d.sigma2).unwrap_or(0.01)),
            delta_prime: Some(f.delta_prime.or(d.delta_prime).unwrap_or(10.0)),
            p: Some(f.p.or(d.p).unwrap_or(1.2)),
        };
        let spec = FilterSpec::new(f.algorithm, &params).map_err(field(format!("filter[{i}]")))?;
        let label = f.label.clone().unwrap_or_else(|| f.algorithm.name().to_string());
        if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(CliError::config(
                format!("filter[{i}].label"),
                format!("`{label}` must be non-empty and use only [A-Za-z0-9_-]"),
            ));
        }
        if out.iter().any(|o| o.label == label) {
            return Err(CliError::config(
                format!("filter[{i}].label"),
                format!("duplicate label `{label}`; set distinct labels for repeated algorithms"),
            ));
        }
        out.push(ResolvedFilter {
            label,
            algorithm: f.algorithm,
            params: spec.params(),
        });
    }
    Ok(out)
}

fn apply_point(raw: &mut RawConfig, param: SweepParam, value: f64) -> Result<(), CliError> {
    if raw.filters.is_empty() {
        raw.filters = default_filters();
    }
    let set = |raw: &mut RawConfig, pick: fn(&mut RawFilter) -> &mut Option<f64>| {
        raw.filters.iter_mut().for_each(|f| *pick(f) = Some(value));
    };
    match param {
        SweepParam::Mu => set(raw, |f| &mut f.mu),
        SweepParam::Rho => set(raw, |f| &mut f.rho),
        SweepParam::Sigma1 => set(raw, |f| &mut f.sigma1),
        SweepParam::Sigma2 => set(raw, |f| &mut f.sigma2),
        SweepParam::P => set(raw, |f| &mut f.p),
        SweepParam::NoiseAlpha | SweepParam::NoiseGamma => match raw.noise.as_mut() {
            Some(RawNoise::AlphaStable { alpha, gamma, .. }) => {
                if param == SweepParam::NoiseAlpha {
                    *alpha = value;
                } else {
                    *gamma = value;
                }
            }
            _ => {
                return Err(CliError::config(
                    "sweep.parameter",
                    format!("`{param}` needs alpha-stable noise"),
                ))
            }
        },
        SweepParam::NoiseTheta => match raw.noise.get_or_insert_with(RawNoise::default) {
            RawNoise::MixedGaussian { theta, .. } => *theta = Some(value),
            _ => {
                return Err(CliError::config(
                    "sweep.parameter",
                    format!("`{param}` needs mixed-Gaussian noise"),
                ))
            }
        },
    }
    Ok(())
}

struct Point {
    point: Vec<(SweepParam, f64)>,
    raw: RawConfig,
}

fn expand(raw: &RawConfig) -> Result<Vec<Point>, CliError> {
    let Some(sweep) = &raw.sweep else {
        return Ok(vec![Point {
            point: vec![],
            raw: raw.clone(),
        }]);
    };
    if sweep.values.is_empty() {
        return Err(CliError::config("sweep.values", "must list at least one value"));
    }
    let outer: Vec<Option<(SweepParam, f64)>> = match &sweep.series {
        None => vec![None],
        Some(s) if s.values.is_empty() => {
            return Err(CliError::config("sweep.series.values", "must list at least one value"))
        }
        Some(s) if s.parameter == sweep.parameter => {
            return Err(CliError::config("sweep.series.parameter", "must differ from sweep.parameter"))
        }
        Some(s) => s.values.iter().map(|&v| Some((s.parameter, v))).collect(),
    };
    let mut points = Vec::new();
    for o in outer {
        for &v in &sweep.values {
            let mut r = raw.clone();
            let mut point = Vec::new();
            if let Some((p, ov)) = o {
                apply_point(&mut r, p, ov)?;
                point.push((p, ov));
            }
            apply_point(&mut r, sweep.parameter, v)?;
            point.push((sweep.parameter, v));
            points.push(Point { point, raw: r });
        }
    }
    Ok(points)
}

fn map_experiment_error(e: CoreError) -> CliError {
    match e {
        CoreError::InvalidParameter { name, reason } => {
            let path = match name {
                "msd_window" => "run.window".to_string(),
                "iterations" => "run.iterations".to_string(),
                "trials" => "run.trials".to_string(),
                "clamp" => "run.clamp".to_string(),
                other => other.to_string(),
            };
            CliError::config(path, reason)
        }
        CoreError::LengthMismatch { expected, actual } => CliError::config(
            "input",
            format!("regressor length {actual} does not match channel length {expected}"),
        ),
        other => CliError::config("<document>", other.to_string()),
    }
}

/// Applies defaults and overrides, validates everything and expands sweeps.
pub fn resolve(raw: &RawConfig, overrides: Overrides) -> Result<Plan, CliError> {
    let mut raw = raw.clone();
    if let Some(seed) = overrides.seed {
        raw.run.seed = Some(seed);
    }
    if let Some(trials) = overrides.trials {
        raw.run.trials = Some(trials);
    }
    let iterations = raw.run.iterations.unwrap_or(DEFAULT_ITERATIONS);
    let trials = raw.run.trials.unwrap_or(DEFAULT_TRIALS);
    let seed = raw.run.seed.unwrap_or(DEFAULT_SEED);
    let window = raw
        .run
        .window
        .unwrap_or_else(|| ExperimentConfig::default_window(iterations));
    let scale = raw.run.scale.unwrap_or(MsdScale::Db);
    let clamp = raw.run.clamp;

    let (noise, nu_reading) = resolve_noise(&raw.noise.clone().unwrap_or_default())?;
    let channel = resolve_channel(&raw.channel.clone().unwrap_or_default(), seed)?;
    let input = resolve_input(&raw.input.clone().unwrap_or_default())?;
    let filters = resolve_filters(&raw)?;
    let schedule = schedule_of(&channel);
    let taps = schedule.taps_len();

    let b = raw.bound.clone().unwrap_or_default();
    let bound = ResolvedBound {
        sigma1: b.sigma1.or(raw.defaults.sigma1).unwrap_or(2.0),
        taps: b.taps.unwrap_or(taps),
        input_variance: b.input_variance.unwrap_or_else(|| input.variance()),
        samples: b.samples.unwrap_or(DEFAULT_BOUND_SAMPLES),
        seed: b.seed.unwrap_or(seed),
    };

    let mut runs = Vec::new();
    for p in expand(&raw)? {
        let (noise, _) = resolve_noise(&p.raw.noise.clone().unwrap_or_default())
            .map_err(|e| e.with_context(&p.point))?;
        let filters = resolve_filters(&p.raw).map_err(|e| e.with_context(&p.point))?;
        let specs = filters
            .iter()
            .map(|f| FilterSpec::new(f.algorithm, &f.params).expect("validated during resolution"))
            .collect();
        let experiment = ExperimentConfig {
            filters: specs,
            noise,
            schedule: schedule.clone(),
            input: InputProcess {
                kind: input.clone(),
                taps,
            },
            iterations,
            trials,
            base_seed: seed,
            msd_window: window,
            msd_scale: scale,
            clamp,
        };
        experiment.validate().map_err(map_experiment_error)?;
        runs.push(PlannedRun {
            point: p.point,
            labels: filters.into_iter().map(|f| f.label).collect(),
            experiment,
        });
    }

    Ok(Plan {
        resolved: ResolvedConfig {
            iterations,
            trials,
            seed,
            window,
            scale,
            clamp,
            noise,
            nu_reading,
            channel,
            input,
            filters,
            sweep: raw.sweep.clone(),
            bound,
        },
        runs,
    })
}
