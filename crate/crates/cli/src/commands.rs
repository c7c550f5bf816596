use std::path::{Path, PathBuf};

use serde::Serialize;
use sparse_mcc::experiments::{run_monte_carlo, step_size_bound, StepSizeBound};
use sparse_mcc::rng::{shared_stream, StreamRole};
use sparse_mcc::{AggregateResult, Algorithm, KernelWidth, NoiseModel};

use crate::config::{self, NuReading, Overrides, Plan, RawChannel, RawConfig, RawFilter};
use crate::error::CliError;
use crate::output;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub overrides: Overrides,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config_digest: String,
    pub tool_version: String,
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub base_seed: u64,
    /// Seed that generated the echo path, for `echo` runs.
    pub channel_seed: Option<u64>,
    pub threads: Option<usize>,
    pub started: String,
    pub finished: String,
    /// Paths relative to the output directory.
    pub outputs: Vec<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub plan: Plan,
    pub results: Vec<AggregateResult>,
    pub manifest: Manifest,
}

impl RunReport {
    /// `(label, steady-state MSD)` for the first (or only) run.
    pub fn summary(&self) -> Vec<(String, Option<f64>)> {
        self.plan.runs[0]
            .labels
            .iter()
            .zip(&self.results[0].filters)
            .map(|(l, f)| (l.clone(), f.steady_state_msd))
            .collect()
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Runs every planned experiment, on a dedicated pool when `threads` is set.
pub fn execute(plan: &Plan, threads: Option<usize>) -> Result<Vec<AggregateResult>, CliError> {
    let go = || -> Result<Vec<AggregateResult>, CliError> {
        plan.runs
            .iter()
            .map(|r| run_monte_carlo(&r.experiment).map_err(CliError::from))
            .collect()
    };
    match threads {
        None => go(),
        Some(0) => Err(CliError::config("--threads", "must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config("--threads", e.to_string()))?
            .install(go),
    }
}

fn write_outputs(plan: &Plan, results: &[AggregateResult], out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    let mut put = |rel: PathBuf, body: String| -> Result<(), CliError> {
        output::write_atomic(&out.join(&rel), body.as_bytes())?;
        files.push(rel);
        Ok(())
    };

    let with_series = plan.resolved.sweep.as_ref().is_some_and(|s| s.series.is_some());
    let mut sweep = output::sweep_header(with_series);
    for (run, result) in plan.runs.iter().zip(results) {
        let dir = PathBuf::from(run.dir_name());
        for (label, agg) in run.labels.iter().zip(&result.filters) {
            put(
                dir.join(format!("msd_{label}.csv")),
                output::msd_csv(agg, result.iterations, result.msd_scale),
            )?;
        }
        put(dir.join("summary.csv"), output::summary_csv(&run.labels, &result.filters))?;
        let values: Vec<f64> = run.point.iter().map(|(_, v)| *v).collect();
        sweep.push_str(&output::sweep_rows(&values, &run.labels, &result.filters));
    }
    if plan.resolved.sweep.is_some() {
        put(PathBuf::from("sweep.csv"), sweep)?;
    }
    if let Some(response) = plan.resolved.echo_response() {
        let mut body = String::from("tap,weight\n");
        for (i, w) in response.iter().enumerate() {
            body.push_str(&format!("{i},{}\n", output::cell(Some(*w))));
        }
        put(PathBuf::from("channel.csv"), body)?;
    }
    Ok(files)
}

fn run_plan(
    command: &str,
    plan: Plan,
    config_path: Option<&Path>,
    opts: &RunOptions,
) -> Result<RunReport, CliError> {
    let started = now();
    let results = execute(&plan, opts.threads)?;
    let mut outputs = write_outputs(&plan, &results, &opts.out)?;
    outputs.push(PathBuf::from("manifest.json"));
    let manifest = Manifest {
        config_digest: plan.resolved.digest(),
        tool_version: TOOL_VERSION.to_string(),
        command: command.to_string(),
        config_path: config_path.map(Path::to_path_buf),
        base_seed: plan.resolved.seed,
        channel_seed: match &plan.resolved.channel {
            config::ResolvedChannel::SparseEcho { seed, .. } => Some(*seed),
            config::ResolvedChannel::Schedule { .. } => None,
        },
        threads: opts.threads,
        started,
        finished: now(),
        outputs,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    output::write_atomic(&opts.out.join("manifest.json"), format!("{json}\n").as_bytes())?;
    Ok(RunReport {
        plan,
        results,
        manifest,
    })
}

pub fn run_config(raw: &RawConfig, config_path: Option<&Path>, opts: &RunOptions) -> Result<RunReport, CliError> {
    let plan = config::resolve(raw, opts.overrides)?;
    run_plan("run", plan, config_path, opts)
}

pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunReport, CliError> {
    run_config(&config::load(config_path)?, Some(config_path), opts)
}

/// The echo line-up used when an echo config lists no filters.
pub const ECHO_FILTERS: [Algorithm; 4] = [Algorithm::Mcc, Algorithm::Zamcc, Algorithm::Rzamcc, Algorithm::Cimmcc];

pub fn echo_config(raw: &RawConfig, config_path: Option<&Path>, opts: &RunOptions) -> Result<RunReport, CliError> {
    if !matches!(raw.channel, Some(RawChannel::SparseEcho { .. })) {
        return Err(CliError::config(
            "channel.kind",
            "the echo command needs `kind = \"sparse-echo\"`",
        ));
    }
    let mut raw = raw.clone();
    if raw.filters.is_empty() {
        raw.filters = ECHO_FILTERS.into_iter().map(RawFilter::new).collect();
    }
    let plan = config::resolve(&raw, opts.overrides)?;
    run_plan("echo", plan, config_path, opts)
}

pub fn echo(config_path: &Path, opts: &RunOptions) -> Result<RunReport, CliError> {
    echo_config(&config::load(config_path)?, Some(config_path), opts)
}

fn bound_for(plan: &Plan, noise: &NoiseModel) -> Result<StepSizeBound, CliError> {
    let b = &plan.resolved.bound;
    let sigma1 = KernelWidth::new(b.sigma1).map_err(|e| match e {
        sparse_mcc::Error::InvalidParameter { reason, .. } => CliError::config("bound.sigma1", reason),
        other => other.into(),
    })?;
    let mut rng = shared_stream(b.seed, StreamRole::Bound);
    step_size_bound(noise, sigma1, b.taps, b.input_variance, b.samples, &mut rng).map_err(|e| match e {
        sparse_mcc::Error::InvalidParameter { name, reason } => {
            let path = match name {
                "M" => "bound.taps".to_string(),
                other => format!("bound.{other}"),
            };
            CliError::config(path, reason)
        }
        other => other.into(),
    })
}

fn bound_lines(prefix: &str, b: &StepSizeBound) -> Vec<(String, String)> {
    [
        ("mu_B_conservative", format!("{:.6}", b.conservative)),
        ("mu_B_conservative_se", format!("{:.6}", b.conservative_se)),
        ("mu_B_full", format!("{:.6}", b.full)),
        ("mu_B_full_se", format!("{:.6}", b.full_se)),
        ("E_f", format!("{:.6}", b.mean_f)),
        ("E_f2", format!("{:.6}", b.mean_f2)),
    ]
    .into_iter()
    .map(|(k, v)| (format!("{prefix}{k}"), v))
    .collect()
}

/// Step-size bounds as `key=value` pairs, in print order.
pub fn bound_config(raw: &RawConfig, both_readings: bool) -> Result<Vec<(String, String)>, CliError> {
    let plan = config::resolve(raw, Overrides::default())?;
    let b = &plan.resolved.bound;
    let mut lines = vec![
        ("M".to_string(), b.taps.to_string()),
        ("sigma1".to_string(), b.sigma1.to_string()),
        ("input_variance".to_string(), b.input_variance.to_string()),
        ("samples".to_string(), b.samples.to_string()),
        ("seed".to_string(), b.seed.to_string()),
    ];
    if both_readings {
        for reading in [NuReading::Variance, NuReading::Std] {
            let noise = config::alternate_noise(raw, reading)?.ok_or_else(|| {
                CliError::config("noise.kind", "--both-variance-readings needs mixed-gaussian noise")
            })?;
            lines.extend(bound_lines(&format!("{}.", reading.name()), &bound_for(&plan, &noise)?));
        }
    } else {
        if let Some(r) = plan.resolved.nu_reading {
            lines.push(("nu_reading".to_string(), r.name().to_string()));
        }
        lines.extend(bound_lines("", &bound_for(&plan, &plan.resolved.noise)?));
    }
    Ok(lines)
}

pub fn bound(config_path: &Path, both_readings: bool) -> Result<Vec<(String, String)>, CliError> {
    bound_config(&config::load(config_path)?, both_readings)
}

/// Digest of the resolved config, as recorded in a run's manifest.
pub fn digest(config_path: &Path, overrides: Overrides) -> Result<String, CliError> {
    Ok(config::resolve(&config::load(config_path)?, overrides)?.resolved.digest())
}
