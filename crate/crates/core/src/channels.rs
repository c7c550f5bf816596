//! Ground-truth channels and input signals.

use std::ops::Deref;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::filters::dot;

/// A finite, non-empty vector of FIR taps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TapWeights(Vec<f64>);

impl TapWeights {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Empty("taps"));
        }
        if let Some(i) = taps.iter().position(|t| !t.is_finite()) {
            return Err(Error::invalid("taps", format!("entry {i} is not finite")));
        }
        Ok(TapWeights(taps))
    }

    pub fn zeros(m: usize) -> Result<Self> {
        Self::new(vec![0.0; m])
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }
}

impl Deref for TapWeights {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for TapWeights {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        TapWeights::new(v)
    }
}

impl From<TapWeights> for Vec<f64> {
    fn from(t: TapWeights) -> Self {
        t.0
    }
}

/// Fraction of non-zero taps, kept as an exact ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparsityDegree {
    pub nonzero: usize,
    pub taps: usize,
}

impl SparsityDegree {
    pub fn value(self) -> f64 {
        self.nonzero as f64 / self.taps as f64
    }
}

pub fn sparsity_degree(w: &[f64]) -> SparsityDegree {
    SparsityDegree {
        nonzero: w.iter().filter(|&&t| t != 0.0).count(),
        taps: w.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Segment applies to iterations `n > start` (until the next segment).
    pub start: u64,
    pub taps: TapWeights,
}

/// Piecewise-constant time-varying channel.
///
/// Iterations are 1-based; segment `k` covers `start_k < n <= start_{k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct ChannelSchedule {
    segments: Vec<Segment>,
}

impl ChannelSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let first = segments.first().ok_or(Error::Empty("segments"))?;
        if first.start != 0 {
            return Err(Error::invalid("segments", "first segment must start at 0"));
        }
        let m = first.taps.len();
        for pair in segments.windows(2) {
            if pair[1].start <= pair[0].start {
                return Err(Error::invalid("segments", "start iterations must be strictly increasing"));
            }
        }
        for s in &segments {
            check_len(m, s.taps.len())?;
        }
        Ok(ChannelSchedule { segments })
    }

    pub fn fixed(taps: TapWeights) -> Self {
        ChannelSchedule {
            segments: vec![Segment { start: 0, taps }],
        }
    }

    /// The 20-tap channel whose sparsity goes 1/20 → 1/2 → 1 at
    /// iterations 2000 and 3000.
    pub fn paper_tv20() -> Self {
        let mut first = vec![0.0; 20];
        first[9] = 1.0;
        let second = (0..20).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
        let third = (0..20).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let seg = |start, taps| Segment {
            start,
            taps: TapWeights(taps),
        };
        ChannelSchedule {
            segments: vec![seg(0, first), seg(2000, second), seg(3000, third)],
        }
    }

    pub fn taps_len(&self) -> usize {
        self.segments[0].taps.len()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Taps in force at iteration `n` (1-based; `n = 0` is treated as 1).
    pub fn taps_at(&self, n: u64) -> &TapWeights {
        let idx = self.segments.partition_point(|s| s.start < n.max(1));
        &self.segments[idx - 1].taps
    }
}

impl TryFrom<Vec<Segment>> for ChannelSchedule {
    type Error = Error;

    fn try_from(segments: Vec<Segment>) -> Result<Self> {
        ChannelSchedule::new(segments)
    }
}

impl From<ChannelSchedule> for Vec<Segment> {
    fn from(s: ChannelSchedule) -> Self {
        s.segments
    }
}

/// Random sparse echo path with exactly `nonzeros` non-zero taps and unit
/// energy. About three quarters of the non-zero taps fall in the first
/// quarter of the response.
pub fn make_sparse_echo_channel<R: Rng + ?Sized>(m: usize, nonzeros: usize, rng: &mut R) -> Result<TapWeights> {
    if m == 0 {
        return Err(Error::invalid("taps", "echo path length must be at least 1"));
    }
    if nonzeros == 0 || nonzeros > m {
        return Err(Error::invalid(
            "nonzeros",
            format!("must lie in 1..={m}, got {nonzeros}"),
        ));
    }
    let active_len = (m / 4).max(1);
    let in_active = ((nonzeros as f64 * 0.75).round() as usize).min(active_len);
    let in_tail = nonzeros - in_active;
    let mut positions: Vec<usize> = index::sample(rng, active_len, in_active).into_vec();
    positions.extend(
        index::sample(rng, m - active_len, in_tail)
            .into_iter()
            .map(|i| i + active_len),
    );
    positions.sort_unstable();

    let mut w = vec![0.0; m];
    for &p in &positions {
        let mut v: f64 = StandardNormal.sample(rng);
        while v == 0.0 {
            v = StandardNormal.sample(rng);
        }
        w[p] = v;
    }
    let norm = dot(&w, &w).sqrt();
    w.iter_mut().for_each(|t| *t /= norm);
    TapWeights::new(w)
}

/// Scalar input sequence feeding the regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InputKind {
    WhiteGaussian { variance: f64 },
    /// Deterministic `x_n = value`; consumes no randomness.
    Constant { value: f64 },
    /// `x_n = Σ a_k x_{n-k} + ε_n`, `ε_n ~ N(0, innovation_variance)`.
    ColoredAr {
        coefficients: Vec<f64>,
        innovation_variance: f64,
    },
}

impl InputKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            InputKind::WhiteGaussian { variance } => {
                if !(variance.is_finite() && *variance > 0.0) {
                    return Err(Error::invalid("variance", format!("must be positive, got {variance}")));
                }
            }
            InputKind::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::invalid("value", "must be finite"));
                }
            }
            InputKind::ColoredAr {
                coefficients,
                innovation_variance,
            } => {
                if !(innovation_variance.is_finite() && *innovation_variance > 0.0) {
                    return Err(Error::invalid(
                        "innovation_variance",
                        format!("must be positive, got {innovation_variance}"),
                    ));
                }
                if coefficients.iter().any(|a| !a.is_finite()) {
                    return Err(Error::invalid("coefficients", "must be finite"));
                }
                if !ar_is_stable(coefficients) {
                    return Err(Error::invalid("coefficients", "AR filter has a pole on or outside the unit circle"));
                }
            }
        }
        Ok(())
    }

    /// Stationary variance of the generated sequence.
    pub fn variance(&self) -> f64 {
        match self {
            InputKind::WhiteGaussian { variance } => *variance,
            InputKind::Constant { value } => value * value,
            InputKind::ColoredAr {
                coefficients,
                innovation_variance,
            } => innovation_variance * ar_power_gain(coefficients),
        }
    }

    /// AR process rescaled to a given stationary variance.
    pub fn ar_with_variance(coefficients: Vec<f64>, variance: f64) -> Result<Self> {
        let kind = InputKind::ColoredAr {
            innovation_variance: 1.0,
            coefficients,
        };
        kind.validate()?;
        let InputKind::ColoredAr { coefficients, .. } = kind else {
            unreachable!()
        };
        let gain = ar_power_gain(&coefficients);
        let kind = InputKind::ColoredAr {
            innovation_variance: variance / gain,
            coefficients,
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// Schur–Cohn step-down test on `1 - Σ a_k z^-k`.
pub fn ar_is_stable(coefficients: &[f64]) -> bool {
    let mut c: Vec<f64> = std::iter::once(1.0)
        .chain(coefficients.iter().map(|a| -a))
        .collect();
    while c.len() > 1 {
        let p = c.len() - 1;
        let k = c[p];
        if k.abs() >= 1.0 {
            return false;
        }
        let denom = 1.0 - k * k;
        c = (0..p).map(|i| (c[i] - k * c[p - i]) / denom).collect();
    }
    true
}

/// `Σ h_n²` for the AR impulse response, i.e. output/innovation variance.
fn ar_power_gain(coefficients: &[f64]) -> f64 {
    let order = coefficients.len();
    let mut h: Vec<f64> = Vec::with_capacity(1024);
    h.push(1.0);
    let mut gain = 1.0;
    for n in 1..1_000_000usize {
        let hn: f64 = coefficients
            .iter()
            .enumerate()
            .filter(|(k, _)| *k < n)
            .map(|(k, a)| a * h[n - 1 - k])
            .sum();
        h.push(hn);
        gain += hn * hn;
        if n > order && h[n.saturating_sub(order)..].iter().all(|v| v.abs() < 1e-18 * gain.sqrt()) {
            break;
        }
    }
    gain
}

/// An input sequence viewed through a sliding window of length `taps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputProcess {
    pub kind: InputKind,
    pub taps: usize,
}

impl InputProcess {
    pub fn new(kind: InputKind, taps: usize) -> Result<Self> {
        kind.validate()?;
        if taps == 0 {
            return Err(Error::invalid("taps", "regressor length must be at least 1"));
        }
        Ok(InputProcess { kind, taps })
    }

    pub fn stream(&self) -> RegressorStream {
        RegressorStream::new(self.clone())
    }
}

/// Per-trial regressor generator, starting from an all-zero window.
#[derive(Debug, Clone)]
pub struct RegressorStream {
    process: InputProcess,
    window: Vec<f64>,
    ar_history: Vec<f64>,
}

impl RegressorStream {
    pub fn new(process: InputProcess) -> Self {
        let ar_len = match &process.kind {
            InputKind::ColoredAr { coefficients, .. } => coefficients.len(),
            _ => 0,
        };
        RegressorStream {
            window: vec![0.0; process.taps],
            ar_history: vec![0.0; ar_len],
            process,
        }
    }

    /// Draws `x_n` and returns `X(n) = [x_n, x_{n-1}, …, x_{n-M+1}]`.
    pub fn next_regressor<R: Rng + ?Sized>(&mut self, rng: &mut R) -> &[f64] {
        let x = match &self.process.kind {
            InputKind::Constant { value } => *value,
            InputKind::WhiteGaussian { variance } => {
                let z: f64 = StandardNormal.sample(rng);
                variance.sqrt() * z
            }
            InputKind::ColoredAr {
                coefficients,
                innovation_variance,
            } => {
                let z: f64 = StandardNormal.sample(rng);
                let x = dot(coefficients, &self.ar_history) + innovation_variance.sqrt() * z;
                if !self.ar_history.is_empty() {
                    self.ar_history.rotate_right(1);
                    self.ar_history[0] = x;
                }
                x
            }
        };
        let m = self.window.len();
        self.window.copy_within(0..m - 1, 1);
        self.window[0] = x;
        &self.window
    }

    pub fn current(&self) -> &[f64] {
        &self.window
    }
}

/// `d = wᵀx + v`.
pub fn observe(taps: &[f64], x: &[f64], noise: f64) -> Result<f64> {
    check_len(taps.len(), x.len())?;
    Ok(dot(taps, x) + noise)
}
