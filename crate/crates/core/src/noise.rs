//! Impulsive observation-noise models.
//!
//! Two families are supported:
//!
//! - a two-component Gaussian mixture `(1-θ)N(μ₁,ν₁²) + θN(μ₂,ν₂²)`, where the
//!   rare wide component produces the impulses;
//! - alpha-stable laws with characteristic function
//!   `exp{jδt - γ|t|^α [1 + jβ sgn(t) S(t,α)]}`, `S = tan(απ/2)` for `α ≠ 1`
//!   and `(2/π) log|t|` for `α = 1`.
//!
//! γ is the dispersion as it appears in the characteristic function, so
//! the usual scale parameter is `γ^(1/α)`. Draws use the
//! Chambers–Mallows–Stuck transform of one uniform angle and one unit
//! exponential.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedGaussianParams {
    pub mu1: f64,
    pub mu2: f64,
    /// Variance ν₁² of the nominal component.
    pub var1: f64,
    /// Variance ν₂² of the impulsive component.
    pub var2: f64,
    pub theta: f64,
}

impl MixedGaussianParams {
    pub fn new(mu1: f64, mu2: f64, var1: f64, var2: f64, theta: f64) -> Result<Self> {
        let p = MixedGaussianParams { mu1, mu2, var1, var2, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu1.is_finite() && self.mu2.is_finite()) {
            return Err(Error::invalid("mu1/mu2", "means must be finite"));
        }
        for (name, v) in [("var1", self.var1), ("var2", self.var2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("variance must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::invalid("theta", format!("mixture weight must lie in [0, 1], got {}", self.theta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaStableParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl AlphaStableParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let p = AlphaStableParams { alpha, beta, gamma, delta };
        p.validate()?;
        Ok(p)
    }

    /// Symmetric alpha-stable law centred at zero.
    pub fn symmetric(alpha: f64, gamma: f64) -> Result<Self> {
        Self::new(alpha, 0.0, gamma, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::invalid("alpha", format!("must lie in (0, 2], got {}", self.alpha)));
        }
        if !(-1.0..=1.0).contains(&self.beta) {
            return Err(Error::invalid("beta", format!("must lie in [-1, 1], got {}", self.beta)));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::invalid("gamma", format!("must be positive, got {}", self.gamma)));
        }
        if !self.delta.is_finite() {
            return Err(Error::invalid("delta", "must be finite"));
        }
        Ok(())
    }

    /// Scale `γ^(1/α)`.
    pub fn scale(&self) -> f64 {
        self.gamma.powf(1.0 / self.alpha)
    }

    /// Closed-form characteristic function at `t`.
    pub fn characteristic_function(&self, t: f64) -> Complex64 {
        if t == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let skew = if self.alpha == 1.0 {
            FRAC_2_PI * t.abs().ln()
        } else {
            (self.alpha * FRAC_PI_2).tan()
        };
        let mag = self.gamma * t.abs().powf(self.alpha);
        let exponent = Complex64::new(-mag, self.delta * t - mag * self.beta * t.signum() * skew);
        exponent.exp()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = Open01.sample(rng);
        let v = PI * (u - 0.5);
        let w: f64 = Exp1.sample(rng);
        let alpha = self.alpha;
        let scale = self.scale();
        if alpha == 1.0 {
            let beta = self.beta;
            let a = FRAC_PI_2 + beta * v;
            let x = FRAC_2_PI * (a * v.tan() - beta * ((FRAC_PI_2 * w * v.cos()) / a).ln());
            scale * x + FRAC_2_PI * beta * scale * scale.ln() + self.delta
        } else {
            // Standard CMS targets exp(-|t|^α [1 - jβ' sgn(t) tan(απ/2)]);
            // the characteristic function above carries +jβ, hence β' = -β.
            let beta = -self.beta;
            let zeta = beta * (alpha * FRAC_PI_2).tan();
            let b = zeta.atan() / alpha;
            let s = (1.0 + zeta * zeta).powf(1.0 / (2.0 * alpha));
            let x = s * (alpha * (v + b)).sin() / v.cos().powf(1.0 / alpha)
                * ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha);
            scale * x + self.delta
        }
    }
}

/// Observation noise `v(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseModel {
    None,
    MixedGaussian(MixedGaussianParams),
    AlphaStable(AlphaStableParams),
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::None => Ok(()),
            NoiseModel::MixedGaussian(p) => p.validate(),
            NoiseModel::AlphaStable(p) => p.validate(),
        }
    }

    /// One draw. `None` consumes no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            NoiseModel::None => 0.0,
            NoiseModel::MixedGaussian(p) => {
                let impulsive = rng.random::<f64>() < p.theta;
                let z: f64 = StandardNormal.sample(rng);
                if impulsive {
                    p.mu2 + p.var2.sqrt() * z
                } else {
                    p.mu1 + p.var1.sqrt() * z
                }
            }
            NoiseModel::AlphaStable(p) => p.sample(rng),
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

/// `(1/N) Σ exp(j t xₖ)`.
pub fn empirical_char_fn(samples: &[f64], t: f64) -> Result<Complex64> {
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    let (re, im) = samples.iter().fold((0.0, 0.0), |(re, im), &x| {
        let (s, c) = (t * x).sin_cos();
        (re + c, im + s)
    });
    let n = samples.len() as f64;
    Ok(Complex64::new(re / n, im / n))
}

/// Variance of the two-component Gaussian mixture.
pub fn mixture_variance(p: &MixedGaussianParams) -> f64 {
    let q = 1.0 - p.theta;
    let mean = q * p.mu1 + p.theta * p.mu2;
    q * (p.var1 + p.mu1 * p.mu1) + p.theta * (p.var2 + p.mu2 * p.mu2) - mean * mean
}
