//! Stochastic-gradient adaptive filters.
//!
//! Every algorithm shares the same loop: compute the a priori error
//! `e = d - wᵀx`, apply an error nonlinearity to obtain a scalar gain `g`,
//! move the weights by `g·x`, then subtract a zero-attractor term:
//!
//! ```text
//! LMS     g = μe                          attractor: none
//! LMP     g = μ p |e|^(p-1) sign(e)       attractor: none
//! MCC     g = μ exp(-e²/2σ₁²) e           attractor: none
//! ZA*     as base                          ρ sign(w)
//! RZA*    as base                          ρ sign(w) / (1 + δ'|w|)
//! CIMMCC  as MCC                           ρ w exp(-w²/2σ₂²) / (M σ₂³ √2π)
//! ```
//!
//! Attractors are evaluated on the pre-update weights. `sign(0) = 0`, so a
//! tap sitting exactly at zero is left there by the ZA/RZA terms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channels::TapWeights;
use crate::error::{check_len, Divergence, Error, Result};
use crate::kernels::{KernelWidth, SQRT_TWO_PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Lms,
    Zalms,
    Rzalms,
    Lmp,
    Mcc,
    Zamcc,
    Rzamcc,
    Cimmcc,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Lms,
        Algorithm::Zalms,
        Algorithm::Rzalms,
        Algorithm::Lmp,
        Algorithm::Mcc,
        Algorithm::Zamcc,
        Algorithm::Rzamcc,
        Algorithm::Cimmcc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lms => "lms",
            Algorithm::Zalms => "zalms",
            Algorithm::Rzalms => "rzalms",
            Algorithm::Lmp => "lmp",
            Algorithm::Mcc => "mcc",
            Algorithm::Zamcc => "zamcc",
            Algorithm::Rzamcc => "rzamcc",
            Algorithm::Cimmcc => "cimmcc",
        }
    }

    /// Uses the correntropy error weighting (needs σ₁).
    pub fn is_mcc_family(self) -> bool {
        matches!(self, Algorithm::Mcc | Algorithm::Zamcc | Algorithm::Rzamcc | Algorithm::Cimmcc)
    }

    /// Carries a zero attractor (needs ρ).
    pub fn is_sparse(self) -> bool {
        matches!(
            self,
            Algorithm::Zalms | Algorithm::Rzalms | Algorithm::Zamcc | Algorithm::Rzamcc | Algorithm::Cimmcc
        )
    }

    pub fn is_reweighted(self) -> bool {
        matches!(self, Algorithm::Rzalms | Algorithm::Rzamcc)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid("algorithm", format!("unknown algorithm `{s}`")))
    }
}

/// Loose hyperparameter bag; [`FilterSpec::new`] picks and validates the
/// fields the chosen algorithm needs and ignores the rest.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub mu: f64,
    pub rho: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub delta_prime: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ErrorTerm {
    Linear,
    Power { p: f64 },
    Correntropy { width: KernelWidth },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Attractor {
    None,
    ZeroAttracting,
    Reweighted { delta_prime: f64 },
    Cim { width: KernelWidth },
}

/// A validated algorithm choice with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    algorithm: Algorithm,
    mu: f64,
    rho: f64,
    error_term: ErrorTerm,
    attractor: Attractor,
}

fn required(value: Option<f64>, name: &'static str, algorithm: Algorithm) -> Result<f64> {
    value.ok_or_else(|| Error::invalid(name, format!("required by {algorithm}")))
}

impl FilterSpec {
    pub fn new(algorithm: Algorithm, params: &FilterParams) -> Result<Self> {
        let mu = params.mu;
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::invalid("mu", format!("step size must be positive, got {mu}")));
        }

        let rho = if algorithm.is_sparse() {
            let rho = required(params.rho, "rho", algorithm)?;
            if !(rho.is_finite() && rho >= 0.0) {
                return Err(Error::invalid("rho", format!("must be non-negative, got {rho}")));
            }
            rho
        } else {
            0.0
        };

        let error_term = match algorithm {
            Algorithm::Lms | Algorithm::Zalms | Algorithm::Rzalms => ErrorTerm::Linear,
            Algorithm::Lmp => {
                let p = required(params.p, "p", algorithm)?;
                if !(p > 1.0 && p <= 2.0) {
                    return Err(Error::invalid("p", format!("must lie in (1, 2], got {p}")));
                }
                ErrorTerm::Power { p }
            }
            _ => {
                let sigma1 = required(params.sigma1, "sigma1", algorithm)?;
                let width = KernelWidth::new(sigma1).map_err(|_| {
                    Error::invalid("sigma1", format!("kernel width must be positive, got {sigma1}"))
                })?;
                ErrorTerm::Correntropy { width }
            }
        };

        let attractor = match algorithm {
            Algorithm::Lms | Algorithm::Lmp | Algorithm::Mcc => Attractor::None,
            Algorithm::Zalms | Algorithm::Zamcc => Attractor::ZeroAttracting,
            Algorithm::Rzalms | Algorithm::Rzamcc => {
                let delta_prime = required(params.delta_prime, "delta_prime", algorithm)?;
                if !(delta_prime.is_finite() && delta_prime > 0.0) {
                    return Err(Error::invalid(
                        "delta_prime",
                        format!("must be positive, got {delta_prime}"),
                    ));
                }
                Attractor::Reweighted { delta_prime }
            }
            Algorithm::Cimmcc => {
                let sigma2 = required(params.sigma2, "sigma2", algorithm)?;
                let width = KernelWidth::new(sigma2).map_err(|_| {
                    Error::invalid("sigma2", format!("kernel width must be positive, got {sigma2}"))
                })?;
                Attractor::Cim { width }
            }
        };

        Ok(FilterSpec {
            algorithm,
            mu,
            rho,
            error_term,
            attractor,
        })
    }

    pub fn lms(mu: f64) -> Result<Self> {
        Self::new(Algorithm::Lms, &FilterParams { mu, ..Default::default() })
    }

    pub fn zalms(mu: f64, rho: f64) -> Result<Self> {
        Self::new(Algorithm::Zalms, &FilterParams { mu, rho: Some(rho), ..Default::default() })
    }

    pub fn rzalms(mu: f64, rho: f64, delta_prime: f64) -> Result<Self> {
        Self::new(
            Algorithm::Rzalms,
            &FilterParams { mu, rho: Some(rho), delta_prime: Some(delta_prime), ..Default::default() },
        )
    }

    pub fn lmp(mu: f64, p: f64) -> Result<Self> {
        Self::new(Algorithm::Lmp, &FilterParams { mu, p: Some(p), ..Default::default() })
    }

    pub fn mcc(mu: f64, sigma1: f64) -> Result<Self> {
        Self::new(Algorithm::Mcc, &FilterParams { mu, sigma1: Some(sigma1), ..Default::default() })
    }

    pub fn zamcc(mu: f64, rho: f64, sigma1: f64) -> Result<Self> {
        Self::new(
            Algorithm::Zamcc,
            &FilterParams { mu, rho: Some(rho), sigma1: Some(sigma1), ..Default::default() },
        )
    }

    pub fn rzamcc(mu: f64, rho: f64, sigma1: f64, delta_prime: f64) -> Result<Self> {
        Self::new(
            Algorithm::Rzamcc,
            &FilterParams {
                mu,
                rho: Some(rho),
                sigma1: Some(sigma1),
                delta_prime: Some(delta_prime),
                ..Default::default()
            },
        )
    }

    pub fn cimmcc(mu: f64, rho: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        Self::new(
            Algorithm::Cimmcc,
            &FilterParams {
                mu,
                rho: Some(rho),
                sigma1: Some(sigma1),
                sigma2: Some(sigma2),
                ..Default::default()
            },
        )
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Zero-attractor weight; 0 for algorithms without one.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn sigma1(&self) -> Option<KernelWidth> {
        match self.error_term {
            ErrorTerm::Correntropy { width } => Some(width),
            _ => None,
        }
    }

    pub fn sigma2(&self) -> Option<KernelWidth> {
        match self.attractor {
            Attractor::Cim { width } => Some(width),
            _ => None,
        }
    }

    pub fn delta_prime(&self) -> Option<f64> {
        match self.attractor {
            Attractor::Reweighted { delta_prime } => Some(delta_prime),
            _ => None,
        }
    }

    pub fn p(&self) -> Option<f64> {
        match self.error_term {
            ErrorTerm::Power { p } => Some(p),
            _ => None,
        }
    }

    /// Only the parameters this algorithm reads.
    pub fn params(&self) -> FilterParams {
        FilterParams {
            mu: self.mu,
            rho: self.algorithm.is_sparse().then_some(self.rho),
            sigma1: self.sigma1().map(KernelWidth::sigma),
            sigma2: self.sigma2().map(KernelWidth::sigma),
            delta_prime: self.delta_prime(),
            p: self.p(),
        }
    }

    /// Scalar gain multiplying the regressor for error `e`.
    #[inline]
    fn gain(&self, e: f64) -> f64 {
        match self.error_term {
            ErrorTerm::Linear => self.mu * e,
            ErrorTerm::Power { p } => self.mu * p * e.abs().powf(p - 1.0) * sign(e),
            ErrorTerm::Correntropy { width } => self.mu * width.unnormalized(e) * e,
        }
    }
}

/// Component-wise sign with `sign(0) = 0`.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// CIM zero-attractor `wᵢ exp(-wᵢ²/2σ₂²) / (M σ₂³ √2π)` for every tap.
pub fn cim_attractor(w: &[f64], sigma2: KernelWidth) -> Vec<f64> {
    let scale = cim_scale(w.len(), sigma2);
    w.iter().map(|&wi| scale * wi * sigma2.unnormalized(wi)).collect()
}

/// Largest magnitude any entry of [`cim_attractor`] can take, reached at `|wᵢ| = σ₂`.
pub fn cim_attractor_bound(m: usize, sigma2: KernelWidth) -> f64 {
    let s = sigma2.sigma();
    (-0.5f64).exp() / (m as f64 * s * s * SQRT_TWO_PI)
}

#[inline]
fn cim_scale(m: usize, sigma2: KernelWidth) -> f64 {
    let s = sigma2.sigma();
    1.0 / (m as f64 * s * s * s * SQRT_TWO_PI)
}

/// One running adaptive filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    spec: FilterSpec,
    weights: Vec<f64>,
    iteration: u64,
    diverged: Option<Divergence>,
}

impl FilterState {
    /// Starts from `initial`, or from the zero vector of length `m`.
    pub fn new(spec: FilterSpec, m: usize, initial: Option<&TapWeights>) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("M", "filter order must be at least 1"));
        }
        let weights = match initial {
            Some(w) => {
                check_len(m, w.len())?;
                w.to_vec()
            }
            None => vec![0.0; m],
        };
        Ok(FilterState {
            spec,
            weights,
            iteration: 0,
            diverged: None,
        })
    }

    pub fn spec(&self) -> &FilterSpec {
        &self.spec
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.weights.len()
    }

    /// Number of completed updates.
    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn diverged(&self) -> Option<Divergence> {
        self.diverged
    }

    /// A priori error `d - wᵀx`.
    pub fn predict_error(&self, x: &[f64], d: f64) -> Result<f64> {
        check_len(self.weights.len(), x.len())?;
        Ok(d - dot(&self.weights, x))
    }

    /// Runs one update and returns the a priori error.
    ///
    /// A non-finite weight after the update yields [`StepError::Diverged`];
    /// the state is then frozen and every later call returns the same error.
    pub fn step(&mut self, x: &[f64], d: f64) -> Result<f64, StepError> {
        if let Some(div) = self.diverged {
            return Err(StepError::Diverged(div));
        }
        let e = self.predict_error(x, d)?;
        let g = self.spec.gain(e);
        let rho = self.spec.rho;
        let mut finite = true;
        match self.spec.attractor {
            Attractor::None => {
                for (w, &xi) in self.weights.iter_mut().zip(x) {
                    *w += g * xi;
                    finite &= w.is_finite();
                }
            }
            Attractor::ZeroAttracting => {
                for (w, &xi) in self.weights.iter_mut().zip(x) {
                    let w0 = *w;
                    *w = (w0 + g * xi) - rho * sign(w0);
                    finite &= w.is_finite();
                }
            }
            Attractor::Reweighted { delta_prime } => {
                for (w, &xi) in self.weights.iter_mut().zip(x) {
                    let w0 = *w;
                    *w = (w0 + g * xi) - rho * sign(w0) / (1.0 + delta_prime * w0.abs());
                    finite &= w.is_finite();
                }
            }
            Attractor::Cim { width } => {
                let scale = cim_scale(self.weights.len(), width);
                for (w, &xi) in self.weights.iter_mut().zip(x) {
                    let w0 = *w;
                    *w = (w0 + g * xi) - rho * (scale * w0 * width.unnormalized(w0));
                    finite &= w.is_finite();
                }
            }
        }
        self.iteration += 1;
        if !finite || !e.is_finite() {
            let div = Divergence {
                iteration: self.iteration,
            };
            self.diverged = Some(div);
            return Err(StepError::Diverged(div));
        }
        Ok(e)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StepError {
    #[error(transparent)]
    Input(#[from] Error),
    #[error(transparent)]
    Diverged(Divergence),
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
