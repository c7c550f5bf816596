//! Gaussian kernel, sample correntropy and the correntropy-induced metric.
//!
//! With kernel `κσ(e) = exp(-e²/2σ²) / (σ√2π)` the squared CIM between a
//! vector and the origin is
//!
//! ```text
//! CIM²(x, 0) = κσ(0)/N · Σ (1 - exp(-xᵢ²/2σ²))
//! ```
//!
//! which, scaled by `N/κσ(0)`, counts the entries of `x` whose magnitude is
//! large compared to σ. That count is what [`l0_approx_count`] returns.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// √(2π), shared by every normalising constant in the crate.
pub const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;

/// Width σ of a Gaussian kernel. Always strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct KernelWidth(f64);

impl KernelWidth {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma.is_finite() && sigma > 0.0 {
            Ok(KernelWidth(sigma))
        } else {
            Err(Error::invalid("sigma", format!("kernel width must be positive and finite, got {sigma}")))
        }
    }

    #[inline]
    pub fn sigma(self) -> f64 {
        self.0
    }

    /// κσ(0) = 1/(σ√2π), the kernel's maximum.
    #[inline]
    pub fn peak(self) -> f64 {
        1.0 / (self.0 * SQRT_TWO_PI)
    }

    /// `exp(-e²/2σ²)`, the kernel without its normalising constant.
    #[inline]
    pub fn unnormalized(self, e: f64) -> f64 {
        (-(e * e) / (2.0 * self.0 * self.0)).exp()
    }
}

impl TryFrom<f64> for KernelWidth {
    type Error = Error;

    fn try_from(sigma: f64) -> Result<Self> {
        KernelWidth::new(sigma)
    }
}

impl From<KernelWidth> for f64 {
    fn from(w: KernelWidth) -> f64 {
        w.0
    }
}

/// Gaussian kernel evaluated at the error `e`.
#[inline]
pub fn gaussian_kernel(e: f64, width: KernelWidth) -> f64 {
    width.peak() * width.unnormalized(e)
}

/// Sample correntropy `(1/N) Σ κσ(xᵢ - yᵢ)`.
pub fn correntropy_estimate(xs: &[f64], ys: &[f64], width: KernelWidth) -> Result<f64> {
    check_len(xs.len(), ys.len())?;
    if xs.is_empty() {
        return Err(Error::Empty("xs"));
    }
    let sum: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| gaussian_kernel(x - y, width))
        .sum();
    Ok(sum / xs.len() as f64)
}

/// Squared correntropy-induced metric between `x` and the zero vector.
pub fn cim_squared(x: &[f64], width: KernelWidth) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Empty("x"));
    }
    Ok(width.peak() * l0_sum(x, width) / x.len() as f64)
}

/// Smooth ℓ₀ count `Σ (1 - exp(-xᵢ²/2σ²))`, i.e. `N·CIM²(x,0)/κσ(0)`.
pub fn l0_approx_count(x: &[f64], width: KernelWidth) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Empty("x"));
    }
    Ok(l0_sum(x, width))
}

fn l0_sum(x: &[f64], width: KernelWidth) -> f64 {
    x.iter().map(|&xi| 1.0 - width.unnormalized(xi)).sum()
}
