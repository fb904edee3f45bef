//! Gaussian resolution kernels.
//!
//! `f_sigma` is the normalized density over detection times, `g_sigma`
//! the suppression factor that multiplies the time difference in every
//! single-detector integral. They are tied together by the exact identity
//! √(f_σ(t−s)f_σ(t−s')) = f_σ(t−(s+s')/2)·g_σ(s−s').

use crate::error::{require_positive, Result};
use std::f64::consts::PI;

/// Resolution timescale σ below which detection times are not resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionKernel {
    sigma: f64,
}

impl ResolutionKernel {
    pub fn new(sigma: f64) -> Result<Self> {
        require_positive("sigma", sigma)?;
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn f(&self, s: f64) -> f64 {
        f_unchecked(s, self.sigma)
    }

    pub fn g(&self, s: f64) -> f64 {
        g_unchecked(s, self.sigma)
    }
}

pub(crate) fn f_unchecked(s: f64, sigma: f64) -> f64 {
    (-s * s / (2.0 * sigma * sigma)).exp() / (2.0 * PI * sigma * sigma).sqrt()
}

pub(crate) fn g_unchecked(s: f64, sigma: f64) -> f64 {
    (-s * s / (8.0 * sigma * sigma)).exp()
}

/// f_σ(s) = (2πσ²)^{-1/2} exp(−s²/2σ²).
pub fn f_sigma(s: f64, sigma: f64) -> Result<f64> {
    require_positive("sigma", sigma)?;
    Ok(f_unchecked(s, sigma))
}

/// g_σ(s) = exp(−s²/8σ²).
pub fn g_sigma(s: f64, sigma: f64) -> Result<f64> {
    require_positive("sigma", sigma)?;
    Ok(g_unchecked(s, sigma))
}

/// √(f_σ(t−s)f_σ(t−s')) − f_σ(t−(s+s')/2)·g_σ(s−s'); zero for Gaussians.
pub fn factorization_residual(t: f64, s: f64, s_prime: f64, sigma: f64) -> Result<f64> {
    require_positive("sigma", sigma)?;
    let lhs = (f_unchecked(t - s, sigma) * f_unchecked(t - s_prime, sigma)).sqrt();
    let rhs = f_unchecked(t - 0.5 * (s + s_prime), sigma) * g_unchecked(s - s_prime, sigma);
    Ok(lhs - rhs)
}

/// Exact product f_σ(s)f_σ(s') written through the mean and difference
/// of its arguments: (2πσ²)^{-1} exp(−((s+s')/2)²/σ²) exp(−(s−s')²/4σ²).
pub fn product_by_mean_and_difference(s: f64, s_prime: f64, sigma: f64) -> Result<f64> {
    require_positive("sigma", sigma)?;
    let mean = 0.5 * (s + s_prime);
    let diff = s - s_prime;
    Ok((-(mean * mean) / (sigma * sigma) - diff * diff / (4.0 * sigma * sigma)).exp()
        / (2.0 * PI * sigma * sigma))
}
