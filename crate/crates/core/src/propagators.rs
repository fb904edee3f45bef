//! iε-regularized two-point functions of the massless scalar field.
//!
//! The iε prescription is the only representation of the light-cone and
//! thermal image terms: all downstream integrals run on or below the real
//! axis, where those terms do not contribute.

use crate::error::{require_positive, Result};
use crate::special::ln_sinh;
use crate::worldlines::{interval_squared, Event};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const FOUR_PI_SQ: f64 = 4.0 * PI * PI;

/// −1/(4π²[(Δx⁰−iε)² − |Δx⃗|²]).
pub fn vacuum_wightman(e1: &Event, e2: &Event, eps: f64) -> Result<Complex64> {
    require_positive("epsilon", eps)?;
    let d = *e1 - *e2;
    let t = Complex64::new(d.x0, -eps);
    Ok(-1.0 / (FOUR_PI_SQ * (t * t - d.spatial_norm_sq())))
}

/// Vacuum kernel pulled back to two co-accelerated detectors a light
/// delay r apart: −a²/(16π² sinh[a(z−r)/2] sinh[a(z+r)/2]) at z = Δτ − iε.
pub fn accelerated_pair_wightman(dtau: f64, a: f64, r: f64, eps: f64) -> Result<Complex64> {
    require_positive("acceleration", a)?;
    require_positive("epsilon", eps)?;
    Ok(accelerated_pair_complex(Complex64::new(dtau, -eps), a, r))
}

/// The same kernel at an arbitrary complex proper-time difference.
pub fn accelerated_pair_complex(z: Complex64, a: f64, r: f64) -> Complex64 {
    let ln_den = ln_sinh(0.5 * a * (z - r)) + ln_sinh(0.5 * a * (z + r));
    -a * a / (16.0 * PI * PI) * (-ln_den).exp()
}

/// Thermal kernel at spatial distance `dist`; falls back to the coincident
/// form for dist < 1e-6·β.
pub fn thermal_wightman(dt: f64, dist: f64, beta: f64, eps: f64) -> Result<Complex64> {
    require_positive("beta", beta)?;
    require_positive("epsilon", eps)?;
    let z = Complex64::new(dt, -eps);
    let dist = dist.abs();
    if dist < 1e-6 * beta {
        return Ok(coincident_thermal_complex(z, beta));
    }
    let k = PI / beta;
    let ln_den = ln_sinh(k * (z - dist)) + ln_sinh(k * (z + dist));
    Ok(-thermal_pair_factor(dist, beta) / (4.0 * beta * beta) * (-ln_den).exp())
}

/// −1/(4β² sinh²[π(dt−iε)/β]).
pub fn coincident_thermal_wightman(dt: f64, beta: f64, eps: f64) -> Result<Complex64> {
    require_positive("beta", beta)?;
    require_positive("epsilon", eps)?;
    Ok(coincident_thermal_complex(Complex64::new(dt, -eps), beta))
}

/// The coincident thermal kernel at a complex time difference.
pub fn coincident_thermal_complex(z: Complex64, beta: f64) -> Complex64 {
    -(-2.0 * ln_sinh(PI * z / beta)).exp() / (4.0 * beta * beta)
}

/// e(r) = β sinh(2πr/β)/(2πr), the factor by which a thermal pair kernel
/// exceeds the accelerated one at a = 2π/β.
pub fn thermal_pair_factor(r: f64, beta: f64) -> f64 {
    let x = 2.0 * PI * r / beta;
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

/// −1/(4π²[(Δx)² − iε]).
pub fn feynman(e1: &Event, e2: &Event, eps: f64) -> Result<Complex64> {
    require_positive("epsilon", eps)?;
    let s2 = interval_squared(e1, e2);
    Ok(-1.0 / (FOUR_PI_SQ * Complex64::new(s2, -eps)))
}

/// Two-point function of a stationary configuration, as a function of the
/// proper-time difference alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    /// Inertial detector in the vacuum.
    Vacuum,
    /// Static detector in a thermal bath.
    Thermal { beta: f64 },
    /// Two co-accelerated detectors with light delay r.
    AcceleratedPair { a: f64, r: f64 },
    /// Feynman propagator along an inertial worldline.
    Feynman,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointKernel {
    pub kind: KernelKind,
    pub epsilon: f64,
}

impl TwoPointKernel {
    pub fn new(kind: KernelKind, epsilon: f64) -> Result<Self> {
        require_positive("epsilon", epsilon)?;
        match kind {
            KernelKind::Thermal { beta } => require_positive("beta", beta)?,
            KernelKind::AcceleratedPair { a, r } => {
                require_positive("acceleration", a)?;
                if !(r >= 0.0 && r.is_finite()) {
                    return Err(crate::error::domain(format!("light delay must be non-negative, got {r}")));
                }
            }
            KernelKind::Vacuum | KernelKind::Feynman => {}
        }
        Ok(Self { kind, epsilon })
    }

    pub fn eval(&self, y: f64) -> Complex64 {
        let z = Complex64::new(y, -self.epsilon);
        match self.kind {
            KernelKind::Vacuum => -1.0 / (FOUR_PI_SQ * z * z),
            KernelKind::Thermal { beta } => coincident_thermal_complex(z, beta),
            KernelKind::AcceleratedPair { a, r } => accelerated_pair_complex(z, a, r),
            KernelKind::Feynman => -1.0 / (FOUR_PI_SQ * Complex64::new(y * y, -self.epsilon)),
        }
    }
}
