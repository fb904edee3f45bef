//! Pair correlations of two detectors and the second-order coherence g2.
//!
//! The joint detection density is p(E₁,τ₁)p(E₂,τ₂) + G, with G proportional
//! to δ(E₁ − E₂). Only the coefficient of that δ is stored, so
//! ⟨I(0)I(Δτ)⟩ = I² + ∫dE E²·coefficient(E, Δτ).
//!
//! Closed forms are provided for far (r ≥ 8σ) and coincident (r ≤ 0.01/a)
//! pairs; anywhere in between the numeric pipeline H(S) → ∫dS f_σ(Δτ−S)H(S)
//! is used.

use crate::error::{domain, regime, require_positive, Error, Result};
use crate::propagators::thermal_pair_factor;
use crate::quadrature::{integrate_interval, integrate_interval_vec, QuadratureSpec};
use crate::response::{
    planck_intensity, planck_response, response_general, thermal_static_response, Coupling, DetectorModel,
};
use crate::smearing::{f_unchecked, g_unchecked};
use crate::special::{gauss_legendre, ln_sinh};
use crate::worldlines::Worldline;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

/// The field configuration seen by the detector pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    /// Co-accelerated pair with light delay r.
    Accelerated { a: f64, r: f64 },
    /// Static pair at distance r in a bath at inverse temperature β.
    Thermal { beta: f64, r: f64 },
}

impl Source {
    fn validate(&self) -> Result<()> {
        let r = match *self {
            Source::Accelerated { a, r } => {
                require_positive("acceleration", a)?;
                r
            }
            Source::Thermal { beta, r } => {
                require_positive("beta", beta)?;
                r
            }
        };
        if r >= 0.0 && r.is_finite() {
            Ok(())
        } else {
            Err(domain(format!("separation r must be non-negative, got {r}")))
        }
    }

    /// a, or 2π/β for thermal sources.
    pub fn acceleration(&self) -> f64 {
        match *self {
            Source::Accelerated { a, .. } => a,
            Source::Thermal { beta, .. } => 2.0 * PI / beta,
        }
    }

    pub fn r(&self) -> f64 {
        match *self {
            Source::Accelerated { r, .. } | Source::Thermal { r, .. } => r,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Source::Accelerated { .. } => "accelerated",
            Source::Thermal { .. } => "thermal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Far,
    Near,
    Numeric,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Far => "far",
            Regime::Near => "near",
            Regime::Numeric => "numeric",
        }
    }
}

/// Near when r ≤ 0.01/a, far when r ≥ 8σ, numeric otherwise.
pub fn resolve_regime(source: &Source, sigma: f64) -> Result<Regime> {
    source.validate()?;
    require_positive("sigma", sigma)?;
    let (a, r) = (source.acceleration(), source.r());
    Ok(if r <= 0.01 / a {
        Regime::Near
    } else if r >= 8.0 * sigma {
        Regime::Far
    } else {
        Regime::Numeric
    })
}

fn check_regime(requested: Regime, source: &Source, sigma: f64) -> Result<()> {
    let (a, r) = (source.acceleration(), source.r());
    match requested {
        Regime::Near if r > 0.01 / a => Err(regime(format!(
            "near regime needs r ≤ 0.01/a = {}, got r = {r}",
            0.01 / a
        ))),
        Regime::Far if r < 8.0 * sigma => Err(regime(format!(
            "far regime needs r ≥ 8σ = {}, got r = {r}",
            8.0 * sigma
        ))),
        _ => Ok(()),
    }
}

/// H(S) by quadrature along Im x = −c, c = min(π/a, σ), which passes below
/// the real-axis poles at ±u, ±v (u = S + r, v = S − r) and above the next
/// row at −2πi/a.
pub fn h_function_numeric(s: f64, e_sum: f64, a: f64, r: f64, sigma: f64, spec: &QuadratureSpec) -> Result<Complex64> {
    require_positive("acceleration", a)?;
    require_positive("sigma", sigma)?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(domain(format!("separation r must be non-negative, got {r}")));
    }
    let (u, v) = (s + r, s - r);
    let c = (PI / a).min(sigma);
    let reach = u.abs().max(v.abs()) + 25.0 / a;
    let half = (spec.window_sigmas * SQRT_2 * sigma).min(reach);
    let inv4s2 = 1.0 / (4.0 * sigma * sigma);
    let ha = 0.5 * a;
    let integral = integrate_interval(
        |x| {
            let z = Complex64::new(x, -c);
            let ln_den = ln_sinh(ha * (z - u)) + ln_sinh(ha * (z + u)) + ln_sinh(ha * (z - v)) + ln_sinh(ha * (z + v));
            (Complex64::new(0.0, -e_sum) * z - z * z * inv4s2 - ln_den).exp()
        },
        -half,
        half,
        spec,
    )?;
    Ok(integral.value)
}

/// Leading-order H(S) for coincident detectors, with the overall sign that
/// direct quadrature of H produces:
/// −16π g_σ(√2S)/(a²(e^{2πEs/a}−1)sinh²(aS))·[Es cos(EsS) − a coth(aS) sin(EsS)].
pub fn h_near_leading_order(s: f64, e_sum: f64, a: f64, sigma: f64) -> Result<f64> {
    require_positive("acceleration", a)?;
    require_positive("sigma", sigma)?;
    let pref = -16.0 * PI * g_unchecked(SQRT_2 * s, sigma) / (a * a * (2.0 * PI * e_sum / a).exp_m1());
    let x = a * s;
    let bracket = if x.abs() < 1e-3 {
        // series of [Es cos(EsS) − a coth(aS) sin(EsS)]/sinh²(aS)
        let (e2, a2, s2) = (e_sum * e_sum, a * a, s * s);
        -(e2 + a2) * e_sum / (3.0 * a2) + s2 * e_sum * (e2 * e2 + 5.0 * e2 * a2 + 4.0 * a2 * a2) / (30.0 * a2)
    } else {
        let sh = x.sinh();
        (e_sum * (e_sum * s).cos() - a * (e_sum * s).sin() / x.tanh()) / (sh * sh)
    };
    Ok(pref * bracket)
}

fn far_common(e: f64, dtau: f64, a: f64, r: f64, sigma: f64) -> Result<f64> {
    require_positive("energy", e)?;
    require_positive("acceleration", a)?;
    require_positive("sigma", sigma)?;
    if r < 8.0 * sigma {
        return Err(regime(format!("far-regime form needs r ≥ 8σ = {}, got r = {r}", 8.0 * sigma)));
    }
    Ok((PI * e / a).tanh() / (4.0 * PI * e / a).exp_m1() * (f_unchecked(dtau - r, sigma) + f_unchecked(dtau + r, sigma)))
}

/// Far-regime δ-coefficient with the e^{−2ar} asymptote (needs r ≥ 8σ, ar ≥ 5):
/// −α²(a²/2π)e^{−2ar}tanh(πE/a)/(e^{4πE/a}−1)·[f_σ(Δτ−r) + f_σ(Δτ+r)].
pub fn g_coefficient_far(e: f64, dtau: f64, a: f64, r: f64, sigma: f64, det: &DetectorModel) -> Result<f64> {
    let common = far_common(e, dtau, a, r, sigma)?;
    if a * r < 5.0 {
        return Err(regime(format!(
            "e^(-2ar) form needs ar ≥ 5, got ar = {}; use the sinh⁻² form",
            a * r
        )));
    }
    let alpha = det.alpha(e);
    Ok(-alpha * alpha * a * a / (2.0 * PI) * (-2.0 * a * r).exp() * common)
}

/// Far-regime δ-coefficient before the ar ≫ 1 simplification:
/// −α²(a²/8π)tanh(πE/a)/((e^{4πE/a}−1)sinh²(ar))·[f_σ(Δτ−r) + f_σ(Δτ+r)].
pub fn g_coefficient_far_sinh(e: f64, dtau: f64, a: f64, r: f64, sigma: f64, det: &DetectorModel) -> Result<f64> {
    let common = far_common(e, dtau, a, r, sigma)?;
    let alpha = det.alpha(e);
    let sh = (a * r).sinh();
    Ok(-alpha * alpha * a * a / (8.0 * PI) / (sh * sh) * common)
}

/// Coincident-pair δ-coefficient (needs Eσ ≥ 10):
/// −α²((2E)²/8π)coth(πE/a)/(e^{4πE/a}−1)·f_σ(Δτ).
pub fn g_coefficient_near(e: f64, dtau: f64, a: f64, sigma: f64, det: &DetectorModel) -> Result<f64> {
    require_positive("energy", e)?;
    require_positive("acceleration", a)?;
    require_positive("sigma", sigma)?;
    if e * sigma < 10.0 {
        return Err(regime(format!("near-regime form needs Eσ ≥ 10, got Eσ = {}", e * sigma)));
    }
    let alpha = det.alpha(e);
    let x = PI * e / a;
    Ok(-alpha * alpha * (4.0 * e * e) / (8.0 * PI) / x.tanh() / (4.0 * x).exp_m1() * f_unchecked(dtau, sigma))
}

/// Thermal-bath counterpart. Far: −α²/(8πr²)·tanh(βE/2)/(e^{2βE}−1)·[f+f];
/// near: the accelerated near form at a = 2π/β.
pub fn g_coefficient_thermal(
    e: f64,
    dtau: f64,
    beta: f64,
    r: f64,
    sigma: f64,
    det: &DetectorModel,
    regime_: Regime,
) -> Result<f64> {
    require_positive("beta", beta)?;
    let source = Source::Thermal { beta, r };
    check_regime(regime_, &source, sigma)?;
    match regime_ {
        Regime::Near => g_coefficient_near(e, dtau, 2.0 * PI / beta, sigma, det),
        Regime::Far => {
            require_positive("energy", e)?;
            let alpha = det.alpha(e);
            let f = f_unchecked(dtau - r, sigma) + f_unchecked(dtau + r, sigma);
            Ok(-alpha * alpha / (8.0 * PI * r * r) * (0.5 * beta * e).tanh() / (2.0 * beta * e).exp_m1() * f)
        }
        Regime::Numeric => {
            let nc = NumericCorrelation::new(source, sigma, QuadratureSpec::default())?;
            Ok(nc.coefficients(e, det.alpha(e), &[dtau])?[0])
        }
    }
}

/// The quadrature pipeline H(S) → a⁴/(64π³)∫dS f_σ(Δτ−S)·Re H(S).
///
/// H is evaluated once per S node and shared by every Δτ requested in the
/// same call.
#[derive(Debug, Clone)]
pub struct NumericCorrelation {
    source: Source,
    sigma: f64,
    spec: QuadratureSpec,
    inner: QuadratureSpec,
}

impl NumericCorrelation {
    pub fn new(source: Source, sigma: f64, spec: QuadratureSpec) -> Result<Self> {
        source.validate()?;
        require_positive("sigma", sigma)?;
        spec.validate()?;
        Ok(Self { source, sigma, spec, inner: spec.with_panels(256) })
    }

    /// H(S) for this pair at Es = e_sum (accelerated kernel at the
    /// effective acceleration; thermal pairs add e(r)² separately).
    pub fn h(&self, s: f64, e_sum: f64) -> Result<Complex64> {
        h_function_numeric(s, e_sum, self.source.acceleration(), self.source.r(), self.sigma, &self.inner)
    }

    /// δ-coefficient at energy `e` for each Δτ, with coupling α(E) = `alpha`.
    pub fn coefficients(&self, e: f64, alpha: f64, dtaus: &[f64]) -> Result<Vec<f64>> {
        require_positive("energy", e)?;
        if dtaus.is_empty() {
            return Ok(Vec::new());
        }
        let (a, r, sigma) = (self.source.acceleration(), self.source.r(), self.sigma);
        let e_sum = 2.0 * e;
        let lo_t = dtaus.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi_t = dtaus.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let reach = r + (40.0 / a).min(34.0 * sigma);
        let lo = (lo_t - self.spec.window_sigmas * sigma).max(-reach);
        let hi = (hi_t + self.spec.window_sigmas * sigma).min(reach);
        let scale = alpha * alpha * a.powi(4) / (64.0 * PI.powi(3))
            * match self.source {
                Source::Thermal { beta, r } => thermal_pair_factor(r, beta).powi(2),
                Source::Accelerated { .. } => 1.0,
            };
        if !(hi > lo) {
            return Ok(vec![0.0; dtaus.len()]);
        }
        let step = sigma.min(1.0 / a).min(PI / e_sum) / 2.0;
        let panels = (((hi - lo) / step).ceil() as usize).max(64).next_power_of_two();
        let spec = self.spec.with_panels(panels);
        let mut failure: Option<Error> = None;
        let sums = integrate_interval_vec(
            |s, out| {
                let h = if failure.is_some() {
                    0.0
                } else {
                    match self.h(s, e_sum) {
                        Ok(h) => h.re,
                        Err(err) => {
                            failure = Some(err);
                            0.0
                        }
                    }
                };
                for (o, t) in out.iter_mut().zip(dtaus) {
                    *o = Complex64::new(f_unchecked(t - s, sigma) * h, 0.0);
                }
            },
            dtaus.len(),
            lo,
            hi,
            &spec,
        );
        if let Some(err) = failure {
            return Err(err);
        }
        Ok(sums?.into_iter().map(|i| scale * i.value.re).collect())
    }
}

/// The δ(E₁−E₂) coefficient of G for a given source, regime and detector.
#[derive(Debug, Clone)]
pub struct CorrelationDensity {
    pub source: Source,
    pub regime: Regime,
    pub det: DetectorModel,
    spec: QuadratureSpec,
}

impl CorrelationDensity {
    /// `regime = None` resolves it from the geometry.
    pub fn new(source: Source, det: DetectorModel, regime_: Option<Regime>, spec: QuadratureSpec) -> Result<Self> {
        let auto = resolve_regime(&source, det.sigma)?;
        let regime_ = match regime_ {
            Some(r) => {
                check_regime(r, &source, det.sigma)?;
                r
            }
            None => auto,
        };
        Ok(Self { source, regime: regime_, det, spec })
    }

    pub fn coefficient(&self, e: f64, dtau: f64) -> Result<f64> {
        Ok(self.coefficients(e, &[dtau])?[0])
    }

    pub fn coefficients(&self, e: f64, dtaus: &[f64]) -> Result<Vec<f64>> {
        let sigma = self.det.sigma;
        let a = self.source.acceleration();
        let r = self.source.r();
        match (self.regime, self.source) {
            (Regime::Numeric, _) => {
                NumericCorrelation::new(self.source, sigma, self.spec)?.coefficients(e, self.det.alpha(e), dtaus)
            }
            (Regime::Near, _) => dtaus.iter().map(|t| g_coefficient_near(e, *t, a, sigma, &self.det)).collect(),
            (Regime::Far, Source::Accelerated { .. }) => dtaus
                .iter()
                .map(|t| {
                    if a * r >= 5.0 {
                        g_coefficient_far(e, *t, a, r, sigma, &self.det)
                    } else {
                        g_coefficient_far_sinh(e, *t, a, r, sigma, &self.det)
                    }
                })
                .collect(),
            (Regime::Far, Source::Thermal { beta, r }) => dtaus
                .iter()
                .map(|t| g_coefficient_thermal(e, *t, beta, r, sigma, &self.det, Regime::Far))
                .collect(),
        }
    }

    /// Single-detector response p(E) of either detector.
    pub fn single_response(&self, e: f64) -> Result<f64> {
        match self.source {
            Source::Accelerated { a, .. } => {
                Ok(response_general(&Worldline::uniform(a)?, e, 0.0, &self.det, &self.spec)?.value)
            }
            Source::Thermal { beta, .. } => Ok(thermal_static_response(e, beta, &self.det, &self.spec)?.value),
        }
    }
}

/// Joint detection density split into its product part and the
/// coefficient of δ(E₁−E₂).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointProbability {
    pub product_part: f64,
    pub same_energy_coefficient: f64,
}

pub fn joint_probability(
    e1: f64,
    tau1: f64,
    e2: f64,
    tau2: f64,
    density: &CorrelationDensity,
) -> Result<JointProbability> {
    let product_part = density.single_response(e1)? * density.single_response(e2)?;
    let same_energy_coefficient = if (e1 - e2).abs() < 1.0 / density.det.sigma {
        density.coefficient(0.5 * (e1 + e2), tau2 - tau1)?
    } else {
        0.0
    };
    Ok(JointProbability { product_part, same_energy_coefficient })
}

/// Sampled g2(Δτ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceCurve {
    pub dtau: Vec<f64>,
    pub g2: Vec<f64>,
    pub regime: Regime,
    pub source: Source,
    pub sigma: f64,
}

/// g2 at a single delay.
pub fn g2(dtau: f64, source: Source, det: &DetectorModel, regime_: Option<Regime>, spec: &QuadratureSpec) -> Result<f64> {
    Ok(g2_curve(&[dtau], source, det, regime_, spec)?.g2[0])
}

/// g2 over a grid of delays: 1 + ∫dE E²·coefficient(E, Δτ) / I².
///
/// Two-level detectors in the far and near regimes use the narrow-band
/// forms directly. The closed-form regimes take I from the Planck
/// spectrum; the numeric regime takes it from response quadrature.
pub fn g2_curve(
    dtaus: &[f64],
    source: Source,
    det: &DetectorModel,
    regime_: Option<Regime>,
    spec: &QuadratureSpec,
) -> Result<CoherenceCurve> {
    let density = CorrelationDensity::new(source, det.clone(), regime_, *spec)?;
    let a = source.acceleration();
    let g2 = match (&det.coupling, density.regime) {
        (Coupling::TwoLevel { e0, delta_e }, Regime::Near) => {
            if e0 * det.sigma < 10.0 {
                return Err(regime(format!("near regime needs E0σ ≥ 10, got {}", e0 * det.sigma)));
            }
            dtaus.iter().map(|t| 1.0 - 2.0 * PI / delta_e * f_unchecked(*t, det.sigma)).collect()
        }
        (Coupling::TwoLevel { e0, delta_e }, Regime::Far) => {
            let p = planck_response(*e0, a, det)?;
            let coefs = density.coefficients(*e0, dtaus)?;
            coefs.into_iter().map(|c| 1.0 + c / (delta_e * p * p)).collect()
        }
        (_, Regime::Numeric) => {
            let (lo, hi) = det.coupling.support().ok_or_else(|| {
                regime("the numeric regime needs a coupling with bounded support (two_level or tabulated)")
            })?;
            let (nodes, weights) = gauss_legendre(8);
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            let mut numer = vec![0.0; dtaus.len()];
            let mut intensity = 0.0;
            for (x, w) in nodes.iter().zip(&weights) {
                let e = mid + half * x;
                let wt = w * half;
                intensity += wt * e * density.single_response(e)?;
                for (n, c) in numer.iter_mut().zip(density.coefficients(e, dtaus)?) {
                    *n += wt * e * e * c;
                }
            }
            numer.into_iter().map(|n| 1.0 + n / (intensity * intensity)).collect()
        }
        (coupling, _) => {
            let (lo, hi) = coupling.support().unwrap_or((0.0, 40.0 * a / (2.0 * PI)));
            let intensity = planck_intensity(a, det, spec)?;
            let mut out = Vec::with_capacity(dtaus.len());
            for t in dtaus {
                let mut failure = None;
                let n = integrate_interval(
                    |e| {
                        let v = if e <= 0.0 {
                            0.0
                        } else {
                            density.coefficient(e, *t).unwrap_or_else(|err| {
                                failure.get_or_insert(err);
                                0.0
                            })
                        };
                        Complex64::new(e * e * v, 0.0)
                    },
                    lo.max(0.0),
                    hi,
                    &spec.with_panels(256),
                )?;
                if let Some(err) = failure {
                    return Err(err);
                }
                out.push(1.0 + n.value.re / (intensity * intensity));
            }
            out
        }
    };
    Ok(CoherenceCurve { dtau: dtaus.to_vec(), g2, regime: density.regime, source, sigma: det.sigma })
}

/// ∫dx sin(Ex)/sinh(ax) = (π/a)tanh(πE/2a).
pub fn appendix_b0a(e: f64, a: f64) -> Result<f64> {
    require_positive("acceleration", a)?;
    Ok(PI / a * (0.5 * PI * e / a).tanh())
}

/// Real-axis quadrature of sin(Ex)/sinh(ax).
pub fn appendix_b0a_quadrature(e: f64, a: f64, spec: &QuadratureSpec) -> Result<f64> {
    require_positive("acceleration", a)?;
    let half = spec.window_sigmas * 4.0 / a;
    let r = integrate_interval(
        |x| {
            let v = if x == 0.0 { e / a } else { (e * x).sin() / (a * x).sinh() };
            Complex64::new(v, 0.0)
        },
        -half,
        half,
        spec,
    )?;
    Ok(r.value.re)
}

/// ∫dS [E cos(ES) − a coth(aS) sin(ES)]/sinh²(aS) = −πE²coth(πE/2a)/(2a²).
pub fn appendix_b0b(e: f64, a: f64) -> Result<f64> {
    require_positive("acceleration", a)?;
    if e == 0.0 {
        return Err(domain("B̃(0) diverges at E = 0 (coth pole)"));
    }
    require_positive("energy", e)?;
    Ok(-PI * e * e / (0.5 * PI * e / a).tanh() / (2.0 * a * a))
}

/// The B̃(0) kernel at complex S.
pub fn appendix_b0b_integrand(e: f64, a: f64, s: Complex64) -> Complex64 {
    let sh = (a * s).sinh();
    (e * (e * s).cos() - a * (e * s).sin() * (a * s).cosh() / sh) / (sh * sh)
}

/// Re of the B̃(0) kernel integrated along Im S = −π/(2a), halfway to the
/// first off-axis poles.
pub fn appendix_b0b_quadrature(e: f64, a: f64, spec: &QuadratureSpec) -> Result<f64> {
    require_positive("acceleration", a)?;
    let c = 0.5 * PI / a;
    let half = spec.window_sigmas * 4.0 / a;
    let r = integrate_interval(|x| appendix_b0b_integrand(e, a, Complex64::new(x, -c)), -half, half, spec)?;
    Ok(r.value.re)
}

/// |∫dx e^{−iEs·x}g_σ(√2x)| / ∫dx g_σ(√2x), the factor by which the
/// Feynman-propagator term of G is suppressed (exactly e^{−σ²Es²}).
pub fn feynman_suppression(e_sum: f64, sigma: f64, spec: &QuadratureSpec) -> Result<f64> {
    require_positive("sigma", sigma)?;
    let width = SQRT_2 * sigma;
    let num = crate::quadrature::integrate_windowed(
        |x| Complex64::from_polar(g_unchecked(SQRT_2 * x, sigma), -e_sum * x),
        spec,
        0.0,
        width,
    )?;
    let den =
        crate::quadrature::integrate_windowed(|x| g_unchecked(SQRT_2 * x, sigma).into(), spec, 0.0, width)?;
    Ok(num.value.norm() / den.value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit(sigma: f64) -> DetectorModel {
        DetectorModel::unit(sigma).unwrap()
    }

    #[test]
    fn regime_resolution() {
        let acc = |r| Source::Accelerated { a: 1.0, r };
        assert_eq!(resolve_regime(&acc(0.0), 1.0).unwrap(), Regime::Near);
        assert_eq!(resolve_regime(&acc(0.01), 1.0).unwrap(), Regime::Near);
        assert_eq!(resolve_regime(&acc(8.0), 1.0).unwrap(), Regime::Far);
        assert_eq!(resolve_regime(&acc(3.0), 1.0).unwrap(), Regime::Numeric);
        assert!(CorrelationDensity::new(acc(3.0), unit(1.0), Some(Regime::Far), QuadratureSpec::default()).is_err());
    }

    #[test]
    fn sinh_transform_closed_forms() {
        assert_relative_eq!(appendix_b0a(1.0, 1.0).unwrap(), 2.881_319_039_955, max_relative = 1e-12);
        assert_relative_eq!(appendix_b0a(1e3, 1.0).unwrap(), PI, max_relative = 1e-12);
        assert_eq!(appendix_b0a(0.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(appendix_b0b(1.0, 1.0).unwrap(), -1.712_7, max_relative = 1e-4);
        assert_relative_eq!(appendix_b0b(10.0, 1.0).unwrap(), -PI * 100.0 / 2.0, max_relative = 1e-3);
        assert!(appendix_b0b(0.0, 1.0).is_err());
    }

    #[test]
    fn sinh_transform_oracles() {
        let spec = QuadratureSpec::default();
        for e in [0.5, 1.0, 2.0] {
            assert_relative_eq!(
                appendix_b0a_quadrature(e, 1.0, &spec).unwrap(),
                appendix_b0a(e, 1.0).unwrap(),
                max_relative = 1e-9
            );
            assert_relative_eq!(
                appendix_b0b_quadrature(e, 1.0, &spec).unwrap(),
                appendix_b0b(e, 1.0).unwrap(),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn b0b_integrand_is_even() {
        let spec = QuadratureSpec::default();
        let odd = integrate_interval(
            |x| {
                let z = Complex64::new(x, 0.0);
                0.5 * (appendix_b0b_integrand(1.3, 1.0, z + 0.01) - appendix_b0b_integrand(1.3, 1.0, -z - 0.01))
            },
            -40.0,
            40.0,
            &spec,
        )
        .unwrap();
        assert!(odd.value.norm() < 1e-10);
    }

    #[test]
    fn near_series_is_continuous() {
        let (es, a, sigma) = (2.0, 1.0, 20.0);
        let below = h_near_leading_order(0.999e-3, es, a, sigma).unwrap();
        let above = h_near_leading_order(1.001e-3, es, a, sigma).unwrap();
        assert_relative_eq!(below, above, max_relative = 1e-7);
    }

    #[test]
    fn h_is_real_and_even() {
        let spec = QuadratureSpec::default().with_panels(256);
        let h1 = h_function_numeric(0.7, 2.0, 1.0, 0.3, 2.0, &spec).unwrap();
        let h2 = h_function_numeric(-0.7, 2.0, 1.0, 0.3, 2.0, &spec).unwrap();
        assert!((h1.conj() - h2).norm() <= 1e-12 * h1.norm());
        assert!(h1.im.abs() <= 1e-10 * h1.re.abs());
    }

    #[test]
    fn h_numeric_vs_near_form() {
        let spec = QuadratureSpec::default().with_panels(256);
        let (a, sigma, es) = (1.0, 20.0, 2.0);
        for s in [0.2, 0.5, 1.5] {
            let num = h_function_numeric(s, es, a, 0.0, sigma, &spec).unwrap().re;
            let lead = h_near_leading_order(s, es, a, sigma).unwrap();
            assert!((num / lead - 1.0).abs() < 0.05, "S={s}: {num} vs {lead}");
        }
    }

    #[test]
    fn far_closed_form_properties() {
        let det = unit(0.5);
        let (a, r, e) = (1.0, 5.0, 1.0);
        let at_r = g_coefficient_far(e, r, a, r, 0.5, &det).unwrap();
        let at_0 = g_coefficient_far(e, 0.0, a, r, 0.5, &det).unwrap();
        assert!(at_r < 0.0);
        assert_relative_eq!(at_r / at_0, (f_unchecked(0.0, 0.5) + f_unchecked(2.0 * r, 0.5)) / (2.0 * f_unchecked(r, 0.5)), max_relative = 1e-12);
        assert!(g_coefficient_far(e, r, a, 3.0, 0.5, &det).is_err());
        assert!(g_coefficient_far(e, r, a, 4.0, 0.5, &det).is_err());
        let sinh_form = g_coefficient_far_sinh(e, 10.0, a, 10.0, 0.5, &det).unwrap();
        let exp_form = g_coefficient_far(e, 10.0, a, 10.0, 0.5, &det).unwrap();
        assert_relative_eq!(sinh_form, exp_form, max_relative = 1e-8);
    }

    #[test]
    fn thermal_and_accelerated_near_forms_coincide() {
        let det = unit(20.0);
        let a = 1.3;
        let beta = 2.0 * PI / a;
        for (e, t) in [(1.0, 0.0), (2.0, 5.0), (0.6, -3.0)] {
            let acc = g_coefficient_near(e, t, a, 20.0, &det).unwrap();
            let th = g_coefficient_thermal(e, t, beta, 0.0, 20.0, &det, Regime::Near).unwrap();
            assert!((acc - th).abs() <= 1e-12 * acc.abs());
        }
    }

    #[test]
    fn thermal_far_is_power_law() {
        let det = unit(0.5);
        let beta = 2.0 * PI;
        let c1 = g_coefficient_thermal(1.0, 5.0, beta, 5.0, 0.5, &det, Regime::Far).unwrap();
        let c2 = g_coefficient_thermal(1.0, 10.0, beta, 10.0, 0.5, &det, Regime::Far).unwrap();
        assert_relative_eq!(c1 / c2, 4.0, max_relative = 1e-10);
    }

    #[test]
    fn two_level_near_g2() {
        let det = DetectorModel::new(100.0, Coupling::TwoLevel { e0: 10.0, delta_e: 1.0 }).unwrap();
        let spec = QuadratureSpec::default();
        let source = Source::Accelerated { a: 1.0, r: 0.0 };
        let v = g2(0.0, source, &det, None, &spec).unwrap();
        assert!((v - (1.0 - (2.0 * PI).sqrt() / 100.0)).abs() < 1e-12);
        assert_relative_eq!(v, 0.974_933_717_253_69, max_relative = 1e-12);
    }

    #[test]
    fn feynman_term_is_suppressed() {
        let spec = QuadratureSpec::default();
        assert!(feynman_suppression(20.0, 1.0, &spec).unwrap() < 1e-10);
        assert_relative_eq!(feynman_suppression(1.0, 1.0, &spec).unwrap(), (-1.0f64).exp(), max_relative = 1e-10);
    }
}
