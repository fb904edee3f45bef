//! Single-detector response p(E, τ), intensities and the single-detector
//! closed forms.
//!
//! The general response is
//! p(E, τ) = α(E)∫dy g_σ(y)e^{−iEy}Δ⁺[x(τ+y/2), x(τ−y/2)].
//! The coincidence singularity −1/(4π²(y−i0)²) is split off and its
//! Gaussian-windowed transform is evaluated as a one-dimensional positive
//! integral; what remains is smooth on the real axis.

use crate::error::{domain, regime, require_positive, Error, Result};
use crate::quadrature::{
    eta_first_order, eta_series_term, integrate_interval, integrate_windowed, polynomial_roots, residue_sum,
    HalfPlane, Pole, PoleSet, QuadratureSpec,
};
use crate::smearing::g_unchecked;
use crate::special::{finite_difference, inv_sq_minus_inv_sinh_sq};
use crate::worldlines::{factorial, ScalarFn, SingleAxis, Worldline};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// Energy dependence α(E) of the detector coupling.
#[derive(Clone)]
pub enum Coupling {
    /// α = 1 on the band [E0 − ΔE/2, E0 + ΔE/2], zero elsewhere.
    TwoLevel { e0: f64, delta_e: f64 },
    /// α(E) = value for every E.
    Constant(f64),
    /// Piecewise-linear interpolation, zero outside the table.
    Tabulated { energies: Vec<f64>, values: Vec<f64> },
    Callable { f: ScalarFn, support: (f64, f64) },
}

impl fmt::Debug for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coupling::TwoLevel { e0, delta_e } => write!(f, "TwoLevel {{ e0: {e0}, delta_e: {delta_e} }}"),
            Coupling::Constant(v) => write!(f, "Constant({v})"),
            Coupling::Tabulated { energies, .. } => write!(f, "Tabulated({} points)", energies.len()),
            Coupling::Callable { support, .. } => write!(f, "Callable {{ support: {support:?} }}"),
        }
    }
}

impl Coupling {
    pub fn alpha(&self, e: f64) -> f64 {
        match self {
            Coupling::TwoLevel { e0, delta_e } => {
                if (e - e0).abs() <= 0.5 * delta_e * (1.0 + 1e-12) {
                    1.0
                } else {
                    0.0
                }
            }
            Coupling::Constant(v) => *v,
            Coupling::Tabulated { energies, values } => {
                let n = energies.len();
                if e < energies[0] || e > energies[n - 1] {
                    return 0.0;
                }
                let k = energies.partition_point(|x| *x <= e).clamp(1, n - 1);
                let (x0, x1) = (energies[k - 1], energies[k]);
                let t = (e - x0) / (x1 - x0);
                values[k - 1] + t * (values[k] - values[k - 1])
            }
            Coupling::Callable { f, support } => {
                if e < support.0 || e > support.1 {
                    0.0
                } else {
                    f(e)
                }
            }
        }
    }

    /// Energy interval outside which α vanishes; `None` if unbounded.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Coupling::TwoLevel { e0, delta_e } => Some((e0 - 0.5 * delta_e, e0 + 0.5 * delta_e)),
            Coupling::Constant(_) => None,
            Coupling::Tabulated { energies, .. } => Some((energies[0], energies[energies.len() - 1])),
            Coupling::Callable { support, .. } => Some(*support),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Coupling::TwoLevel { e0, delta_e } => {
                require_positive("E0", *e0)?;
                require_positive("ΔE", *delta_e)
            }
            Coupling::Constant(v) => {
                if *v >= 0.0 && v.is_finite() {
                    Ok(())
                } else {
                    Err(domain(format!("coupling must be non-negative, got {v}")))
                }
            }
            Coupling::Tabulated { energies, values } => {
                if energies.len() < 2 || energies.len() != values.len() {
                    return Err(domain("tabulated coupling needs at least two (energy, value) pairs"));
                }
                if energies.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(domain("tabulated coupling energies must be strictly increasing"));
                }
                if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(domain("tabulated coupling values must be non-negative"));
                }
                Ok(())
            }
            Coupling::Callable { f, support } => {
                if !(support.1 > support.0) {
                    return Err(domain(format!("empty coupling support {support:?}")));
                }
                for k in 0..=256 {
                    let e = support.0 + (support.1 - support.0) * k as f64 / 256.0;
                    let v = f(e);
                    if !(v >= 0.0 && v.is_finite()) {
                        return Err(domain(format!("coupling α({e}) = {v} is negative or not finite")));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Resolution timescale plus coupling spectrum.
#[derive(Debug, Clone)]
pub struct DetectorModel {
    pub sigma: f64,
    pub coupling: Coupling,
}

impl DetectorModel {
    /// Two-level detectors must satisfy ΔE·σ ≥ 10 and E0/ΔE ≥ 10.
    pub fn new(sigma: f64, coupling: Coupling) -> Result<Self> {
        require_positive("sigma", sigma)?;
        coupling.validate()?;
        if let Coupling::TwoLevel { e0, delta_e } = coupling {
            if delta_e * sigma < 10.0 {
                return Err(regime(format!(
                    "two-level band needs ΔE·σ ≥ 10 (resolvable band), got ΔE·σ = {}",
                    delta_e * sigma
                )));
            }
            if e0 / delta_e < 10.0 {
                return Err(regime(format!("two-level band needs E0/ΔE ≥ 10 (narrow band), got {}", e0 / delta_e)));
            }
        }
        Ok(Self { sigma, coupling })
    }

    /// Broadband detector with α ≡ 1.
    pub fn unit(sigma: f64) -> Result<Self> {
        Self::new(sigma, Coupling::Constant(1.0))
    }

    pub fn alpha(&self, e: f64) -> f64 {
        self.coupling.alpha(e)
    }
}

/// How a spectrum was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "quadrature")]
    Quadrature,
    #[serde(rename = "planck")]
    Planck,
    #[serde(rename = "planck+eta")]
    PlanckEta,
    #[serde(rename = "thermal")]
    Thermal,
    #[serde(rename = "residue")]
    Residue,
    #[serde(rename = "adiabatic")]
    Adiabatic,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::Planck => "planck",
            Method::PlanckEta => "planck+eta",
            Method::Thermal => "thermal",
            Method::Residue => "residue",
            Method::Adiabatic => "adiabatic",
        }
    }
}

/// A single response value with its numerical diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Response {
    pub value: f64,
    /// Quadrature error estimate (zero for closed forms).
    pub error: f64,
    /// Imaginary part left over by the quadrature; zero in exact arithmetic.
    pub imag_residual: f64,
}

impl Response {
    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0, imag_residual: 0.0 }
    }
}

/// p(E, τ) sampled on an energy grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub tau: f64,
    pub method: Method,
    /// Support of α(E), if bounded.
    pub support: Option<(f64, f64)>,
}

impl Spectrum {
    /// Evaluates `f` at every grid energy.
    pub fn sample<F>(energies: &[f64], tau: f64, method: Method, det: &DetectorModel, mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<Response>,
    {
        check_grid(energies)?;
        let mut values = Vec::with_capacity(energies.len());
        let mut errors = Vec::with_capacity(energies.len());
        for &e in energies {
            let r = f(e)?;
            values.push(r.value);
            errors.push(r.error);
        }
        Ok(Self { energies: energies.to_vec(), values, errors, tau, method, support: det.coupling.support() })
    }

    /// Checks p ≥ −10·rel_tol·max|p|.
    pub fn check_nonnegative(&self, rel_tol: f64) -> Result<()> {
        let peak = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        match self.values.iter().position(|v| *v < -10.0 * rel_tol * peak) {
            Some(k) => Err(Error::Invariant(format!(
                "negative response {} at E = {}",
                self.values[k], self.energies[k]
            ))),
            None => Ok(()),
        }
    }
}

fn check_grid(energies: &[f64]) -> Result<()> {
    if energies.is_empty() {
        return Err(domain("energy grid is empty"));
    }
    if energies.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain("energy grid must be strictly increasing"));
    }
    Ok(())
}

fn require_energy(e: f64) -> Result<()> {
    require_positive("energy", e)
}

/// √(8πσ²)/(4π²)·e^{−2σ²E²}∫₀^∞ω e^{−4σ²Eω−2σ²ω²}dω: the windowed transform of
/// the coincidence singularity −1/(4π²(y−i0)²), i.e. the response of an
/// inertial detector in the vacuum.
pub fn inertial_vacuum_response(e: f64, sigma: f64, spec: &QuadratureSpec) -> Result<Response> {
    require_positive("sigma", sigma)?;
    let prefactor = (8.0 * PI * sigma * sigma).sqrt() / (4.0 * PI * PI);
    let s2 = sigma * sigma;
    let outer = 2.0 * s2 * e * e;
    if outer > 740.0 && e > 0.0 {
        return Ok(Response::default());
    }
    let span = 60.0 / s2;
    let upper = if e > 0.0 { span / (e + (e * e + span).sqrt()) } else { -e + (e * e + span).sqrt() };
    let j = integrate_interval(
        |w| Complex64::new(w * (-outer - 4.0 * s2 * e * w - 2.0 * s2 * w * w).exp(), 0.0),
        0.0,
        upper,
        spec,
    )?;
    Ok(Response { value: prefactor * j.value.re, error: prefactor * j.error, imag_residual: 0.0 })
}

/// p(E, τ) for an arbitrary worldline by windowed quadrature.
pub fn response_general(
    w: &Worldline,
    e: f64,
    tau: f64,
    det: &DetectorModel,
    spec: &QuadratureSpec,
) -> Result<Response> {
    require_energy(e)?;
    spec.validate()?;
    let alpha = det.alpha(e);
    if alpha == 0.0 {
        return Ok(Response::default());
    }
    let sigma = det.sigma;
    let half_span = spec.window_sigmas * sigma;
    let pb = w.pullback(tau, half_span)?;
    let scale = alpha * (-pb.ln_coincident()).exp();
    let h = inertial_vacuum_response(e, sigma, spec)?;
    if let Worldline::Static { .. } = w {
        return Ok(Response { value: scale * h.value, error: scale * h.error, imag_residual: 0.0 });
    }
    let mut failure = None;
    let reg = integrate_windowed(
        |y| match pb.regular_part(y) {
            Ok(d) => Complex64::from_polar(g_unchecked(y, sigma) * d, -e * y),
            Err(err) => {
                failure.get_or_insert(err);
                Complex64::new(0.0, 0.0)
            }
        },
        spec,
        0.0,
        2.0 * sigma,
    )?;
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(Response {
        value: scale * (h.value + reg.value.re),
        error: scale * (h.error + reg.error),
        imag_residual: scale * reg.value.im,
    })
}

/// α(E)·E/(2π(e^{2πE/a} − 1)).
pub fn planck_response(e: f64, a: f64, det: &DetectorModel) -> Result<f64> {
    require_energy(e)?;
    require_positive("acceleration", a)?;
    Ok(det.alpha(e) * planck_unit(e, a))
}

pub(crate) fn planck_unit(e: f64, a: f64) -> f64 {
    e / (2.0 * PI * (2.0 * PI * e / a).exp_m1())
}

/// Planck spectrum times (1 + bracketed η-term); requires σa ≥ 3.
pub fn planck_with_correction(e: f64, a: f64, det: &DetectorModel) -> Result<f64> {
    check_series(a, det)?;
    Ok(planck_response(e, a, det)? * (1.0 + eta_series_term(e, a, det.sigma)?))
}

/// Planck spectrum times (1 + first-order η-term from the residue expansion).
pub fn planck_with_first_order_correction(e: f64, a: f64, det: &DetectorModel) -> Result<f64> {
    check_series(a, det)?;
    Ok(planck_response(e, a, det)? * (1.0 + eta_first_order(e, a, det.sigma)?))
}

fn check_series(a: f64, det: &DetectorModel) -> Result<()> {
    require_positive("acceleration", a)?;
    if det.sigma * a < 3.0 {
        return Err(Error::SeriesInvalid(format!("η-series needs σa ≥ 3, got σa = {}", det.sigma * a)));
    }
    Ok(())
}

/// Response of a static detector in a thermal bath at inverse temperature β.
pub fn thermal_static_response(e: f64, beta: f64, det: &DetectorModel, spec: &QuadratureSpec) -> Result<Response> {
    require_energy(e)?;
    require_positive("beta", beta)?;
    spec.validate()?;
    let alpha = det.alpha(e);
    if alpha == 0.0 {
        return Ok(Response::default());
    }
    let sigma = det.sigma;
    let h = inertial_vacuum_response(e, sigma, spec)?;
    let k = PI / beta;
    let c = 1.0 / (4.0 * beta * beta);
    let reg = integrate_windowed(
        |y| Complex64::from_polar(g_unchecked(y, sigma) * c * inv_sq_minus_inv_sinh_sq(k * y), -e * y),
        spec,
        0.0,
        2.0 * sigma,
    )?;
    Ok(Response {
        value: alpha * (h.value + reg.value.re),
        error: alpha * (h.error + reg.error),
        imag_residual: alpha * reg.value.im,
    })
}

/// Instantaneous Planck response for slowly varying acceleration.
///
/// Requires |ȧ|σ/a < 0.1 and aσ > 3 at τ.
pub fn adiabatic_response(e: f64, tau: f64, accel: &dyn Fn(f64) -> f64, det: &DetectorModel) -> Result<f64> {
    let a = accel(tau);
    require_positive("acceleration", a)?;
    let sigma = det.sigma;
    if a * sigma <= 3.0 {
        return Err(regime(format!("adiabatic response needs a(τ)σ > 3, got {}", a * sigma)));
    }
    let adot = finite_difference(accel, tau, 1);
    if adot.abs() * sigma / a >= 0.1 {
        return Err(regime(format!(
            "adiabatic response needs |ȧ|σ/a < 0.1, got {}",
            adot.abs() * sigma / a
        )));
    }
    planck_response(e, a, det)
}

/// Unruh temperature a(τ)/2π.
pub fn instantaneous_temperature(accel: &dyn Fn(f64) -> f64, tau: f64) -> f64 {
    accel(tau) / (2.0 * PI)
}

/// Numbers of retained odd Taylor orders beyond the first in the u and v
/// differences: Δu ≈ y·u̇·Σ_{k≤km}(u^{(2k+1)}/u̇)(y²/4)^k/(2k+1)!.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub km: usize,
    pub km_prime: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self { km: 1, km_prime: 1 }
    }
}

/// Truncated single-axis denominator at fixed τ.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedDenominator {
    /// u̇·v̇
    pub norm: f64,
    /// Q_u as a polynomial in w = y², ascending.
    pub qu: Vec<f64>,
    pub qv: Vec<f64>,
}

impl TruncatedDenominator {
    pub fn new(path: &SingleAxis, tau: f64, sigma: f64, trunc: Truncation) -> Result<Self> {
        let (udot, qu) = truncated_series(&path.u, tau, sigma, trunc.km, "u")?;
        let (vdot, qv) = truncated_series(&path.v, tau, sigma, trunc.km_prime, "v")?;
        let norm = udot * vdot;
        if !(norm > 0.0) {
            return Err(Error::Invariant(format!("u̇v̇ = {norm} is not positive at τ = {tau}")));
        }
        Ok(Self { norm, qu, qv })
    }

    /// −1/(4π²·u̇v̇·y²·Q_u(y²)·Q_v(y²)) times e^{−iEy}.
    pub fn integrand(&self, e: f64, y: Complex64) -> Complex64 {
        let w = y * y;
        let q = horner(&self.qu, w) * horner(&self.qv, w);
        -(Complex64::new(0.0, -e) * y).exp() / (4.0 * PI * PI * self.norm * w * q)
    }

    /// Poles in y: the double pole at 0 and ±√w for every root w of Q_u, Q_v.
    /// Real roots are snapped onto the axis.
    pub fn poles(&self) -> Result<PoleSet> {
        let mut poles = vec![Pole { location: Complex64::new(0.0, 0.0), order: 2 }];
        for q in [&self.qu, &self.qv] {
            for w in polynomial_roots(q)? {
                let w = if w.im.abs() <= 1e-12 * w.norm() { Complex64::new(w.re, 0.0) } else { w };
                let y = if w.im == 0.0 {
                    if w.re > 0.0 {
                        Complex64::new(w.re.sqrt(), 0.0)
                    } else {
                        Complex64::new(0.0, (-w.re).sqrt())
                    }
                } else {
                    w.sqrt()
                };
                poles.push(Pole { location: y, order: 1 });
                poles.push(Pole { location: -y, order: 1 });
            }
        }
        PoleSet::new(poles)
    }

    /// For the km = km' = 1 case: b² = 24u̇/u⃛ for u and v.
    fn two_pole_depths(&self) -> Option<(f64, f64)> {
        if self.qu.len() != 2 || self.qv.len() != 2 {
            return None;
        }
        let (cu, cv) = (self.qu[1], self.qv[1]);
        (cu > 0.0 && cv > 0.0).then(|| ((1.0 / cu).sqrt(), (1.0 / cv).sqrt()))
    }
}

fn horner(c: &[f64], x: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, k| acc * x + k)
}

fn truncated_series(
    p: &crate::worldlines::Profile,
    tau: f64,
    sigma: f64,
    km: usize,
    name: &str,
) -> Result<(f64, Vec<f64>)> {
    let d1 = p.derivative(1, tau)?;
    if d1 == 0.0 {
        return Err(Error::Invariant(format!("{name}̇ vanishes at τ = {tau}")));
    }
    let top = p.derivative(2 * km + 1, tau)?;
    let next = p.derivative(2 * km + 3, tau)?;
    let ratio = next.abs() * sigma * sigma / (4.0 * ((2 * km + 2) * (2 * km + 3)) as f64 * top.abs());
    if top == 0.0 {
        if next != 0.0 {
            return Err(regime(format!("{name}^({}) vanishes while higher orders do not", 2 * km + 1)));
        }
    } else if ratio >= 0.1 {
        return Err(regime(format!(
            "truncation at km = {km} invalid for {name}: next Taylor term at |y| = σ is {ratio:.3} of the last kept one (needs < 0.1)"
        )));
    }
    let mut q = Vec::with_capacity(km + 1);
    for k in 0..=km {
        let dk = if k == 0 { d1 } else { p.derivative(2 * k + 1, tau)? };
        q.push(dk / d1 / (4f64.powi(k as i32) * factorial(2 * k + 1)));
    }
    while q.len() > 1 && q[q.len() - 1] == 0.0 {
        q.pop();
    }
    Ok((d1, q))
}

/// Residue evaluation of the truncated single-axis response.
///
/// For km = km' = 1 with both u̇/u⃛ and v̇/v⃛ positive and distinct this is the
/// two-pole closed form; when every pole is real the response vanishes.
pub fn single_axis_response(
    path: &SingleAxis,
    e: f64,
    tau: f64,
    det: &DetectorModel,
    trunc: Truncation,
) -> Result<f64> {
    require_energy(e)?;
    let alpha = det.alpha(e);
    let den = TruncatedDenominator::new(path, tau, det.sigma, trunc)?;
    if let Some((bu, bv)) = den.two_pole_depths() {
        if (bu - bv).abs() > 1e-6 * bu.max(bv) {
            return Ok(alpha * two_pole_closed_form(e, bu, bv, den.norm));
        }
    }
    let eps = QuadratureSpec::default().epsilon(det.sigma);
    let poles = den.poles()?;
    let sum = residue_sum(|y| den.integrand(e, y), &poles, HalfPlane::Lower, eps)?;
    Ok(alpha * sum.re)
}

/// α = 1 two-pole form α/(4πu̇v̇)·[e^{−Eb_u}b_v²/b_u − e^{−Eb_v}b_u²/b_v]/(b_v² − b_u²).
pub fn two_pole_closed_form(e: f64, bu: f64, bv: f64, norm: f64) -> f64 {
    let num = (-e * bu).exp() * bv * bv / bu - (-e * bv).exp() * bu * bu / bv;
    num / (4.0 * PI * norm * (bv * bv - bu * bu))
}

/// Quadrature of the truncated single-axis integrand on the line
/// Im y = −c between the real axis and the first enclosed pole.
pub fn single_axis_truncated_quadrature(
    path: &SingleAxis,
    e: f64,
    tau: f64,
    det: &DetectorModel,
    trunc: Truncation,
    spec: &QuadratureSpec,
) -> Result<Response> {
    require_energy(e)?;
    let den = TruncatedDenominator::new(path, tau, det.sigma, trunc)?;
    let poles = den.poles()?;
    let nonzero: Vec<Complex64> = poles.poles().iter().map(|p| p.location).filter(|z| z.norm() > 0.0).collect();
    let reach = nonzero.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0 / e);
    let depth = nonzero.iter().filter(|z| z.im < 0.0).map(|z| -z.im).fold(f64::INFINITY, f64::min);
    let c = if depth.is_finite() { 0.5 * depth } else { 0.5 * reach };
    let half = 200.0 * reach;
    let alpha = det.alpha(e);
    let r = integrate_interval(|x| den.integrand(e, Complex64::new(x, -c)), -half, half, spec)?;
    Ok(Response { value: alpha * r.value.re, error: alpha * r.error, imag_residual: alpha * r.value.im })
}

/// Result of an energy integral over a sampled spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intensity {
    pub value: f64,
    /// Set when the grid stops before the spectrum has decayed to 1e-12 of
    /// its peak and before the edge of the coupling support.
    pub tail_truncated: bool,
}

/// I = ∫dE E p(E) over the grid (Simpson on uniform grids with an odd
/// number of points, trapezoid otherwise).
pub fn intensity(s: &Spectrum) -> Result<Intensity> {
    check_grid(&s.energies)?;
    if s.energies.len() != s.values.len() {
        return Err(domain("spectrum energies and values differ in length"));
    }
    let n = s.energies.len();
    if n < 2 {
        return Err(domain("intensity needs at least two grid points"));
    }
    let f: Vec<f64> = s.energies.iter().zip(&s.values).map(|(e, p)| e * p).collect();
    let h = (s.energies[n - 1] - s.energies[0]) / (n - 1) as f64;
    let uniform = s.energies.iter().enumerate().all(|(k, e)| (e - (s.energies[0] + k as f64 * h)).abs() <= 1e-9 * h);
    let value = if uniform && n % 2 == 1 {
        let inner: f64 = f[1..n - 1].iter().enumerate().map(|(k, v)| if k % 2 == 0 { 4.0 * v } else { 2.0 * v }).sum();
        h / 3.0 * (f[0] + f[n - 1] + inner)
    } else {
        s.energies.windows(2).zip(f.windows(2)).map(|(e, v)| 0.5 * (e[1] - e[0]) * (v[0] + v[1])).sum()
    };
    let peak = s.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let edge_small = |k: usize| s.values[k].abs() <= 1e-12 * peak;
    let (lo_ok, hi_ok) = match s.support {
        Some((lo, hi)) => (s.energies[0] <= lo || edge_small(0), s.energies[n - 1] >= hi || edge_small(n - 1)),
        None => (s.energies[0] <= 0.0 || edge_small(0), edge_small(n - 1)),
    };
    Ok(Intensity { value, tail_truncated: !(lo_ok && hi_ok) })
}

/// ∫dE α(E)·E·planck(E) over the coupling support, or over (0, ∞) for
/// unbounded couplings.
pub fn planck_intensity(a: f64, det: &DetectorModel, spec: &QuadratureSpec) -> Result<f64> {
    require_positive("acceleration", a)?;
    let (lo, hi) = det.coupling.support().unwrap_or((0.0, 40.0 * a / (2.0 * PI)));
    let r = integrate_interval(
        |e| {
            let v = if e > 0.0 { e * det.alpha(e) * planck_unit(e, a) } else { 0.0 };
            Complex64::new(v, 0.0)
        },
        lo.max(0.0),
        hi,
        spec,
    )?;
    Ok(r.value.re)
}
