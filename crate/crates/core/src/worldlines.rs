//! Timelike worldlines in Minkowski space and their pulled-back intervals.
//!
//! Besides positions and derivatives, every worldline can produce a
//! [`Pullback`] at proper time τ: the function
//! q(y) = ln[σ²(x(τ+y/2), x(τ−y/2)) / (c·y²)] with c fixed so that q(0) = 0.
//! The response integrals only ever need q, which is computed without
//! forming the (possibly astronomically large) coordinates themselves.

use crate::error::{domain, require_positive, Error, Result};
use crate::special::{finite_difference, gl16, gl8, gl_integrate, ln_sinhc, log_add_exp};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

/// A point of Minkowski space, signature (+,−,−,−).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Event {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl Event {
    pub const fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Self { x0, x1, x2, x3 }
    }

    pub fn spatial_norm_sq(&self) -> f64 {
        self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3
    }
}

impl Add for Event {
    type Output = Event;
    fn add(self, o: Event) -> Event {
        Event::new(self.x0 + o.x0, self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3)
    }
}

impl Sub for Event {
    type Output = Event;
    fn sub(self, o: Event) -> Event {
        Event::new(self.x0 - o.x0, self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3)
    }
}

impl Mul<f64> for Event {
    type Output = Event;
    fn mul(self, s: f64) -> Event {
        Event::new(self.x0 * s, self.x1 * s, self.x2 * s, self.x3 * s)
    }
}

/// (Δx⁰)² − |Δx⃗|².
pub fn interval_squared(e1: &Event, e2: &Event) -> f64 {
    let d = *e1 - *e2;
    d.x0 * d.x0 - d.spatial_norm_sq()
}

/// Proper time a light signal needs between two co-accelerated detectors at
/// proper separation `d`: r = (2/a)·asinh(ad/2).
pub fn light_delay(a: f64, d: f64) -> Result<f64> {
    require_positive("acceleration", a)?;
    if !(d >= 0.0 && d.is_finite()) {
        return Err(domain(format!("separation must be non-negative, got {d}")));
    }
    Ok(2.0 / a * (0.5 * a * d).asinh())
}

/// Geometry of a uniformly accelerated detector pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairGeometry {
    pub a: f64,
    pub d: f64,
    pub r: f64,
}

impl PairGeometry {
    pub fn new(a: f64, d: f64) -> Result<Self> {
        Ok(Self { a, d, r: light_delay(a, d)? })
    }
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A light-cone coordinate u(τ) or v(τ) of a single-axis worldline.
#[derive(Clone)]
pub enum Profile {
    /// amplitude·e^{rate·τ}
    Exponential { amplitude: f64, rate: f64 },
    /// Σ coeffs[k]·τ^k
    Polynomial { coeffs: Vec<f64> },
    /// Arbitrary smooth function; derivatives by finite differences.
    Callable(ScalarFn),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Exponential { amplitude, rate } => {
                write!(f, "Exponential {{ amplitude: {amplitude}, rate: {rate} }}")
            }
            Profile::Polynomial { coeffs } => write!(f, "Polynomial {{ coeffs: {coeffs:?} }}"),
            Profile::Callable(_) => write!(f, "Callable"),
        }
    }
}

impl Profile {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Profile::Exponential { amplitude, rate } => amplitude * (rate * t).exp(),
            Profile::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
            Profile::Callable(f) => f(t),
        }
    }

    /// n-th derivative. Callable profiles support n ≤ 5.
    pub fn derivative(&self, n: usize, t: f64) -> Result<f64> {
        match self {
            Profile::Exponential { amplitude, rate } => Ok(amplitude * rate.powi(n as i32) * (rate * t).exp()),
            Profile::Polynomial { coeffs } => {
                let mut acc = 0.0;
                for (k, c) in coeffs.iter().enumerate().skip(n).rev() {
                    let falling: f64 = ((k - n + 1)..=k).map(|j| j as f64).product();
                    acc = acc * t + c * falling;
                }
                Ok(acc)
            }
            Profile::Callable(f) => match n {
                0 => Ok(f(t)),
                1..=5 => Ok(finite_difference(f.as_ref(), t, n)),
                _ => Err(domain(format!(
                    "callable profiles provide derivatives up to order 5, requested {n}"
                ))),
            },
        }
    }

    /// ln[(u(t+y/2) − u(t−y/2)) / (y·u̇(t))], stable as y → 0.
    pub fn ln_difference_ratio(&self, t: f64, y: f64) -> Result<f64> {
        let ratio_ln = match self {
            Profile::Exponential { rate, .. } => return Ok(ln_sinhc(0.5 * rate * y)),
            Profile::Polynomial { coeffs } => {
                let udot = self.derivative(1, t)?;
                let mut sum = 0.0;
                let mut k = 1;
                while 2 * k + 1 < coeffs.len() {
                    let dn = self.derivative(2 * k + 1, t)?;
                    sum += dn * (0.5 * y).powi(2 * k as i32) / factorial(2 * k + 1);
                    k += 1;
                }
                let rel = sum / udot;
                if !(rel > -1.0) {
                    return Err(Error::Invariant(format!(
                        "light-cone coordinate is not monotone on [{}, {}]",
                        t - 0.5 * y.abs(),
                        t + 0.5 * y.abs()
                    )));
                }
                rel.ln_1p()
            }
            Profile::Callable(f) => {
                let udot = finite_difference(f.as_ref(), t, 1);
                let switch = 1e-2 * t.abs().max(1.0);
                if y.abs() < switch {
                    let u3 = finite_difference(f.as_ref(), t, 3);
                    (u3 * y * y / (24.0 * udot)).ln_1p()
                } else {
                    let r = (f(t + 0.5 * y) - f(t - 0.5 * y)) / (y * udot);
                    if !(r > 0.0) {
                        return Err(Error::Invariant(format!(
                            "light-cone coordinate is not monotone around τ = {t}"
                        )));
                    }
                    r.ln()
                }
            }
        };
        Ok(ratio_ln)
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Worldline along a single spatial axis in light-cone coordinates
/// u = x⁰ + x¹, v = x⁰ − x¹, normalized so that u̇v̇ = 1.
#[derive(Debug, Clone)]
pub struct SingleAxis {
    pub u: Profile,
    pub v: Profile,
    window: (f64, f64),
}

impl SingleAxis {
    pub fn new(u: Profile, v: Profile) -> Self {
        Self { u, v, window: (f64::NEG_INFINITY, f64::INFINITY) }
    }

    pub fn with_window(mut self, lo: f64, hi: f64) -> Self {
        self.window = (lo, hi);
        self
    }

    /// The uniformly accelerated path u = e^{aτ}/a, v = −e^{−aτ}/a.
    pub fn exponential(a: f64) -> Result<Self> {
        require_positive("acceleration", a)?;
        Ok(Self::new(
            Profile::Exponential { amplitude: 1.0 / a, rate: a },
            Profile::Exponential { amplitude: -1.0 / a, rate: -a },
        ))
    }

    /// u̇(τ)·v̇(τ), equal to 1 for a proper-time parametrization.
    pub fn normalization(&self, tau: f64) -> Result<f64> {
        Ok(self.u.derivative(1, tau)? * self.v.derivative(1, tau)?)
    }
}

/// Linear motion with a prescribed proper acceleration a(τ).
///
/// The rapidity θ(τ) = ∫a and the coordinates are tabulated once on a grid
/// covering the evaluation window; x(0) = 0 and θ(0) = 0 when 0 lies in the
/// window, otherwise at the window edge closest to 0. When |θ| exceeds 700
/// somewhere in the window the coordinates are not representable; pullbacks
/// still work, while positions and derivatives report a domain error there.
#[derive(Clone)]
pub struct VariableAcceleration {
    accel: ScalarFn,
    window: (f64, f64),
    cell: f64,
    accel_scale: f64,
    theta: Vec<f64>,
    x0: Vec<f64>,
    x1: Vec<f64>,
}

impl fmt::Debug for VariableAcceleration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VariableAcceleration")
            .field("window", &self.window)
            .field("cell", &self.cell)
            .finish()
    }
}

impl VariableAcceleration {
    pub fn new(accel: ScalarFn, window: (f64, f64)) -> Result<Self> {
        let (lo, hi) = window;
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(domain(format!("evaluation window [{lo}, {hi}] must be finite and non-empty")));
        }
        let span = hi - lo;
        let mut accel_scale: f64 = 1.0 / span;
        for k in 0..=2000 {
            let a = accel(lo + span * k as f64 / 2000.0);
            if !a.is_finite() {
                return Err(domain("acceleration profile returned a non-finite value"));
            }
            accel_scale = accel_scale.max(a.abs());
        }
        let cell = (0.25 / accel_scale).min(span / 16.0);
        let cells = (span / cell).ceil() as usize;
        let cell = span / cells as f64;

        let mut theta_raw = vec![0.0; cells + 1];
        for k in 0..cells {
            let t0 = lo + k as f64 * cell;
            theta_raw[k + 1] = theta_raw[k] + gl_integrate(gl16(), t0, t0 + cell, |s| accel(s));
        }
        let mut me = Self {
            accel,
            window,
            cell,
            accel_scale,
            theta: theta_raw,
            x0: vec![0.0; cells + 1],
            x1: vec![0.0; cells + 1],
        };
        let tau_ref = 0.0f64.clamp(lo, hi);
        let shift = me.rapidity_unchecked(tau_ref);
        for th in me.theta.iter_mut() {
            *th -= shift;
        }
        if me.theta.iter().any(|t| t.abs() > 700.0) {
            // pullbacks only need rapidity differences; coordinates would overflow
            me.x0.clear();
            me.x1.clear();
            return Ok(me);
        }
        // accumulate outward from the reference cell so that no large
        // coordinates are ever subtracted from each other
        let (k_ref, t_ref) = me.locate(tau_ref);
        let (c, s) = me.cell_position_integrals(t_ref, me.theta[k_ref], tau_ref - t_ref);
        me.x0[k_ref] = -c;
        me.x1[k_ref] = -s;
        for k in k_ref..cells {
            let (c, s) = me.cell_position_integrals(lo + k as f64 * cell, me.theta[k], cell);
            me.x0[k + 1] = me.x0[k] + c;
            me.x1[k + 1] = me.x1[k] + s;
        }
        for k in (0..k_ref).rev() {
            let (c, s) = me.cell_position_integrals(lo + k as f64 * cell, me.theta[k], cell);
            me.x0[k] = me.x0[k + 1] - c;
            me.x1[k] = me.x1[k + 1] - s;
        }
        Ok(me)
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn acceleration(&self, tau: f64) -> f64 {
        (self.accel)(tau)
    }

    pub fn acceleration_fn(&self) -> &ScalarFn {
        &self.accel
    }

    fn locate(&self, tau: f64) -> (usize, f64) {
        let k = (((tau - self.window.0) / self.cell).floor().max(0.0) as usize).min(self.theta.len() - 2);
        (k, self.window.0 + k as f64 * self.cell)
    }

    fn rapidity_unchecked(&self, tau: f64) -> f64 {
        let (k, t0) = self.locate(tau);
        self.theta[k] + gl_integrate(gl16(), t0, tau, |s| (self.accel)(s))
    }

    /// ∫ (cosh θ, sinh θ) over [t0, t0 + len] given θ(t0) = th0.
    fn cell_position_integrals(&self, t0: f64, th0: f64, len: f64) -> (f64, f64) {
        let rule = gl8();
        let half = 0.5 * len;
        let mut c = 0.0;
        let mut s = 0.0;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            let t = t0 + half * (1.0 + x);
            let th = th0 + gl_integrate(rule, t0, t, |q| (self.accel)(q));
            c += w * th.cosh();
            s += w * th.sinh();
        }
        (c * half, s * half)
    }

    fn raw_position(&self, tau: f64) -> (f64, f64) {
        if self.x0.is_empty() {
            return (f64::NAN, f64::NAN);
        }
        let (k, t0) = self.locate(tau);
        let (c, s) = self.cell_position_integrals(t0, self.theta[k], tau - t0);
        (self.x0[k] + c, self.x1[k] + s)
    }

    pub fn rapidity(&self, tau: f64) -> f64 {
        self.rapidity_unchecked(tau)
    }
}

/// A timelike worldline.
#[derive(Debug, Clone)]
pub enum Worldline {
    /// x(τ) = (sinh(aτ)/a, (cosh(aτ)−1)/a, 0, 0) + offset.
    UniformAcceleration { a: f64, offset: Event },
    Static { position: Event },
    VariableAcceleration(Box<VariableAcceleration>),
    SingleAxis(SingleAxis),
}

impl Worldline {
    pub fn uniform(a: f64) -> Result<Self> {
        Self::uniform_with_offset(a, Event::default())
    }

    pub fn uniform_with_offset(a: f64, offset: Event) -> Result<Self> {
        require_positive("acceleration", a)?;
        Ok(Worldline::UniformAcceleration { a, offset })
    }

    /// Two co-accelerated detectors separated by proper distance d along x².
    pub fn uniform_pair(a: f64, d: f64) -> Result<(Self, Self)> {
        light_delay(a, d)?;
        Ok((Self::uniform(a)?, Self::uniform_with_offset(a, Event::new(0.0, 0.0, d, 0.0))?))
    }

    pub fn stationary(position: Event) -> Self {
        Worldline::Static { position }
    }

    pub fn variable(accel: ScalarFn, window: (f64, f64)) -> Result<Self> {
        Ok(Worldline::VariableAcceleration(Box::new(VariableAcceleration::new(accel, window)?)))
    }

    /// Proper-time interval on which the worldline can be evaluated.
    pub fn window(&self) -> (f64, f64) {
        match self {
            Worldline::UniformAcceleration { a, .. } => (-700.0 / a, 700.0 / a),
            Worldline::Static { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Worldline::VariableAcceleration(v) => v.window,
            Worldline::SingleAxis(s) => s.window,
        }
    }

    fn check_in_window(&self, tau: f64) -> Result<()> {
        let (lo, hi) = self.window();
        if tau.is_finite() && tau >= lo && tau <= hi {
            Ok(())
        } else {
            Err(domain(format!("proper time {tau} outside the evaluation window [{lo}, {hi}]")))
        }
    }

    pub fn position(&self, tau: f64) -> Result<Event> {
        self.check_in_window(tau)?;
        let p = match self {
            Worldline::UniformAcceleration { a, offset } => {
                let half = 0.5 * a * tau;
                Event::new((a * tau).sinh() / a, 2.0 * half.sinh().powi(2) / a, 0.0, 0.0) + *offset
            }
            Worldline::Static { position } => Event::new(position.x0 + tau, position.x1, position.x2, position.x3),
            Worldline::VariableAcceleration(v) => {
                let (x0, x1) = v.raw_position(tau);
                Event::new(x0, x1, 0.0, 0.0)
            }
            Worldline::SingleAxis(s) => {
                let (u, v) = (s.u.value(tau), s.v.value(tau));
                Event::new(0.5 * (u + v), 0.5 * (u - v), 0.0, 0.0)
            }
        };
        if [p.x0, p.x1, p.x2, p.x3].iter().all(|c| c.is_finite()) {
            Ok(p)
        } else {
            Err(domain(format!("coordinates overflow at τ = {tau}")))
        }
    }

    /// ẋ, ẍ, x⃛ up to `order` (1 to 3).
    pub fn derivatives(&self, tau: f64, order: usize) -> Result<Vec<Event>> {
        if !(1..=3).contains(&order) {
            return Err(domain(format!("derivative order must be 1, 2 or 3, got {order}")));
        }
        self.check_in_window(tau)?;
        let all = match self {
            Worldline::UniformAcceleration { a, .. } => {
                let (c, s) = ((a * tau).cosh(), (a * tau).sinh());
                vec![
                    Event::new(c, s, 0.0, 0.0),
                    Event::new(a * s, a * c, 0.0, 0.0),
                    Event::new(a * a * c, a * a * s, 0.0, 0.0),
                ]
            }
            Worldline::Static { .. } => vec![Event::default(); 3],
            Worldline::VariableAcceleration(v) => {
                let th = v.rapidity(tau);
                let a = v.acceleration(tau);
                let adot = finite_difference(v.accel.as_ref(), tau, 1);
                let (c, s) = (th.cosh(), th.sinh());
                vec![
                    Event::new(c, s, 0.0, 0.0),
                    Event::new(a * s, a * c, 0.0, 0.0),
                    Event::new(adot * s + a * a * c, adot * c + a * a * s, 0.0, 0.0),
                ]
            }
            Worldline::SingleAxis(sa) => {
                let mut out = Vec::with_capacity(3);
                for n in 1..=order {
                    let (u, v) = (sa.u.derivative(n, tau)?, sa.v.derivative(n, tau)?);
                    out.push(Event::new(0.5 * (u + v), 0.5 * (u - v), 0.0, 0.0));
                }
                out
            }
        };
        if all.iter().take(order).any(|e| !(e.x0.is_finite() && e.x1.is_finite())) {
            return Err(domain(format!("derivatives overflow at τ = {tau}")));
        }
        Ok(all.into_iter().take(order).collect())
    }

    /// (ẋ⁰)² − |ẋ⃗|² − 1.
    pub fn normalization_residual(&self, tau: f64) -> Result<f64> {
        let v = self.derivatives(tau, 1)?[0];
        Ok(v.x0 * v.x0 - v.spatial_norm_sq() - 1.0)
    }

    /// Proper time at which x⁰(τ) = t.
    pub fn proper_time_of_coordinate_time(&self, t: f64) -> Result<f64> {
        match self {
            Worldline::UniformAcceleration { a, offset } => {
                let tau = (a * (t - offset.x0)).asinh() / a;
                self.check_in_window(tau)?;
                Ok(tau)
            }
            Worldline::Static { position } => Ok(t - position.x0),
            _ => self.solve_coordinate_time(t),
        }
    }

    fn solve_coordinate_time(&self, t: f64) -> Result<f64> {
        let (wlo, whi) = self.window();
        let x0 = |tau: f64| -> Result<f64> { Ok(self.position(tau)?.x0) };
        let (mut lo, mut hi) = if wlo.is_finite() && whi.is_finite() {
            (wlo, whi)
        } else {
            let mut half = 1.0;
            loop {
                let (l, h) = (-half, half);
                if x0(l)? <= t && x0(h)? >= t {
                    break (l, h);
                }
                half *= 2.0;
                if half > 1e8 {
                    return Err(domain(format!("coordinate time {t} not reached within |τ| < 1e8")));
                }
            }
        };
        for k in 0..=256 {
            let tau = lo + (hi - lo) * k as f64 / 256.0;
            if self.derivatives(tau, 1)?[0].x0 <= 0.0 {
                return Err(Error::Invariant(format!("x⁰ is not increasing at τ = {tau}")));
            }
        }
        let (flo, fhi) = (x0(lo)? - t, x0(hi)? - t);
        if flo > 0.0 || fhi < 0.0 {
            return Err(domain(format!("coordinate time {t} not reached inside the window")));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if x0(mid)? < t {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-13 * mid.abs().max(1.0) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Pulled-back interval around τ, valid for |y| ≤ 2·half_span.
    pub fn pullback(&self, tau: f64, half_span: f64) -> Result<Pullback<'_>> {
        self.check_in_window(tau - half_span)?;
        self.check_in_window(tau + half_span)?;
        let kind = match self {
            Worldline::UniformAcceleration { a, .. } => PullbackKind::Uniform { a: *a },
            Worldline::Static { .. } => PullbackKind::Inertial,
            Worldline::VariableAcceleration(v) => PullbackKind::Variable(RapidityTable::new(v, tau, half_span)),
            Worldline::SingleAxis(sa) => {
                let norm = sa.normalization(tau)?;
                if !(norm > 0.0) {
                    return Err(Error::Invariant(format!("u̇v̇ = {norm} is not positive at τ = {tau}")));
                }
                PullbackKind::SingleAxis { path: sa, tau, ln_norm: norm.ln() }
            }
        };
        let timescale = match &kind {
            PullbackKind::Uniform { a } => 1.0 / a,
            PullbackKind::Variable(t) => 1.0 / t.accel_scale,
            PullbackKind::SingleAxis { path, tau, .. } => {
                let ud = path.u.derivative(1, *tau)?;
                let u3 = path.u.derivative(3, *tau)?;
                if u3 == 0.0 { 1.0 } else { (ud / u3).abs().sqrt() }
            }
            PullbackKind::Inertial => 1.0,
        };
        Ok(Pullback { kind, half_span, timescale })
    }
}

/// Pulled-back interval σ²(τ+y/2, τ−y/2) = c·y²·e^{q(y)} with q(0) = 0.
#[derive(Debug)]
pub struct Pullback<'a> {
    kind: PullbackKind<'a>,
    half_span: f64,
    timescale: f64,
}

#[derive(Debug)]
enum PullbackKind<'a> {
    Inertial,
    Uniform { a: f64 },
    Variable(RapidityTable<'a>),
    SingleAxis { path: &'a SingleAxis, tau: f64, ln_norm: f64 },
}

impl Pullback<'_> {
    /// ln c, the log of the y → 0 coefficient of σ²/y² (zero for
    /// proper-time parametrizations up to rounding).
    pub fn ln_coincident(&self) -> f64 {
        match &self.kind {
            PullbackKind::SingleAxis { ln_norm, .. } => *ln_norm,
            _ => 0.0,
        }
    }

    /// q(y).
    pub fn log_ratio(&self, y: f64) -> Result<f64> {
        if y.abs() > 2.0 * self.half_span * (1.0 + 1e-12) {
            return Err(domain(format!("|y| = {} exceeds the pullback span", y.abs())));
        }
        Ok(match &self.kind {
            PullbackKind::Inertial => 0.0,
            PullbackKind::Uniform { a } => 2.0 * ln_sinhc(0.5 * a * y),
            PullbackKind::Variable(t) => t.log_ratio(y.abs()),
            PullbackKind::SingleAxis { path, tau, .. } => {
                path.u.ln_difference_ratio(*tau, y)? + path.v.ln_difference_ratio(*tau, y)?
            }
        })
    }

    /// (1 − e^{−q(y)})/(4π²y²): c times the part of −1/(4π²σ²) left after
    /// removing the coincidence singularity −1/(4π²c·y²). At y = 0 the
    /// limit is approached at a tiny offset.
    pub fn regular_part(&self, y: f64) -> Result<f64> {
        let y = if y == 0.0 { 1e-4 * self.timescale } else { y };
        if let PullbackKind::Inertial = self.kind {
            return Ok(0.0);
        }
        let q = self.log_ratio(y)?;
        Ok(-(-q).exp_m1() / (4.0 * std::f64::consts::PI.powi(2) * y * y))
    }
}

/// Per-τ tables of δ(s) = θ(s) − θ(τ) and of ln∫e^{±δ} outward from τ.
struct RapidityTable<'a> {
    accel: &'a ScalarFn,
    accel_scale: f64,
    tau: f64,
    h: f64,
    forward: Side,
    backward: Side,
}

impl fmt::Debug for RapidityTable<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RapidityTable").field("tau", &self.tau).field("h", &self.h).finish()
    }
}

struct Side {
    dir: f64,
    delta: Vec<f64>,
    ln_plus: Vec<f64>,
    ln_minus: Vec<f64>,
}

impl<'a> RapidityTable<'a> {
    fn new(v: &'a VariableAcceleration, tau: f64, half_span: f64) -> Self {
        let h = v.cell;
        let cells = (half_span / h).ceil() as usize + 1;
        let build = |dir: f64| -> Side {
            let mut side = Side {
                dir,
                delta: Vec::with_capacity(cells + 1),
                ln_plus: Vec::with_capacity(cells + 1),
                ln_minus: Vec::with_capacity(cells + 1),
            };
            side.delta.push(0.0);
            side.ln_plus.push(f64::NEG_INFINITY);
            side.ln_minus.push(f64::NEG_INFINITY);
            for k in 0..cells {
                let t0 = k as f64 * h;
                let d0 = side.delta[k];
                let (lp, lm) = partial_exponentials(&v.accel, tau, dir, t0, h);
                side.ln_plus.push(log_add_exp(side.ln_plus[k], d0 + lp));
                side.ln_minus.push(log_add_exp(side.ln_minus[k], -d0 + lm));
                let inc = gl_integrate(gl16(), t0, t0 + h, |t| (v.accel)(tau + dir * t));
                side.delta.push(d0 + dir * inc);
            }
            side
        };
        Self {
            accel: &v.accel,
            accel_scale: v.accel_scale,
            tau,
            h,
            forward: build(1.0),
            backward: build(-1.0),
        }
    }

    /// (ln∫₀ᵗ e^{δ}, ln∫₀ᵗ e^{−δ}) along one side.
    fn ln_cumulative(&self, side: &Side, t: f64) -> (f64, f64) {
        let k = ((t / self.h).floor() as usize).min(side.delta.len() - 2);
        let t0 = k as f64 * self.h;
        if t <= t0 {
            return (side.ln_plus[k], side.ln_minus[k]);
        }
        let d0 = side.delta[k];
        let (lp, lm) = partial_exponentials(self.accel, self.tau, side.dir, t0, t - t0);
        (log_add_exp(side.ln_plus[k], d0 + lp), log_add_exp(side.ln_minus[k], -d0 + lm))
    }

    fn log_ratio(&self, y: f64) -> f64 {
        let t = 0.5 * y;
        if y <= self.h {
            // m± − 1 = mean of expm1(±δ) over [τ − t, τ + t]
            let rule = gl16();
            let (mut mp, mut mm) = (0.0, 0.0);
            for (x, w) in rule.0.iter().zip(&rule.1) {
                let s = t * x;
                let d = gl_integrate(rule, 0.0, s, |q| (self.accel)(self.tau + q));
                mp += 0.5 * w * d.exp_m1();
                mm += 0.5 * w * (-d).exp_m1();
            }
            return mp.ln_1p() + mm.ln_1p();
        }
        let (fp, fm) = self.ln_cumulative(&self.forward, t);
        let (bp, bm) = self.ln_cumulative(&self.backward, t);
        log_add_exp(fp, bp) + log_add_exp(fm, bm) - 2.0 * y.ln()
    }
}

/// ln∫ e^{±(δ(t)−δ(t0))} dt over [t0, t0 + len] along direction `dir`.
fn partial_exponentials(accel: &ScalarFn, tau: f64, dir: f64, t0: f64, len: f64) -> (f64, f64) {
    let rule = gl8();
    let half = 0.5 * len;
    let (mut p, mut m) = (0.0, 0.0);
    for (x, w) in rule.0.iter().zip(&rule.1) {
        let t = t0 + half * (1.0 + x);
        let d = dir * gl_integrate(rule, t0, t, |q| accel(tau + dir * q));
        p += w * d.exp();
        m += w * (-d).exp();
    }
    ((p * half).ln(), (m * half).ln())
}

/// 6x⁵ − 15x⁴ + 10x³ clamped to [0, 1].
pub fn smootherstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

/// Acceleration ramping from a0 to a1 over [start, end] with a smootherstep.
pub fn acceleration_switch(a0: f64, a1: f64, start: f64, end: f64) -> ScalarFn {
    let width = end - start;
    Arc::new(move |t| {
        let s = if width > 0.0 { smootherstep((t - start) / width) } else if t < start { 0.0 } else { 1.0 };
        a0 + (a1 - a0) * s
    })
}

/// a0·(1 + ε·tanh(τ/T)).
pub fn acceleration_tanh_ramp(a0: f64, epsilon: f64, timescale: f64) -> ScalarFn {
    Arc::new(move |t| a0 * (1.0 + epsilon * (t / timescale).tanh()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_positions() {
        let w = Worldline::uniform(1.0).unwrap();
        assert_eq!(w.position(0.0).unwrap(), Event::default());
        let p = w.position(1.0).unwrap();
        assert_relative_eq!(p.x0, 1.175_201_193_643_801_4, max_relative = 1e-15);
        assert_relative_eq!(p.x1, 0.543_080_634_815_243_7, max_relative = 1e-14);
        let s = Worldline::stationary(Event::default());
        assert_eq!(s.position(2.5).unwrap(), Event::new(2.5, 0.0, 0.0, 0.0));
    }

    #[test]
    fn uniform_derivatives() {
        let w = Worldline::uniform(1.0).unwrap();
        assert_eq!(w.derivatives(0.0, 1).unwrap()[0], Event::new(1.0, 0.0, 0.0, 0.0));
        let w2 = Worldline::uniform(2.0).unwrap();
        assert_eq!(w2.derivatives(0.0, 2).unwrap()[1], Event::new(0.0, 2.0, 0.0, 0.0));
        assert!(w.derivatives(0.0, 4).is_err());
    }

    #[test]
    fn exponential_single_axis_is_normalized() {
        let sa = SingleAxis::exponential(1.0).unwrap();
        for tau in [-2.0, 0.0, 0.7, 3.0] {
            assert_relative_eq!(sa.normalization(tau).unwrap(), 1.0, max_relative = 1e-14);
        }
        let w = Worldline::SingleAxis(sa);
        let u = Worldline::uniform(1.0).unwrap();
        let (a, b) = (w.position(0.8).unwrap(), u.position(0.8).unwrap());
        // same hyperbola up to the constant shift x¹ → x¹ + 1/a
        assert_relative_eq!(a.x0, b.x0, max_relative = 1e-14);
        assert_relative_eq!(a.x1 - 1.0, b.x1, max_relative = 1e-13);
    }

    #[test]
    fn coordinate_time_inversion() {
        let w = Worldline::uniform(1.0).unwrap();
        assert_eq!(w.proper_time_of_coordinate_time(0.0).unwrap(), 0.0);
        assert_relative_eq!(w.proper_time_of_coordinate_time(1.175201193643801).unwrap(), 1.0, max_relative = 1e-14);
        let s = Worldline::stationary(Event::default());
        assert_eq!(s.proper_time_of_coordinate_time(5.0).unwrap(), 5.0);
        let sa = Worldline::SingleAxis(SingleAxis::exponential(0.5).unwrap());
        let t = sa.position(1.3).unwrap().x0;
        assert_relative_eq!(sa.proper_time_of_coordinate_time(t).unwrap(), 1.3, max_relative = 1e-11);
    }

    #[test]
    fn non_monotone_time_is_an_invariant_violation() {
        // u = τ − τ³/3 turns around at τ = ±1
        let u = Profile::Polynomial { coeffs: vec![0.0, 1.0, 0.0, -1.0 / 3.0] };
        let v = Profile::Polynomial { coeffs: vec![0.0, 1.0] };
        let w = Worldline::SingleAxis(SingleAxis::new(u, v).with_window(-3.0, 3.0));
        assert!(matches!(w.proper_time_of_coordinate_time(-0.5), Err(Error::Invariant(_))));
    }

    #[test]
    fn light_delay_examples() {
        assert_eq!(light_delay(1.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(light_delay(1.0, 2.0).unwrap(), 1.762_747_174_039_086, max_relative = 1e-14);
        assert_relative_eq!(light_delay(1.0, 0.001).unwrap(), 0.001, max_relative = 1e-6);
        assert!(light_delay(0.0, 1.0).is_err());
        assert!(light_delay(1.0, -1.0).is_err());
        let g = PairGeometry::new(2.0, 3.0).unwrap();
        assert_relative_eq!((g.a * g.r / 2.0).sinh(), g.a * g.d / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn interval_examples() {
        let o = Event::default();
        assert_eq!(interval_squared(&o, &o), 0.0);
        assert_eq!(interval_squared(&Event::new(1.0, 0.0, 0.0, 0.0), &o), 1.0);
        assert_eq!(interval_squared(&Event::new(0.0, 1.0, 0.0, 0.0), &o), -1.0);
    }

    #[test]
    fn window_is_enforced() {
        let v = Worldline::variable(Arc::new(|_| 1.0), (-5.0, 5.0)).unwrap();
        assert!(v.position(6.0).is_err());
        assert!(v.pullback(4.0, 2.0).is_err());
    }

    #[test]
    fn constant_variable_acceleration_matches_uniform() {
        let v = Worldline::variable(Arc::new(|_| 1.0), (-20.0, 20.0)).unwrap();
        let u = Worldline::uniform(1.0).unwrap();
        for tau in [-3.0, -0.4, 0.0, 1.1, 7.5] {
            let (pv, pu) = (v.position(tau).unwrap(), u.position(tau).unwrap());
            assert!((pv.x0 - pu.x0).abs() <= 1e-11 * pu.x0.abs().max(1.0), "τ={tau} {pv:?} {pu:?}");
            assert!((pv.x1 - pu.x1).abs() <= 1e-11 * pu.x1.abs().max(1.0), "τ={tau}");
        }
        let pbv = v.pullback(0.0, 15.0).unwrap();
        let pbu = u.pullback(0.0, 15.0).unwrap();
        for y in [1e-3, 0.1, 0.25, 0.26, 1.0, 5.0, 29.9] {
            let (qv, qu) = (pbv.log_ratio(y).unwrap(), pbu.log_ratio(y).unwrap());
            assert_relative_eq!(qv, qu, max_relative = 1e-11);
        }
    }

    #[test]
    fn pullback_matches_coordinate_interval() {
        let accel: ScalarFn = Arc::new(|t: f64| 1.0 + 0.5 * (t / 3.0).tanh());
        let w = Worldline::variable(accel, (-30.0, 30.0)).unwrap();
        let tau = 1.5;
        let pb = w.pullback(tau, 4.0).unwrap();
        for y in [0.6, 2.0, 7.0] {
            let s2 = interval_squared(&w.position(tau + y / 2.0).unwrap(), &w.position(tau - y / 2.0).unwrap());
            let q = (s2 / (y * y)).ln();
            assert_relative_eq!(pb.log_ratio(y).unwrap(), q, max_relative = 1e-9);
        }
    }

    #[test]
    fn uniform_pullback_regular_part_at_zero() {
        let w = Worldline::uniform(2.0).unwrap();
        let pb = w.pullback(0.0, 10.0).unwrap();
        let d0 = pb.regular_part(0.0).unwrap();
        assert_relative_eq!(d0, 4.0 / (48.0 * std::f64::consts::PI.powi(2)), max_relative = 1e-7);
    }

    #[test]
    fn polynomial_derivatives() {
        let p = Profile::Polynomial { coeffs: vec![1.0, 2.0, 0.0, 4.0] };
        assert_eq!(p.value(2.0), 1.0 + 4.0 + 32.0);
        assert_eq!(p.derivative(1, 2.0).unwrap(), 2.0 + 48.0);
        assert_eq!(p.derivative(3, 2.0).unwrap(), 24.0);
        assert_eq!(p.derivative(4, 2.0).unwrap(), 0.0);
    }
}
