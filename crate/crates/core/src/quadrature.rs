//! Integration engine for the smeared response integrals.
//!
//! `integrate_interval` is composite Simpson with panel doubling: every
//! refinement reuses the previous nodes, and convergence is declared when
//! two successive Simpson estimates agree. `residue_sum` evaluates contour
//! integrals of meromorphic integrands from a list of poles, computing each
//! residue with a trapezoidal Cauchy integral on a small circle.

use crate::error::{domain, Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Knobs of the windowed quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Half-width of the integration window in standard deviations of the
    /// Gaussian weight being integrated.
    pub window_sigmas: f64,
    /// Initial number of panels; doubled until convergence.
    pub panels: usize,
    pub rel_tol: f64,
    pub max_doublings: u32,
    /// Regulator ε in units of the shortest physical timescale min(σ, 1/a).
    pub eps_scale: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            window_sigmas: 12.0,
            panels: 4096,
            rel_tol: 1e-8,
            max_doublings: 16,
            eps_scale: 1e-4,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_sigmas >= 8.0) || !self.window_sigmas.is_finite() {
            return Err(domain(format!(
                "window_sigmas must be at least 8, got {}",
                self.window_sigmas
            )));
        }
        if self.panels < 2 || !self.panels.is_power_of_two() {
            return Err(domain(format!("panels must be a power of two >= 2, got {}", self.panels)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(domain(format!("rel_tol must lie in (0, 1), got {}", self.rel_tol)));
        }
        if self.max_doublings == 0 {
            return Err(domain("max_doublings must be at least 1"));
        }
        if !(self.eps_scale > 0.0 && self.eps_scale.is_finite()) {
            return Err(domain(format!("eps_scale must be positive, got {}", self.eps_scale)));
        }
        Ok(())
    }

    /// Regulator ε for a problem whose shortest timescale is `scale`.
    pub fn epsilon(&self, scale: f64) -> f64 {
        self.eps_scale * scale
    }

    /// Same spec with a different starting panel count.
    pub fn with_panels(mut self, panels: usize) -> Self {
        self.panels = panels;
        self
    }

    pub fn with_window(mut self, window_sigmas: f64) -> Self {
        self.window_sigmas = window_sigmas;
        self
    }
}

/// A converged integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    /// Magnitude of the last Simpson correction.
    pub error: f64,
    /// Panels used by the accepted estimate.
    pub panels: usize,
    /// Integral of the modulus of the integrand.
    pub l1: f64,
}

/// Absolute agreement floor in units of the integrand's L1 norm.
const ROUNDOFF_FLOOR: f64 = 1e3 * f64::EPSILON;

/// Simpson panel doubling for a vector-valued integrand on [lo, hi].
///
/// `f(x, out)` writes the `dim` components at `x`. Every component must
/// converge for the call to succeed.
pub fn integrate_interval_vec<F>(
    mut f: F,
    dim: usize,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<Vec<Integral>>
where
    F: FnMut(f64, &mut [Complex64]),
{
    spec.validate()?;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(domain(format!("invalid integration interval [{lo}, {hi}]")));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut buf = vec![zero; dim];
    let mut eval = |x: f64, buf: &mut [Complex64]| -> Result<()> {
        f(x, buf);
        if buf.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(domain(format!("integrand is not finite at {x}")));
        }
        Ok(())
    };

    let mut n = spec.panels;
    let mut h = (hi - lo) / n as f64;
    let mut ends = vec![zero; dim];
    let mut even = vec![zero; dim];
    let mut odd = vec![zero; dim];
    let mut abs_sum = vec![0.0; dim];
    for x in [lo, hi] {
        eval(x, &mut buf)?;
        for d in 0..dim {
            ends[d] += buf[d];
            abs_sum[d] += 0.5 * buf[d].norm();
        }
    }
    for k in 1..n {
        eval(lo + k as f64 * h, &mut buf)?;
        let target = if k % 2 == 0 { &mut even } else { &mut odd };
        for d in 0..dim {
            target[d] += buf[d];
            abs_sum[d] += buf[d].norm();
        }
    }
    // interior sum of the current trapezoid level
    let mut interior: Vec<Complex64> = (0..dim).map(|d| even[d] + odd[d]).collect();
    let mut trap: Vec<Complex64> = (0..dim).map(|d| h * (0.5 * ends[d] + interior[d])).collect();
    let coarse: Vec<Complex64> = (0..dim).map(|d| 2.0 * h * (0.5 * ends[d] + even[d])).collect();
    let mut simpson: Vec<Complex64> = (0..dim).map(|d| (4.0 * trap[d] - coarse[d]) / 3.0).collect();

    for doubling in 1..=spec.max_doublings {
        let mut mids = vec![zero; dim];
        for k in 0..n {
            eval(lo + (k as f64 + 0.5) * h, &mut buf)?;
            for d in 0..dim {
                mids[d] += buf[d];
                abs_sum[d] += buf[d].norm();
            }
        }
        n *= 2;
        h *= 0.5;
        let mut converged = true;
        let mut next = Vec::with_capacity(dim);
        let mut worst = 0usize;
        let mut worst_ratio = 0.0;
        for d in 0..dim {
            interior[d] += mids[d];
            let t_new = h * (0.5 * ends[d] + interior[d]);
            let s_new = (4.0 * t_new - trap[d]) / 3.0;
            let l1 = h * abs_sum[d];
            let tol = (spec.rel_tol * s_new.norm()).max(ROUNDOFF_FLOOR * l1);
            let diff = (s_new - simpson[d]).norm();
            if diff > tol {
                converged = false;
                let ratio = diff / tol.max(f64::MIN_POSITIVE);
                if ratio > worst_ratio {
                    worst_ratio = ratio;
                    worst = d;
                }
            }
            trap[d] = t_new;
            next.push((s_new, diff, l1));
        }
        if converged {
            return Ok(next
                .into_iter()
                .map(|(value, error, l1)| Integral { value, error, panels: n, l1 })
                .collect());
        }
        if doubling == spec.max_doublings {
            return Err(Error::Convergence {
                doublings: doubling,
                last: next[worst].0,
                previous: simpson[worst],
            });
        }
        for d in 0..dim {
            simpson[d] = next[d].0;
        }
    }
    unreachable!("loop returns on the final doubling")
}

/// Scalar version of [`integrate_interval_vec`].
pub fn integrate_interval<F>(mut f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64) -> Complex64,
{
    integrate_interval_vec(|x, out| out[0] = f(x), 1, lo, hi, spec).map(|v| v[0])
}

/// Integral over [center − Wσ, center + Wσ] with W = `spec.window_sigmas`.
///
/// `sigma` is the standard deviation of the Gaussian weight carried by the
/// integrand; for g_σ(y) = exp(−y²/8σ²) pass 2σ.
pub fn integrate_windowed<F>(f: F, spec: &QuadratureSpec, center: f64, sigma: f64) -> Result<Integral>
where
    F: FnMut(f64) -> Complex64,
{
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(domain(format!("window scale must be positive, got {sigma}")));
    }
    let half = spec.window_sigmas * sigma;
    integrate_interval(f, center - half, center + half, spec)
}

/// An isolated singularity of a meromorphic integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub location: Complex64,
    pub order: u32,
}

/// Poles sorted by imaginary part.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoleSet {
    poles: Vec<Pole>,
}

impl PoleSet {
    pub fn new(mut poles: Vec<Pole>) -> Result<Self> {
        for p in &poles {
            if p.order == 0 {
                return Err(domain("pole order must be at least 1"));
            }
            if !(p.location.re.is_finite() && p.location.im.is_finite()) {
                return Err(domain("pole location must be finite"));
            }
        }
        poles.sort_by(|a, b| a.location.im.total_cmp(&b.location.im));
        Ok(Self { poles })
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HalfPlane {
    Lower,
    Upper,
}

const CAUCHY_NODES: usize = 128;
const MERGE_TOL: f64 = 1e-5;

/// Real-line integral of a meromorphic `integrand` closed in `half_plane`.
///
/// Returns −2πi·ΣRes for the lower half-plane and +2πi·ΣRes for the upper.
/// Poles exactly on the real axis lie on the far side of the contour and
/// are skipped; a pole on the closing side within 10ε of the axis makes the
/// result depend on the regulator and is reported as ill-conditioned.
/// Coincident poles are merged and enclosed by one contour.
pub fn residue_sum<F>(integrand: F, poles: &PoleSet, half_plane: HalfPlane, eps: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let sign = match half_plane {
        HalfPlane::Lower => -1.0,
        HalfPlane::Upper => 1.0,
    };
    let clusters = cluster_poles(poles.poles());
    let mut total = Complex64::new(0.0, 0.0);
    for (ci, cluster) in clusters.iter().enumerate() {
        let on_axis = cluster.iter().filter(|z| z.im == 0.0).count();
        let inside = cluster.iter().filter(|z| z.im * sign > 0.0).count();
        if on_axis == cluster.len() || inside == 0 {
            continue;
        }
        if inside != cluster.len() {
            return Err(Error::IllConditioned(
                "coincident poles straddle the integration contour".into(),
            ));
        }
        if cluster.iter().any(|z| z.im.abs() <= 10.0 * eps) {
            return Err(Error::IllConditioned(format!(
                "pole at {} lies within 10ε of the real axis",
                cluster[0]
            )));
        }
        let center = cluster.iter().sum::<Complex64>() / cluster.len() as f64;
        let spread = cluster.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
        let nearest = clusters
            .iter()
            .enumerate()
            .filter(|(cj, _)| *cj != ci)
            .flat_map(|(_, other)| other.iter())
            .map(|z| (z - center).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = if nearest.is_finite() {
            0.5 * nearest
        } else {
            0.5 * center.norm().max(1e-3)
        };
        if radius <= 4.0 * spread {
            return Err(Error::IllConditioned(format!(
                "pole cluster at {center} is not separated from its neighbours"
            )));
        }
        total += cauchy_residue(&integrand, center, radius);
    }
    Ok(sign * 2.0 * PI * Complex64::i() * total)
}

fn cluster_poles(poles: &[Pole]) -> Vec<Vec<Complex64>> {
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for p in poles {
        let z = p.location;
        let scale = z.norm().max(1.0);
        match clusters
            .iter_mut()
            .find(|c| c.iter().any(|w| (w - z).norm() <= MERGE_TOL * scale))
        {
            Some(c) => c.push(z),
            None => clusters.push(vec![z]),
        }
    }
    clusters
}

fn cauchy_residue<F>(f: &F, center: Complex64, radius: f64) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    (0..CAUCHY_NODES)
        .map(|j| {
            let w = Complex64::from_polar(radius, 2.0 * PI * (j as f64 + 0.5) / CAUCHY_NODES as f64);
            f(center + w) * w
        })
        .sum::<Complex64>()
        / CAUCHY_NODES as f64
}

/// Roots of Σ c_k z^k (coefficients in ascending order) by Aberth iteration.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.last() == Some(&0.0) {
        c.pop();
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(domain("polynomial coefficients must be finite"));
    }
    let degree = c.len().saturating_sub(1);
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = c[degree];
    let monic: Vec<f64> = c.iter().map(|v| v / lead).collect();
    let bound = 1.0 + monic[..degree].iter().map(|v| v.abs()).fold(0.0, f64::max);
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(1.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for k in (0..degree).rev() {
            dp = dp * z + p;
            p = p * z + monic[k];
        }
        (p, dp)
    };
    let mut roots: Vec<Complex64> = (0..degree)
        .map(|k| Complex64::from_polar(0.5 * bound, 2.0 * PI * (k as f64 + 0.25) / degree as f64))
        .collect();
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..degree {
            let (p, dp) = eval(roots[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..degree)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (roots[i] - roots[j]))
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            roots[i] -= step;
            max_step = max_step.max(step.norm() / roots[i].norm().max(1e-300));
        }
        if max_step < 1e-15 {
            break;
        }
    }
    Ok(roots)
}

fn check_eta_domain(e: f64, a: f64, sigma: f64) -> Result<()> {
    crate::error::require_positive("a", a)?;
    crate::error::require_positive("sigma", sigma)?;
    if !(e >= 0.1 * a) {
        return Err(domain(format!(
            "correction term requires E >= 0.1a (got E = {e}, a = {a}); the a/E term diverges at E = 0"
        )));
    }
    if sigma * a <= 1.0 {
        return Err(Error::SeriesInvalid(format!("σa = {} must exceed 1", sigma * a)));
    }
    Ok(())
}

/// First-order relative correction to the Planck spectrum in η = 1/(σa)²,
/// in the bracketed form (1/σ²a²)[(π²/4)(eˣ+1)/(eˣ−1)² − πa/(4E(1−eˣ))], x = 2πE/a.
pub fn eta_series_term(e: f64, a: f64, sigma: f64) -> Result<f64> {
    check_eta_domain(e, a, sigma)?;
    let eta = 1.0 / (sigma * a).powi(2);
    let ex = (2.0 * PI * e / a).exp();
    let em1 = (2.0 * PI * e / a).exp_m1();
    Ok(eta * ((PI * PI / 4.0) * (ex + 1.0) / (em1 * em1) - PI * a / (4.0 * e * (-em1))))
}

/// First-order relative correction obtained by expanding g_σ(y) to O(y²)
/// and summing the residues of y²/sinh²(ay/2) at y = −2πin/a:
/// η[(π²/2)eˣ(eˣ+1)/(eˣ−1)² − πeˣ/(2κ(eˣ−1))] with κ = E/a.
pub fn eta_first_order(e: f64, a: f64, sigma: f64) -> Result<f64> {
    check_eta_domain(e, a, sigma)?;
    let eta = 1.0 / (sigma * a).powi(2);
    let x = 2.0 * PI * e / a;
    let kappa = e / a;
    let ex = x.exp();
    let em1 = x.exp_m1();
    Ok(eta * ((PI * PI / 2.0) * ex * (ex + 1.0) / (em1 * em1) - PI * ex / (2.0 * kappa * em1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smearing::{f_sigma, g_sigma};
    use approx::assert_relative_eq;

    #[test]
    fn spec_defaults_and_validation() {
        let s = QuadratureSpec::default();
        assert_eq!((s.window_sigmas, s.panels, s.rel_tol, s.max_doublings), (12.0, 4096, 1e-8, 16));
        assert!(s.validate().is_ok());
        assert!(s.with_window(7.9).validate().is_err());
        assert!(s.with_panels(1000).validate().is_err());
    }

    #[test]
    fn normalization_of_f_sigma() {
        let spec = QuadratureSpec::default();
        let r = integrate_windowed(|s| f_sigma(s, 1.3).unwrap().into(), &spec, 0.0, 1.3).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_fourier_transform() {
        let spec = QuadratureSpec::default();
        let sigma = 2.0;
        for e in [0.0, 0.2, 0.5] {
            let r = integrate_windowed(
                |y| g_sigma(y, sigma).unwrap() * Complex64::new(0.0, -e * y).exp(),
                &spec,
                0.0,
                2.0 * sigma,
            )
            .unwrap();
            let exact = (8.0 * PI * sigma * sigma).sqrt() * (-2.0 * sigma * sigma * e * e).exp();
            assert!((r.value.re - exact).abs() <= 1e-8 * exact, "E={e}");
            assert!(r.value.im.abs() < 1e-12);
        }
    }

    #[test]
    fn delta_normalization() {
        let spec = QuadratureSpec::default();
        let sigma = 3.0;
        let r = integrate_windowed(
            |de| ((16.0 * PI * sigma * sigma).sqrt() * (-de * de * sigma * sigma).exp()).into(),
            &spec,
            0.0,
            1.0 / (2f64.sqrt() * sigma),
        )
        .unwrap();
        assert!((r.value.re - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn non_convergence_carries_estimates() {
        let spec = QuadratureSpec { max_doublings: 2, panels: 2, ..Default::default() };
        let err = integrate_interval(|x| (1.0 / (x + 1e-9)).sqrt().into(), 0.0, 1.0, &spec).unwrap_err();
        match err {
            Error::Convergence { doublings, last, previous } => {
                assert_eq!(doublings, 2);
                assert_ne!(last, previous);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn upper_pole_gives_zero() {
        let eps = 1e-6;
        let poles = PoleSet::new(vec![Pole { location: Complex64::new(0.0, eps), order: 2 }]).unwrap();
        let e = 1.3;
        let v = residue_sum(
            |y| (Complex64::new(0.0, -e) * y).exp() / ((y - Complex64::new(0.0, eps)).powi(2)),
            &poles,
            HalfPlane::Lower,
            eps,
        )
        .unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn near_axis_enclosed_pole_is_ill_conditioned() {
        let poles = PoleSet::new(vec![Pole { location: Complex64::new(1.0, -1e-7), order: 1 }]).unwrap();
        let r = residue_sum(|y| 1.0 / (y - Complex64::new(1.0, -1e-7)), &poles, HalfPlane::Lower, 1e-7);
        assert!(matches!(r, Err(Error::IllConditioned(_))));
    }

    #[test]
    fn sinh_squared_pole_comb_reproduces_planck() {
        let (a, e) = (1.0, 0.8);
        let poles: Vec<Pole> = (1..=40)
            .map(|n| Pole { location: Complex64::new(0.0, -2.0 * PI * n as f64 / a), order: 2 })
            .collect();
        let set = PoleSet::new(poles).unwrap();
        let integrand = |y: Complex64| (Complex64::new(0.0, -e) * y).exp() / (a * y / 2.0).sinh().powi(2);
        let sum = residue_sum(integrand, &set, HalfPlane::Lower, 1e-8).unwrap();
        let p = -a * a / (16.0 * PI * PI) * sum;
        let planck = e / (2.0 * PI * (2.0 * PI * e / a).exp_m1());
        assert_relative_eq!(p.re, planck, max_relative = 1e-12);
        assert!(p.im.abs() < 1e-14);
    }

    #[test]
    fn cubic_truncated_denominator_matches_quadrature() {
        // double pole at 0 (real, above the contour) and single poles at ±i·b
        let (b, e) = (2.5, 0.9);
        let f = |y: Complex64| (Complex64::new(0.0, -e) * y).exp() / (y * y * (1.0 + y * y / (b * b)));
        let poles = PoleSet::new(vec![
            Pole { location: Complex64::new(0.0, 0.0), order: 2 },
            Pole { location: Complex64::new(0.0, b), order: 1 },
            Pole { location: Complex64::new(0.0, -b), order: 1 },
        ])
        .unwrap();
        let res = residue_sum(f, &poles, HalfPlane::Lower, 1e-8).unwrap();
        let shift = Complex64::new(0.0, -0.5 * b);
        let spec = QuadratureSpec::default().with_panels(1 << 14);
        let quad = integrate_interval(|x| f(Complex64::new(x, 0.0) + shift), -400.0, 400.0, &spec).unwrap();
        assert_relative_eq!(res.re, quad.value.re, max_relative = 1e-6);
        assert_relative_eq!(res.re, -PI / b * (-e * b).exp(), max_relative = 1e-12);
    }

    #[test]
    fn aberth_finds_roots() {
        // (z-1)(z+2)(z^2+4) = z^4 + z^3 + 2z^2 + 4z - 8
        let mut roots = polynomial_roots(&[-8.0, 4.0, 2.0, 1.0, 1.0]).unwrap();
        roots.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        let expected = [
            Complex64::new(-2.0, 0.0),
            Complex64::new(0.0, -2.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(1.0, 0.0),
        ];
        for (r, x) in roots.iter().zip(expected) {
            assert!((r - x).norm() < 1e-12, "{r} vs {x}");
        }
        assert!(polynomial_roots(&[3.0, 0.0]).unwrap().is_empty());
    }

    #[test]
    fn eta_bracket_value() {
        let v = eta_series_term(1.0, 1.0, 5.0).unwrap();
        assert_relative_eq!(v, 2.441e-4, max_relative = 1e-3);
        assert!(v > 0.0);
        assert!(eta_series_term(1.0, 1.0, 1e4).unwrap() < 1e-10);
        assert!(eta_series_term(0.0, 1.0, 5.0).is_err());
        assert!(eta_series_term(0.05, 1.0, 5.0).is_err());
        assert!(matches!(eta_series_term(1.0, 1.0, 0.5), Err(Error::SeriesInvalid(_))));
    }

    #[test]
    fn eta_first_order_value() {
        // frozen from an independent shifted-contour quadrature at σa = 50
        let v = eta_first_order(1.0, 1.0, 50.0).unwrap();
        assert_relative_eq!(v, 1.3563e-3, max_relative = 2e-3);
    }
}
