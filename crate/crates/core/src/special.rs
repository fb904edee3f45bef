//! Numerically stable elementary functions shared by the integrators.

use num_complex::Complex64;
use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

pub(crate) fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(8))
}

pub(crate) fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(16))
}

/// Integral of `f` over [lo, hi] with the given Gauss-Legendre rule.
pub(crate) fn gl_integrate(rule: &(Vec<f64>, Vec<f64>), lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// ln(sinh(x)/x), accurate for all real x.
pub fn ln_sinhc(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 0.1 {
        let x2 = ax * ax;
        x2 * (1.0 / 6.0 + x2 * (-1.0 / 180.0 + x2 * (1.0 / 2835.0 + x2 * (-1.0 / 37800.0 + x2 / 467_775.0))))
    } else if ax < 20.0 {
        (ax.sinh() / ax).ln()
    } else {
        ax - LN_2 - ax.ln() + (-(-2.0 * ax).exp()).ln_1p()
    }
}

/// 1/x² − 1/sinh²(x), the regular part of the coincident thermal kernel.
pub fn inv_sq_minus_inv_sinh_sq(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 0.1 {
        let x2 = ax * ax;
        1.0 / 3.0 + x2 * (-1.0 / 15.0 + x2 * (2.0 / 189.0 + x2 * (-1.0 / 675.0 + x2 * (2.0 / 10395.0 - x2 * 1382.0 / 58_046_625.0))))
    } else if ax < 350.0 {
        let s = ax.sinh();
        1.0 / (ax * ax) - 1.0 / (s * s)
    } else {
        1.0 / (ax * ax)
    }
}

/// ln(e^a + e^b) without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// A branch of ln(sinh z) that stays finite for large |Re z|.
pub fn ln_sinh(z: Complex64) -> Complex64 {
    if z.re.abs() < 1.0 {
        z.sinh().ln()
    } else if z.re > 0.0 {
        z - LN_2 + (Complex64::new(1.0, 0.0) - (-2.0 * z).exp()).ln()
    } else {
        ln_sinh(-z) + Complex64::new(0.0, PI)
    }
}

/// Central finite-difference derivative of order 1..=5.
///
/// Orders 1 to 4 use fourth-order stencils, order 5 a second-order one.
/// The step is ε_mach^{1/(n+4)}·max(1, |t|).
pub fn finite_difference(f: &dyn Fn(f64) -> f64, t: f64, order: usize) -> f64 {
    const STENCILS: [&[f64]; 5] = [
        &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
        &[-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
        &[1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0],
        &[-1.0 / 6.0, 2.0, -13.0 / 2.0, 28.0 / 3.0, -13.0 / 2.0, 2.0, -1.0 / 6.0],
        &[-0.5, 2.0, -2.5, 0.0, 2.5, -2.0, 0.5],
    ];
    assert!((1..=5).contains(&order), "finite-difference order {order} unsupported");
    let h = f64::EPSILON.powf(1.0 / (order as f64 + 4.0)) * t.abs().max(1.0);
    let stencil = STENCILS[order - 1];
    let half = (stencil.len() / 2) as i64;
    let sum: f64 = stencil
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(k, c)| c * f(t + (k as i64 - half) as f64 * h))
        .sum();
    sum / h.powi(order as i32)
}
