use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use udw_core::coherence::{
    g2, g_coefficient_far, g_coefficient_near, g_coefficient_thermal, resolve_regime, Regime, Source,
};
use udw_core::propagators::{accelerated_pair_wightman, thermal_pair_factor, thermal_wightman, vacuum_wightman};
use udw_core::quadrature::{integrate_interval, integrate_windowed, residue_sum, HalfPlane, Pole, PoleSet, QuadratureSpec};
use udw_core::response::{planck_response, response_general, Coupling, DetectorModel};
use udw_core::smearing::{f_sigma, factorization_residual, g_sigma, product_by_mean_and_difference};
use udw_core::worldlines::{acceleration_tanh_ramp, interval_squared, light_delay, Event, Worldline};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg(256))]

    #[test]
    fn smearing_factorizes(t in -5.0..5.0f64, s in -5.0..5.0f64, sp in -5.0..5.0f64, sigma in 0.3..4.0f64) {
        let scale = f_sigma(0.0, sigma).unwrap();
        prop_assert!(factorization_residual(t, s, sp, sigma).unwrap().abs() <= 1e-14 * scale);
        let product = f_sigma(s, sigma).unwrap() * f_sigma(sp, sigma).unwrap();
        let split = product_by_mean_and_difference(s, sp, sigma).unwrap();
        prop_assert!((product - split).abs() <= 1e-14 * scale * scale);
        prop_assert!(g_sigma(s, sigma).unwrap() <= 1.0);
    }

    #[test]
    fn vacuum_kernel_is_hermitian(
        x in prop::array::uniform4(-3.0..3.0f64),
        eps in 1e-6..1e-2f64,
    ) {
        let e = Event::new(x[0], x[1], x[2], x[3]);
        let o = Event::default();
        let k1 = vacuum_wightman(&e, &o, eps).unwrap();
        let k2 = vacuum_wightman(&o, &e, eps).unwrap();
        prop_assert!((k1.conj() - k2).norm() <= 1e-13 * k1.norm());
    }

    #[test]
    fn pair_kernels_are_hermitian_and_proportional(
        dt in 0.05..6.0f64,
        r in 0.01..3.0f64,
        beta in 1.0..10.0f64,
    ) {
        let eps = 1e-6;
        let a = 2.0 * PI / beta;
        let k = accelerated_pair_wightman(dt, a, r, eps).unwrap();
        let km = accelerated_pair_wightman(-dt, a, r, eps).unwrap();
        prop_assert!((k.conj() - km).norm() <= 1e-12 * k.norm());
        let t = thermal_wightman(dt, r, beta, eps).unwrap();
        let ratio = t / k;
        prop_assert!((ratio.re / thermal_pair_factor(r, beta) - 1.0).abs() < 1e-11);
        prop_assert!(ratio.im.abs() < 1e-11);
    }

    #[test]
    fn planck_satisfies_detailed_balance(e in 0.1..5.0f64, a in 0.2..5.0f64) {
        // p(E)/p(−E) = e^{−2πE/a} with p(−E) = α|E|/(2π(1 − e^{−2π|E|/a}))
        let det = DetectorModel::unit(50.0 / a).unwrap();
        let p = planck_response(e, a, &det).unwrap();
        let emission = e / (2.0 * PI * -(-2.0 * PI * e / a).exp_m1());
        prop_assert!((p / emission / (-2.0 * PI * e / a).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_pullback_matches_positions(a in 0.1..3.0f64, tau in -4.0..4.0f64, y in -6.0..6.0f64) {
        let w = Worldline::uniform(a).unwrap();
        let p = w.pullback(tau, 6.0).unwrap();
        let direct = interval_squared(&w.position(tau + 0.5 * y).unwrap(), &w.position(tau - 0.5 * y).unwrap());
        prop_assume!(y.abs() > 1e-3);
        let pulled = y * y * p.log_ratio(y).unwrap().exp();
        // positions cancel at the scale of their own magnitude
        let scale = ((a * (tau.abs() + 0.5 * y.abs())).cosh() / a).powi(2);
        prop_assert!((direct - pulled).abs() < 1e-9 * pulled + 1e-14 * scale, "{} vs {}", direct, pulled);
    }

    #[test]
    fn uniform_worldline_is_normalized(a in 0.01..10.0f64, tau in -20.0..20.0f64) {
        let w = Worldline::uniform(a).unwrap();
        prop_assume!((a * tau).abs() < 30.0);
        prop_assert!(w.normalization_residual(tau).unwrap().abs() < 1e-15 * (a * tau).cosh().powi(2));
    }

    #[test]
    fn light_delay_inverts(a in 0.05..5.0f64, d in 0.0..20.0f64) {
        let r = light_delay(a, d).unwrap();
        prop_assert!(((0.5 * a * r).sinh() * 2.0 / a - d).abs() <= 1e-12 * d.max(1.0));
    }

    #[test]
    fn closed_form_coefficients_are_negative_and_even(
        e in 0.5..3.0f64,
        dtau in -40.0..40.0f64,
        a in 0.5..2.0f64,
    ) {
        let near = DetectorModel::unit(20.0).unwrap();
        let far = DetectorModel::unit(0.5).unwrap();
        let sigma = 20.0;
        let f_peak = f_sigma(0.0, sigma).unwrap();
        if f_sigma(dtau, sigma).unwrap() > 1e-12 * f_peak {
            let c = g_coefficient_near(e, dtau, a, sigma, &near).unwrap();
            prop_assert!(c < 0.0);
            prop_assert_eq!(c, g_coefficient_near(e, -dtau, a, sigma, &near).unwrap());
        }
        let r = (6.0 / a).max(4.0);
        let dt = dtau / 8.0;
        let f = f_sigma(dt - r, 0.5).unwrap() + f_sigma(dt + r, 0.5).unwrap();
        if f > 1e-12 * f_sigma(0.0, 0.5).unwrap() {
            let c = g_coefficient_far(e, dt, a, r, 0.5, &far).unwrap();
            prop_assert!(c < 0.0);
            prop_assert!((c - g_coefficient_far(e, -dt, a, r, 0.5, &far).unwrap()).abs() <= 1e-15 * c.abs());
            let t = g_coefficient_thermal(e, dt, 2.0 * PI / a, r, 0.5, &far, Regime::Far).unwrap();
            prop_assert!(t < 0.0);
        }
    }

    #[test]
    fn regime_resolution_is_consistent(a in 0.1..10.0f64, r in 0.0..50.0f64, sigma in 0.1..10.0f64) {
        let source = Source::Accelerated { a, r };
        let regime = resolve_regime(&source, sigma).unwrap();
        match regime {
            Regime::Near => prop_assert!(r <= 0.01 / a),
            Regime::Far => prop_assert!(r >= 8.0 * sigma && r > 0.01 / a),
            Regime::Numeric => prop_assert!(r > 0.01 / a && r < 8.0 * sigma),
        }
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn g2_is_symmetric(dtau in 0.0..200.0f64, r in prop::sample::select(vec![0.0, 6.0])) {
        let spec = QuadratureSpec::default();
        let (sigma, det) = if r == 0.0 {
            (100.0, DetectorModel::new(100.0, Coupling::TwoLevel { e0: 10.0, delta_e: 1.0 }).unwrap())
        } else {
            (0.5, DetectorModel::new(0.5, Coupling::Tabulated { energies: vec![0.95, 1.05], values: vec![1.0, 1.0] }).unwrap())
        };
        let dt = dtau * sigma / 20.0;
        let source = Source::Accelerated { a: 1.0, r };
        let plus = g2(dt, source, &det, None, &spec).unwrap();
        let minus = g2(-dt, source, &det, None, &spec).unwrap();
        prop_assert!((plus - minus).abs() <= 1e-12);
    }

    #[test]
    fn uniform_response_is_time_translation_invariant(tau in -200.0..200.0f64, e in 0.5..2.0f64) {
        let det = DetectorModel::unit(10.0).unwrap();
        let spec = QuadratureSpec::default();
        let w = Worldline::uniform(1.0).unwrap();
        let p0 = response_general(&w, e, 0.0, &det, &spec).unwrap().value;
        let p1 = response_general(&w, e, tau, &det, &spec).unwrap().value;
        prop_assert!((p0 - p1).abs() <= 1e-12 * p0);
    }

    #[test]
    fn ramp_pullback_matches_positions(tau in -3.0..3.0f64, y in 0.01..4.0f64) {
        let w = Worldline::variable(acceleration_tanh_ramp(1.0, 0.3, 2.0), (-10.0, 10.0)).unwrap();
        let p = w.pullback(tau, 2.0).unwrap();
        let direct = interval_squared(&w.position(tau + 0.5 * y).unwrap(), &w.position(tau - 0.5 * y).unwrap());
        let pulled = y * y * p.log_ratio(y).unwrap().exp();
        prop_assert!((direct / pulled - 1.0).abs() < 1e-7, "{} vs {}", direct, pulled);
    }

    #[test]
    fn residues_match_contour_quadrature(b in 0.5..4.0f64, e in 0.2..3.0f64) {
        // e^{−iEy}/(y² + b²): closing below picks −2πi·Res at −ib = −(π/b)e^{−Eb}
        let f = |y: Complex64| (Complex64::new(0.0, -e) * y).exp() / (y * y + b * b);
        let poles = PoleSet::new(vec![
            Pole { location: Complex64::new(0.0, b), order: 1 },
            Pole { location: Complex64::new(0.0, -b), order: 1 },
        ]).unwrap();
        let res = residue_sum(f, &poles, HalfPlane::Lower, 1e-8).unwrap();
        let exact = PI / b * (-e * b).exp();
        prop_assert!((res.re.abs() - exact).abs() <= 1e-9 * exact);
        let quad = integrate_interval(|x| f(Complex64::new(x, 0.0)), -4000.0, 4000.0, &QuadratureSpec::default().with_panels(1 << 16)).unwrap();
        prop_assert!((quad.value.re - exact).abs() <= 1e-3 * exact + 1e-6);
    }
}

#[test]
fn gaussian_window_integrates_to_one() {
    let spec = QuadratureSpec::default();
    for sigma in [0.1, 1.0, 30.0] {
        let r = integrate_windowed(|s| f_sigma(s, sigma).unwrap().into(), &spec, 0.0, sigma).unwrap();
        assert_relative_eq!(r.value.re, 1.0, max_relative = 1e-12);
    }
}

#[test]
fn window_and_regulator_robustness() {
    let det = DetectorModel::unit(40.0).unwrap();
    let w = Worldline::uniform(1.0).unwrap();
    let base = QuadratureSpec::default();
    let p = response_general(&w, 1.0, 0.0, &det, &base).unwrap().value;
    let wide = response_general(&w, 1.0, 0.0, &det, &base.with_window(16.0)).unwrap().value;
    assert!((p - wide).abs() <= 10.0 * base.rel_tol * p);
    let half_eps = QuadratureSpec { eps_scale: 0.5 * base.eps_scale, ..base };
    let q = response_general(&w, 1.0, 0.0, &det, &half_eps).unwrap().value;
    assert!((p - q).abs() <= 10.0 * base.rel_tol * p);
}

#[test]
fn numeric_and_closed_regimes_for_thermal_pairs() {
    let det = DetectorModel::unit(0.5).unwrap();
    let beta = 2.0 * PI;
    assert_eq!(resolve_regime(&Source::Thermal { beta, r: 2.0 }, 0.5).unwrap(), Regime::Numeric);
    assert!(g_coefficient_thermal(1.0, 2.0, beta, 2.0, 0.5, &det, Regime::Far).is_err());
    let numeric = g_coefficient_thermal(1.0, 2.0, beta, 2.0, 0.5, &det, Regime::Numeric).unwrap();
    assert!(numeric.is_finite());
}
