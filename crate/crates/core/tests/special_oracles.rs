use deltaprime::special::*;
use num_complex::Complex64;

/// `∫₀^z e^{iu²} du` by composite Simpson.
fn simpson_fresnel(z: f64, m: usize) -> Complex64 {
    let h = z / m as f64;
    let f = |u: f64| Complex64::new(0.0, u * u).exp();
    let mut acc = f(0.0) + f(z);
    for k in 1..m {
        acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Leading terms of `G(z) ~ e^{iz²}(i/2z + 1/4z³ − 3i/8z⁵)`.
fn tail_asymptotic(z: f64) -> Complex64 {
    let p = Complex64::new(0.0, z * z).exp();
    p * Complex64::new(1.0 / (4.0 * z.powi(3)), 1.0 / (2.0 * z) - 3.0 / (8.0 * z.powi(5)))
}

#[test]
fn fresnel_matches_quadrature() {
    for k in 0..=60 {
        let z = 0.1 * k as f64;
        let oracle = simpson_fresnel(z, 40_000);
        let v = fresnel(z);
        assert!((v - oracle).norm() < 1e-10, "z={z}: {}", (v - oracle).norm());
    }
}

#[test]
fn fresnel_tail_matches_asymptotics() {
    for z in [10.0, 20.0, 50.0, 1e3, 1e5] {
        let g = fresnel_tail(z);
        let err = (g - tail_asymptotic(z)).norm();
        // next term of the expansion is 15/(16 z⁷)
        assert!(err <= 2.0 * 15.0 / 16.0 / z.powi(7) + 1e-15, "z={z}: {err}");
    }
}

#[test]
fn fresnel_at_one_reference() {
    let v = fresnel(1.0);
    assert!((v - Complex64::new(0.904_524_237_9, 0.310_268_301_7)).norm() < 1e-9);
}

#[test]
fn fresnel_single_precision_tracks_double() {
    for k in 0..40 {
        let z = 0.25 * k as f64;
        let a = fresnel(z);
        let b = fresnel(z as f32);
        assert!((a.re - b.re as f64).abs() < 2e-5 && (a.im - b.im as f64).abs() < 2e-5, "z={z}");
    }
}

#[test]
fn u_eta_solves_free_equation() {
    let (t, dt, dx) = (0.4, 1e-4, 1e-3);
    for x in [-2.0, -0.5, 0.3, 1.0, 3.0] {
        let u = |t: f64, x: f64| u_eta(t, x).unwrap();
        let ut = (u(t + dt, x) - u(t - dt, x)) / (2.0 * dt);
        let uxx = (u(t, x + dx) - 2.0 * u(t, x) + u(t, x - dx)) / (dx * dx);
        let r = Complex64::i() * ut + uxx;
        assert!(r.norm() < 1e-5, "x={x}: {}", r.norm());
        assert!((dt_u_eta(t, x).unwrap() - ut).norm() < 1e-6);
    }
}

#[test]
fn u_eta_spatial_derivative_is_the_kernel() {
    let h = 1e-5;
    for t in [0.05, 0.5, 2.0] {
        for x in [0.0, 0.4, -1.5] {
            let d = (u_eta(t, x + h).unwrap() - u_eta(t, x - h).unwrap()) / (2.0 * h);
            assert!((d - free_kernel(t, x).unwrap()).norm() < 1e-7 / t, "t={t} x={x}");
        }
        assert!((u_eta_prime_at_zero(t).unwrap() - free_kernel(t, 0.0).unwrap()).norm() < 1e-14);
    }
}

#[test]
fn u_eta_tends_to_the_step() {
    for x in [-1.0f64, 0.5, 2.0] {
        let v = u_eta(1e-10, x).unwrap();
        assert!((v - Complex64::new(0.5 * x.signum(), 0.0)).norm() < 1e-4, "x={x}");
    }
    assert!(u_eta(0.0, 1.0).is_err());
    assert!(free_kernel(-1.0, 1.0).is_err());
}

#[test]
fn primitives_differentiate_back() {
    let h = 1e-6;
    for tau in [0.1, 0.7] {
        for x in [0.2, -1.3, 4.0] {
            let d = (u_eta_time_primitive(tau + h, x) - u_eta_time_primitive(tau - h, x)) / (2.0 * h);
            assert!((d - u_eta(tau, x).unwrap()).norm() < 1e-7, "tau={tau} x={x}");
            let phase = Complex64::new(0.0, x * x / (4.0 * tau)).exp();
            let d = (phase_integral_inv_sqrt(tau + h, x) - phase_integral_inv_sqrt(tau - h, x)) / (2.0 * h);
            assert!((d - phase / tau.sqrt()).norm() < 1e-6, "tau={tau} x={x}");
            let d = (phase_integral_sqrt(tau + h, x) - phase_integral_sqrt(tau - h, x)) / (2.0 * h);
            assert!((d - phase * tau.sqrt()).norm() < 1e-6, "tau={tau} x={x}");
        }
    }
}

#[test]
fn primitives_vanish_at_origin_of_time() {
    for x in [0.3, 2.0] {
        assert!(u_eta_time_primitive(1e-12, x).norm() < 1e-11);
        assert!(phase_integral_inv_sqrt(1e-14, x).norm() < 1e-6);
        assert!(phase_integral_sqrt(1e-12, x).norm() < 1e-11);
    }
}

#[test]
fn primitive_at_zero_position_vanishes() {
    assert_eq!(u_eta_time_primitive(0.7, 0.0), Complex64::new(0.0, 0.0));
    // U(σ)η is odd, so the primitive is too
    assert_eq!(u_eta_time_primitive(0.7, -1.1), -u_eta_time_primitive(0.7, 1.1));
}
