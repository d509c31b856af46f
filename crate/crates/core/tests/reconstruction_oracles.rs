use deltaprime::abel::build_weights;
use deltaprime::charge::{solve_marching, source_f0, ChargeTrajectory, SourceRoute};
use deltaprime::propagator::{evolve_closed, trace_at};
use deltaprime::reconstruction::*;
use deltaprime::special::u_eta;
use deltaprime::{make_initial_datum, GammaProfile, InitialDatum, Profile, SpatialGrid, TimeGrid};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `∫₀^t (U(σ)η)(x) dσ` by Simpson in `w` with `σ = t/w²` on `[1, W]`. `W` is chosen so
/// that `x/2√σ ≥ 50` beyond it, where the integrand is `η·2t/w³` up to a fast oscillation
/// of negligible weight.
fn primitive_oracle(t: f64, x: f64) -> Complex64 {
    if x == 0.0 {
        return c(0.0, 0.0);
    }
    let big_w = (100.0 * t.sqrt() / x.abs()).max(10.0);
    // phase x²w²/4t advances at most 0.05 per step
    let h = (0.05 / (x * x * big_w / (2.0 * t))).min(1e-3);
    let m = 2 * (((big_w - 1.0) / h / 2.0).ceil() as usize);
    let h = (big_w - 1.0) / m as f64;
    let f = |w: f64| u_eta(t / (w * w), x).unwrap() * (2.0 * t / (w * w * w));
    let mut acc = f(1.0) + f(big_w);
    for k in 1..m {
        acc += f(1.0 + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0 + 0.5 * x.signum() * t / (big_w * big_w)
}

/// A trajectory with `q(s) = q₀ + b·s`; it need not solve the charge equation.
fn linear_trajectory(grid: TimeGrid<f64>, q0: Complex64, b: Complex64) -> ChargeTrajectory<f64> {
    let q = grid.nodes().iter().map(|s| q0 + b * s).collect();
    ChargeTrajectory { grid, q, q_dot: Some(vec![b; grid.len()]), f0: vec![c(0.0, 0.0); grid.len()] }
}

fn linear_setup() -> (ChargeTrajectory<f64>, InitialDatum<f64>, SpatialGrid<f64>) {
    let grid = TimeGrid::new(1.0, 32).unwrap();
    let (q0, b) = (c(1.0, 0.0), c(0.0, 0.5));
    let datum = make_initial_datum(Profile::gaussian(1.0, c(1.0, 0.0)).plus(Profile::x_gaussian(1.0, c(1.0, 0.0))), q0, 1.0);
    (linear_trajectory(grid, q0, b), datum, SpatialGrid::new(20.0, 1024).unwrap())
}

#[test]
fn linear_charge_reconstructed_exactly() {
    let (traj, datum, space) = linear_setup();
    let b = c(0.0, 0.5);
    let rec = Reconstructor::new(&traj, &datum, space, 1.0);
    for n in [8, 32] {
        let t = traj.grid.node(n);
        let phi = rec.phi_at_node(n).unwrap();
        for j in (0..space.n_points).step_by(37).filter(|&j| space.x(j).abs() <= 3.0) {
            let x = space.x(j);
            let oracle = evolve_closed(&datum.phi0, t, x) - b * primitive_oracle(t, x);
            assert!((phi.values[j] - oracle).norm() < 1e-9, "t={t} x={x}: {}", (phi.values[j] - oracle).norm());
        }
    }
}

#[test]
fn cached_and_direct_frames_agree() {
    let (traj, datum, space) = linear_setup();
    let direct = Reconstructor::new(&traj, &datum, space, 1.0);
    let cached = Reconstructor::new(&traj, &datum, space, 1.0).with_cache(32);
    for n in [0, 5, 32] {
        let (a, b) = (direct.frame(n).unwrap(), cached.frame(n).unwrap());
        assert!(a.psi.max_abs_diff(&b.psi) < 1e-13);
    }
}

#[test]
fn boundary_trace_of_linear_charge() {
    let (traj, datum, space) = linear_setup();
    let rec = Reconstructor::new(&traj, &datum, space, 1.0);
    let trace = trace_at(&datum.phi0, &traj.grid.nodes(), None).unwrap();
    let d = rec.boundary_derivative_trace(&trace);
    let inv = (c(0.0, std::f64::consts::PI)).sqrt().inv();
    for (n, t) in traj.grid.nodes().iter().enumerate() {
        // ∂ₓΠ(t, 0) = 2√t·(4πi)^{−1/2}
        let oracle = trace[n] - c(0.0, 0.5) * inv * t.sqrt();
        assert!((d[n] - oracle).norm() < 1e-13, "t={t}");
    }
}

#[test]
fn frame_jump_is_the_charge() {
    let (traj, datum, space) = linear_setup();
    let rec = Reconstructor::new(&traj, &datum, space, 1.0);
    for n in [0, 16, 32] {
        let f = rec.frame(n).unwrap();
        // eight-point extrapolation on dx ≈ 0.04
        assert!((jump_at_origin(&space, &f.psi) - f.q).norm() < 1e-7, "n={n}");
        assert_eq!(f.psi.max_abs_diff(&assemble_psi(&f.phi, f.q)), 0.0);
    }
}

#[test]
fn off_grid_time_rejected() {
    let (traj, datum, space) = linear_setup();
    let rec = Reconstructor::new(&traj, &datum, space, 1.0);
    assert!(rec.reconstruct_phi(0.3).is_err());
    assert!(rec.reconstruct_phi(0.5).is_ok());
    assert!(rec.far_field_duhamel(0.5, 0.5).is_err());
}

#[test]
fn far_field_of_linear_charge() {
    let (traj, datum, space) = linear_setup();
    let rec = Reconstructor::new(&traj, &datum, space, 1.0);
    let f = rec.frame(32).unwrap();
    let ff = rec.far_field_duhamel(1.0, 2.0).unwrap();
    let z = space.zero_index() as i64;
    for (x, v) in ff.nodes.iter().zip(&ff.values) {
        let j = (z + (x / space.dx()).round() as i64) as usize;
        assert!((v - f.psi.values[j]).norm() < 1e-4, "x={x}");
    }
}

struct Solved {
    traj: ChargeTrajectory<f64>,
    datum: InitialDatum<f64>,
    space: SpatialGrid<f64>,
    gamma: GammaProfile<f64>,
}

fn solved(n: usize) -> Solved {
    let grid = TimeGrid::new(1.0, n).unwrap();
    let gamma = GammaProfile::SmoothFourier { mean: 1.0, period: 1.0, cos: vec![], sin: vec![0.5] };
    let datum = make_initial_datum(Profile::gaussian(1.0, c(1.0, 0.0)).plus(Profile::x_gaussian(1.0, c(1.0, 0.0))), c(1.0, 0.0), 1.0);
    let w = build_weights(&grid);
    let f0 = source_f0(&datum, &w, SourceRoute::Phi0).unwrap();
    let traj = solve_marching(&f0, &gamma, &w).unwrap().with_q_dot().unwrap();
    Solved { traj, datum, space: SpatialGrid::new(40.0, 2048).unwrap(), gamma }
}

#[test]
fn far_field_agrees_with_grid_reconstruction() {
    let s = solved(256);
    let rec = Reconstructor::new(&s.traj, &s.datum, s.space, 1e-6);
    let f = rec.frame(256).unwrap();
    let ff = rec.far_field_duhamel(1.0, 2.0).unwrap();
    let z = s.space.zero_index() as i64;
    let (mut num, mut den) = (0.0, 0.0);
    for (x, v) in ff.nodes.iter().zip(&ff.values) {
        let j = (z + (x / s.space.dx()).round() as i64) as usize;
        num += (v - f.psi.values[j]).norm_sqr();
        den += v.norm_sqr();
    }
    assert!((num / den).sqrt() < 1e-3, "{}", (num / den).sqrt());
}

#[test]
fn duhamel_rules_converge_together() {
    let d: Vec<f64> = [64usize, 256]
        .iter()
        .map(|&n| {
            let s = solved(n);
            let a = Reconstructor::new(&s.traj, &s.datum, s.space, 1e-6).phi_at_node(n).unwrap();
            let b = Reconstructor::new(&s.traj, &s.datum, s.space, 1e-6).with_rule(DuhamelRule::Trapezoid).phi_at_node(n).unwrap();
            a.max_abs_diff(&b)
        })
        .collect();
    assert!(d[1] < d[0] / 2.0, "{d:?}");
}

#[test]
fn regularized_boundary_condition() {
    let s = solved(64);
    let rec = Reconstructor::new(&s.traj, &s.datum, s.space, 1e-6);
    for n in [16, 64] {
        let f = rec.frame(n).unwrap();
        let g = s.gamma.evaluate(f.t);
        for lambda in [1.0, 4.0] {
            let r = regularized_decompose(&f, &s.space, lambda, g).unwrap();
            assert!(r.residual < 5e-2, "n={n} λ={lambda}: {}", r.residual);
            assert!((jump_at_origin(&s.space, &r.phi_lambda)).norm() < 1e-6);
        }
    }
    let f = rec.frame(0).unwrap();
    assert!(regularized_decompose(&f, &s.space, 0.0, 1.0).is_err());
}

#[test]
fn hamiltonian_action_is_finite_and_refuses_narrow_windows() {
    let s = solved(64);
    let rec = Reconstructor::new(&s.traj, &s.datum, s.space, 1e-6);
    let f = rec.frame(64).unwrap();
    let h = f.h_psi.as_ref().unwrap();
    assert!(h.values.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
    let narrow = SpatialGrid::new(3.0, 256).unwrap();
    let rec = Reconstructor::new(&s.traj, &s.datum, narrow, 1e-6);
    assert!(rec.frame(64).is_err());
}
