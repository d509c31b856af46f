//! Rebuilding `ψ(t) = φ(t) + q(t)η` on the spatial grid.
//!
//! The regular part is `φ(t) = U(t)φ₀ − ∫₀ᵗ q̇(s)·(U(t−s)η) ds`. The default rule
//! takes `q̇` constant on each time cell (the divided difference of `q`) and
//! integrates the bounded kernel `U(σ)η` over the cell exactly through its time
//! primitive, so the rapidly oscillating tail of the kernel is never sampled.
//!
//! `φ` is not periodic on the window (it tends to `−(q−q₀)η` at infinity) and its
//! second derivative jumps at the origin. Spatial derivatives are therefore taken
//! of `φ + (q−q₀)·tanh(x)/2 − (J/4)·x|x|e^{−x²}`, with the removed pieces
//! differentiated analytically.

use num_complex::Complex;

use crate::charge::ChargeTrajectory;
use crate::error::{Error, Result};
use crate::model::{ComplexSignal, InitialDatum, SpatialGrid};
use crate::propagator::{edge_mass_fraction, evolve_closed, evolve_on_grid, SpectralPropagator};
use crate::scalar::{cis, sqrt_i, Real};
use crate::special::{phase_integral_inv_sqrt, phase_integral_sqrt, u_eta_time_primitive, u_eta_unchecked};

#[inline]
pub fn eta<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::lit(0.5)
    } else if x < T::zero() {
        T::lit(-0.5)
    } else {
        T::zero()
    }
}

/// Quadrature in `s` for the Duhamel integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DuhamelRule {
    /// Cell-constant `q̇ = Δq/h`, kernel integrated exactly over each cell.
    #[default]
    ProductMidpoint,
    /// Trapezoid in `s` on `q̇(s)·(U(t−s)η)(x)` with the stored `q̇`.
    Trapezoid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionFrame<T> {
    pub t: T,
    /// Time-node index of `t`.
    pub node: usize,
    pub psi: ComplexSignal<T>,
    pub phi: ComplexSignal<T>,
    pub q: Complex<T>,
    /// `q₀`, the limit of `φ + qη` far away is `q₀η`.
    pub q0: Complex<T>,
    /// Jump of `φ″` across the origin.
    pub kink: Complex<T>,
    /// `−φ″`, filled by [`Reconstructor::frame`].
    pub h_psi: Option<ComplexSignal<T>>,
}

/// `Π(τ, x) = ∫₀^τ (U(σ)η)(x) dσ` at `τ = m·h`, `x = p·dx ≥ 0`; odd in `x`.
struct PrimitiveTable<T> {
    rows: usize,
    cols: usize,
    values: Vec<Complex<T>>,
}

impl<T: Real> PrimitiveTable<T> {
    fn build(h: T, grid: &SpatialGrid<T>, rows: usize) -> Self {
        let cols = grid.n_points / 2 + 1;
        let dx = grid.dx();
        let mut values = Vec::with_capacity(rows * cols);
        for m in 0..rows {
            let tau = h * T::from_usize_lossy(m);
            values.extend((0..cols).map(|p| u_eta_time_primitive(tau, dx * T::from_usize_lossy(p))));
        }
        Self { rows, cols, values }
    }

    #[inline]
    fn row(&self, m: usize) -> &[Complex<T>] {
        &self.values[m * self.cols..(m + 1) * self.cols]
    }
}

/// Builds frames of one solved trajectory on one spatial grid.
pub struct Reconstructor<'a, T: Real> {
    traj: &'a ChargeTrajectory<T>,
    datum: &'a InitialDatum<T>,
    propagator: SpectralPropagator<T>,
    rule: DuhamelRule,
    table: Option<PrimitiveTable<T>>,
    edge_tolerance: T,
}

impl<'a, T: Real> Reconstructor<'a, T> {
    /// `edge_tolerance` bounds the edge mass of the regularized field before spectral differentiation.
    pub fn new(traj: &'a ChargeTrajectory<T>, datum: &'a InitialDatum<T>, grid: SpatialGrid<T>, edge_tolerance: T) -> Self {
        Self {
            traj,
            datum,
            propagator: SpectralPropagator::new(grid, T::one()),
            rule: DuhamelRule::default(),
            table: None,
            edge_tolerance,
        }
    }

    pub fn with_rule(mut self, rule: DuhamelRule) -> Self {
        self.rule = rule;
        self
    }

    /// Tabulates the kernel primitive up to node `max_node`; frames then cost one pass over the table.
    pub fn with_cache(mut self, max_node: usize) -> Self {
        let rows = max_node.min(self.traj.grid.n_steps) + 1;
        self.table = Some(PrimitiveTable::build(self.traj.grid.step(), self.propagator.grid(), rows));
        self
    }

    pub fn grid(&self) -> &SpatialGrid<T> {
        self.propagator.grid()
    }

    pub fn propagator(&self) -> &SpectralPropagator<T> {
        &self.propagator
    }

    fn node_of(&self, t: T) -> Result<usize> {
        self.traj.grid.index_of(t).ok_or(Error::NotAGridNode(t.to_f64_lossy()))
    }

    /// `φ(t)` at a time node.
    pub fn reconstruct_phi(&self, t: T) -> Result<ComplexSignal<T>> {
        let n = self.node_of(t)?;
        self.phi_at_node(n)
    }

    pub fn phi_at_node(&self, n: usize) -> Result<ComplexSignal<T>> {
        let grid = *self.grid();
        let t = self.traj.grid.node(n);
        let mut phi = evolve_on_grid(&self.datum.phi0, &self.propagator, t)?;
        let duhamel = match self.rule {
            DuhamelRule::ProductMidpoint => self.duhamel_midpoint(n),
            DuhamelRule::Trapezoid => self.duhamel_trapezoid(n)?,
        };
        phi.iter_mut().zip(duhamel).for_each(|(p, d)| *p = *p - d);
        ComplexSignal::new(grid.nodes(), phi)
    }

    /// Coefficients `c_m` with `D(x) = Σ_{m=1}^{n} c_m Π(m·h, x)`, by summation by parts.
    fn midpoint_coefficients(&self, n: usize) -> Vec<Complex<T>> {
        let q = &self.traj.q;
        let h = self.traj.grid.step();
        // a_m = Δq_{n−m}/h for m = 1..n, a_{n+1} = 0
        let a = |m: usize| if m >= 1 && m <= n { (q[n - m + 1] - q[n - m]) / h } else { Complex::new(T::zero(), T::zero()) };
        (0..=n).map(|m| if m == 0 { Complex::new(T::zero(), T::zero()) } else { a(m) - a(m + 1) }).collect()
    }

    fn duhamel_midpoint(&self, n: usize) -> Vec<Complex<T>> {
        let grid = *self.grid();
        let half = grid.n_points / 2;
        let coeffs = self.midpoint_coefficients(n);
        let h = self.traj.grid.step();
        let dx = grid.dx();
        let mut pos = vec![Complex::new(T::zero(), T::zero()); half + 1];
        match &self.table {
            Some(tab) if n < tab.rows => {
                for (m, c) in coeffs.iter().enumerate().skip(1) {
                    for (acc, v) in pos.iter_mut().zip(tab.row(m)) {
                        *acc = *acc + *c * *v;
                    }
                }
            }
            _ => {
                for (p, acc) in pos.iter_mut().enumerate().skip(1) {
                    let x = dx * T::from_usize_lossy(p);
                    *acc = coeffs
                        .iter()
                        .enumerate()
                        .skip(1)
                        .fold(Complex::new(T::zero(), T::zero()), |s, (m, c)| s + *c * u_eta_time_primitive(h * T::from_usize_lossy(m), x));
                }
            }
        }
        // grid index j has x = (j − N/2)·dx; the kernel is odd in x
        (0..grid.n_points).map(|j| if j >= half { pos[j - half] } else { -pos[half - j] }).collect()
    }

    fn duhamel_trapezoid(&self, n: usize) -> Result<Vec<Complex<T>>> {
        let q_dot = self
            .traj
            .q_dot
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("trapezoid rule needs q̇; call with_q_dot first".into()))?;
        let grid = *self.grid();
        let h = self.traj.grid.step();
        let mut out = vec![Complex::new(T::zero(), T::zero()); grid.n_points];
        if n == 0 {
            return Ok(out);
        }
        for (j, o) in out.iter_mut().enumerate() {
            let x = grid.x(j);
            let mut acc = q_dot[n] * (eta(x) * T::lit(0.5)) + q_dot[0] * (u_eta_unchecked(h * T::from_usize_lossy(n), x) * T::lit(0.5));
            for k in 1..n {
                acc = acc + q_dot[k] * u_eta_unchecked(h * T::from_usize_lossy(n - k), x);
            }
            *o = acc * h;
        }
        Ok(out)
    }

    /// Jump of `φ″` at the origin implied by the rule: `−i·q̇` at the frame time.
    fn kink(&self, n: usize) -> Complex<T> {
        if n == 0 {
            return Complex::new(T::zero(), T::zero());
        }
        let minus_i = Complex::new(T::zero(), -T::one());
        match self.rule {
            DuhamelRule::ProductMidpoint => minus_i * (self.traj.q[n] - self.traj.q[n - 1]) / self.traj.grid.step(),
            DuhamelRule::Trapezoid => minus_i * self.traj.q_dot.as_ref().map(|d| d[n]).unwrap_or_default(),
        }
    }

    /// Frame at node `n` including the Hamiltonian action.
    pub fn frame(&self, n: usize) -> Result<WavefunctionFrame<T>> {
        let phi = self.phi_at_node(n)?;
        let q = self.traj.q[n];
        let mut frame = WavefunctionFrame {
            t: self.traj.grid.node(n),
            node: n,
            psi: assemble_psi(&phi, q),
            phi,
            q,
            q0: self.datum.q0,
            kink: self.kink(n),
            h_psi: None,
        };
        frame.h_psi = Some(self.hamiltonian_action(&frame)?);
        Ok(frame)
    }

    /// `(φ′, φ″)` on the grid from the regularized field.
    pub fn phi_derivatives(&self, frame: &WavefunctionFrame<T>) -> Result<(Vec<Complex<T>>, Vec<Complex<T>>)> {
        let grid = *self.grid();
        let dq = frame.q - frame.q0;
        let quarter_kink = frame.kink * T::lit(0.25);
        let xs = grid.nodes();
        let reg: Vec<Complex<T>> = frame
            .phi
            .values
            .iter()
            .zip(&xs)
            .map(|(p, &x)| *p + dq * smooth_step(x) - quarter_kink * kink_profile(x))
            .collect();
        let mass = edge_mass_fraction(&reg);
        if mass > self.edge_tolerance {
            return Err(Error::BoundaryMass { mass: mass.to_f64_lossy(), tolerance: self.edge_tolerance.to_f64_lossy() });
        }
        let (mut d1, mut d2) = self.propagator.derivatives(&reg);
        for (j, &x) in xs.iter().enumerate() {
            d1[j] = d1[j] - dq * smooth_step_d1(x) + quarter_kink * kink_profile_d1(x);
            d2[j] = d2[j] - dq * smooth_step_d2(x) + quarter_kink * kink_profile_d2(x);
        }
        Ok((d1, d2))
    }

    /// `H_γψ = −φ″`.
    pub fn hamiltonian_action(&self, frame: &WavefunctionFrame<T>) -> Result<ComplexSignal<T>> {
        let (_, d2) = self.phi_derivatives(frame)?;
        ComplexSignal::new(frame.phi.nodes.clone(), d2.into_iter().map(|v| -v).collect())
    }

    /// `φ′(0, tₙ)` of the reconstruction for every node `n`, from the exact `x`-derivative
    /// of the cell primitives: `∂ₓΠ(τ, 0) = √(τ/(πi))`. `trace` is `(U(tₙ)φ₀)′(0)`.
    pub fn boundary_derivative_trace(&self, trace: &[Complex<T>]) -> Vec<Complex<T>> {
        let q = &self.traj.q;
        let h = self.traj.grid.step();
        let c = sqrt_i::<T>().conj() / T::PI().sqrt();
        let roots: Vec<T> = (0..self.traj.grid.len()).map(|m| (h * T::from_usize_lossy(m)).sqrt()).collect();
        (0..self.traj.grid.len())
            .map(|n| {
                let d = (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, j| {
                    acc + (q[j + 1] - q[j]) * (roots[n - j] - roots[n - j - 1])
                });
                trace[n] - d * c / h
            })
            .collect()
    }

    /// `ψ(t, x)` for `|x| ≥ x_min` from the integrated-by-parts Duhamel formula
    /// `U(t)ψ₀ − √(i/π)/x · B` with
    /// `B = −q₀√t e^{ix²/4t} − ∫q̇(s)√(t−s)e^{ix²/4(t−s)}ds + ½∫q(s)(t−s)^{−1/2}e^{ix²/4(t−s)}ds`.
    pub fn far_field_duhamel(&self, t: T, x_min: T) -> Result<ComplexSignal<T>> {
        if !(x_min >= T::one()) {
            return Err(Error::InvalidArgument(format!("x_min must be at least 1, got {x_min}")));
        }
        let n = self.node_of(t)?;
        let q_dot = self.traj.q_dot.as_ref().ok_or_else(|| Error::InvalidArgument("far field needs q̇".into()))?;
        let q = &self.traj.q;
        let h = self.traj.grid.step();
        let grid = *self.grid();
        let q0 = self.datum.q0;
        let half = T::lit(0.5);
        let pref = sqrt_i::<T>() / T::PI().sqrt();
        let (mut nodes, mut values) = (Vec::new(), Vec::new());
        for j in 0..grid.n_points {
            let x = grid.x(j);
            if x.abs() < x_min {
                continue;
            }
            let mut free = evolve_closed(&self.datum.phi0, t, x);
            if n == 0 {
                free = free + q0 * eta(x);
                nodes.push(x);
                values.push(free);
                continue;
            }
            free = free + q0 * u_eta_unchecked(t, x);
            let mut b = -q0 * t.sqrt() * cis(x * x / (T::lit(4.0) * t));
            let (mut ps_prev, mut pi_prev) = (Complex::new(T::zero(), T::zero()), Complex::new(T::zero(), T::zero()));
            // cell [s_j, s_{j+1}] sits at τ ∈ [τ_{n−j−1}, τ_{n−j}]; walk outward from τ = 0
            for m in 1..=n {
                let tau = h * T::from_usize_lossy(m);
                let ps = phase_integral_sqrt(tau, x);
                let pi = phase_integral_inv_sqrt(tau, x);
                let j = n - m;
                let qd = (q_dot[j] + q_dot[j + 1]) * half;
                let qa = (q[j] + q[j + 1]) * half;
                b = b - qd * (ps - ps_prev) + qa * (pi - pi_prev) * half;
                ps_prev = ps;
                pi_prev = pi;
            }
            nodes.push(x);
            values.push(free - pref * b / x);
        }
        ComplexSignal::new(nodes, values)
    }
}

/// `tanh(x)/2`, a smooth stand-in for `η` used to remove the non-periodic tail.
fn smooth_step<T: Real>(x: T) -> T {
    x.tanh() * T::lit(0.5)
}

fn smooth_step_d1<T: Real>(x: T) -> T {
    let s = T::one() / x.cosh();
    s * s * T::lit(0.5)
}

fn smooth_step_d2<T: Real>(x: T) -> T {
    let s = T::one() / x.cosh();
    -s * s * x.tanh()
}

/// `x|x|e^{−x²}`, whose second derivative jumps by 4 at the origin.
fn kink_profile<T: Real>(x: T) -> T {
    x * x.abs() * (-x * x).exp()
}

fn kink_profile_d1<T: Real>(x: T) -> T {
    T::lit(2.0) * x.abs() * (T::one() - x * x) * (-x * x).exp()
}

fn kink_profile_d2<T: Real>(x: T) -> T {
    let x2 = x * x;
    let sgn = if x > T::zero() { T::one() } else if x < T::zero() { -T::one() } else { T::zero() };
    sgn * (-x2).exp() * (T::lit(2.0) - T::lit(10.0) * x2 + T::lit(4.0) * x2 * x2)
}

/// `ψ = φ + q·η` pointwise.
pub fn assemble_psi<T: Real>(phi: &ComplexSignal<T>, q: Complex<T>) -> ComplexSignal<T> {
    let values = phi.nodes.iter().zip(&phi.values).map(|(&x, p)| *p + q * eta(x)).collect();
    ComplexSignal { nodes: phi.nodes.clone(), values }
}

/// Number of samples on each side used by the one-sided estimates at the origin.
pub const ORIGIN_STENCIL: usize = 8;

/// Value at 0 of the polynomial through `(xs[k], ys[k])` (Neville).
fn extrapolate_to_zero<T: Real>(xs: &[T], ys: &[Complex<T>]) -> Complex<T> {
    let mut p = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (a, b) = (xs[i], xs[i + level]);
            p[i] = (p[i] * b - p[i + 1] * a) / (b - a);
        }
    }
    p[0]
}

/// `f′(0)` for `f` smooth on each side with a continuous odd part: the samples
/// `(f(x) − f(−x))/(2x)` at `x = k·dx` are extrapolated to `x = 0`.
pub fn derivative_at_origin<T: Real>(grid: &SpatialGrid<T>, values: &[Complex<T>]) -> Complex<T> {
    let z = grid.zero_index();
    let dx = grid.dx();
    let xs: Vec<T> = (1..=ORIGIN_STENCIL).map(|k| dx * T::from_usize_lossy(k)).collect();
    let ys: Vec<Complex<T>> = (1..=ORIGIN_STENCIL)
        .zip(&xs)
        .map(|(k, &x)| (values[z + k] - values[z - k]) / (x * T::lit(2.0)))
        .collect();
    extrapolate_to_zero(&xs, &ys)
}

/// One-sided limits `(f(0⁻), f(0⁺))` by polynomial extrapolation.
pub fn one_sided_limits<T: Real>(grid: &SpatialGrid<T>, values: &[Complex<T>]) -> (Complex<T>, Complex<T>) {
    let z = grid.zero_index();
    let dx = grid.dx();
    let xs: Vec<T> = (1..=ORIGIN_STENCIL).map(|k| dx * T::from_usize_lossy(k)).collect();
    let right: Vec<Complex<T>> = (1..=ORIGIN_STENCIL).map(|k| values[z + k]).collect();
    let left: Vec<Complex<T>> = (1..=ORIGIN_STENCIL).map(|k| values[z - k]).collect();
    (extrapolate_to_zero(&xs, &left), extrapolate_to_zero(&xs, &right))
}

/// `ψ(0⁺) − ψ(0⁻)`, which should equal `q`.
pub fn jump_at_origin<T: Real>(grid: &SpatialGrid<T>, psi: &ComplexSignal<T>) -> Complex<T> {
    let (l, r) = one_sided_limits(grid, &psi.values);
    r - l
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedDecomposition<T> {
    pub lambda: T,
    pub phi_lambda: ComplexSignal<T>,
    pub q: Complex<T>,
    /// `G_λ′(x) = sgn(x)e^{−√λ|x|}/2`.
    pub g_lambda_prime: Vec<T>,
    /// `φ_λ′(0)` estimated from the samples.
    pub derivative_at_zero: Complex<T>,
    /// `|φ_λ′(0) − (γ + √λ/2)q|`.
    pub residual: T,
}

/// `φ_λ = ψ − q·G_λ′` and its shifted boundary condition.
pub fn regularized_decompose<T: Real>(
    frame: &WavefunctionFrame<T>,
    grid: &SpatialGrid<T>,
    lambda: T,
    gamma_t: T,
) -> Result<RegularizedDecomposition<T>> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let root = lambda.sqrt();
    let g: Vec<T> = frame.psi.nodes.iter().map(|&x| eta(x) * (-root * x.abs()).exp()).collect();
    let values: Vec<Complex<T>> = frame.psi.values.iter().zip(&g).map(|(p, g)| *p - frame.q * *g).collect();
    let d = derivative_at_origin(grid, &values);
    let residual = (d - frame.q * (gamma_t + root * T::lit(0.5))).norm();
    Ok(RegularizedDecomposition {
        lambda,
        phi_lambda: ComplexSignal::new(frame.psi.nodes.clone(), values)?,
        q: frame.q,
        g_lambda_prime: g,
        derivative_at_zero: d,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SpatialGrid<f64> {
        SpatialGrid::new(10.0, 512).unwrap()
    }

    #[test]
    fn eta_values() {
        assert_eq!(eta(0.0f64), 0.0);
        assert_eq!(eta(-3.0f64), -0.5);
        assert_eq!(eta(1e-300f64), 0.5);
    }

    #[test]
    fn assemble_sign() {
        let g = grid();
        let phi = ComplexSignal::new(g.nodes(), vec![Complex::new(0.0, 0.0); 512]).unwrap();
        let psi = assemble_psi(&phi, Complex::new(2.0, 0.0));
        for (x, v) in psi.nodes.iter().zip(&psi.values) {
            assert_eq!(v.re, x.signum() * if *x == 0.0 { 0.0 } else { 1.0 });
        }
        let same = assemble_psi(&phi, Complex::new(0.0, 0.0));
        assert_eq!(same.values, phi.values);
    }

    #[test]
    fn origin_derivative_of_kinked_odd_function() {
        let g = grid();
        // f = 3x + x|x| + 1: f′(0) = 3
        let v: Vec<_> = g.nodes().iter().map(|x| Complex::new(3.0 * x + x * x.abs() + 1.0, 0.0)).collect();
        assert!((derivative_at_origin(&g, &v) - Complex::new(3.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn jump_of_step() {
        let g = grid();
        let phi: Vec<_> = g.nodes().iter().map(|x| Complex::new((-x * x).exp(), 0.0)).collect();
        let psi = assemble_psi(&ComplexSignal::new(g.nodes(), phi).unwrap(), Complex::new(0.5, -1.0));
        assert!((jump_at_origin(&g, &psi) - Complex::new(0.5, -1.0)).norm() < 1e-9);
    }

    #[test]
    fn kink_profile_derivatives() {
        for x in [-1.3f64, -0.2, 0.4, 2.0] {
            let e = 1e-5;
            let d1 = (kink_profile(x + e) - kink_profile(x - e)) / (2.0 * e);
            let d2 = (kink_profile_d1(x + e) - kink_profile_d1(x - e)) / (2.0 * e);
            assert!((d1 - kink_profile_d1(x)).abs() < 1e-8);
            assert!((d2 - kink_profile_d2(x)).abs() < 1e-8);
            let s1 = (smooth_step(x + e) - smooth_step(x - e)) / (2.0 * e);
            let s2 = (smooth_step_d1(x + e) - smooth_step_d1(x - e)) / (2.0 * e);
            assert!((s1 - smooth_step_d1(x)).abs() < 1e-8);
            assert!((s2 - smooth_step_d2(x)).abs() < 1e-8);
        }
    }
}
