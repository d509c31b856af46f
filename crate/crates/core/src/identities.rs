//! Built-in identity suite: exact relations of the half-order integral, Fresnel
//! reference values and cross-checks of the boundary trace.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::abel::{build_weights, half_integral, half_integral_singular, inverse_sqrt_samples};
use crate::charge::{source_f0, SourceRoute};
use crate::error::Result;
use crate::model::{make_initial_datum, ComplexSignal, Profile, TimeGrid};
use crate::propagator::trace_route_fourier;
use crate::special::{fresnel, fresnel_limit, fresnel_series, fresnel_tail_fraction, FRESNEL_SWITCH};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    /// Observed convergence order, for rows that refine a grid.
    pub order: Option<f64>,
    pub order_floor: Option<f64>,
    pub pass: bool,
}

impl IdentityRow {
    fn new(name: &str, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), measured, tolerance, order: None, order_floor: None, pass: measured <= tolerance }
    }

    fn with_order(mut self, order: f64, floor: f64) -> Self {
        self.order = Some(order);
        self.order_floor = Some(floor);
        self.pass = self.pass && order >= floor;
        self
    }
}

/// `fresnel(1)` to ten digits.
pub const FRESNEL_ONE: Complex64 = Complex64::new(0.904_524_237_9, 0.310_268_301_7);

fn signal(grid: &TimeGrid<f64>, f: impl Fn(f64) -> Complex64) -> ComplexSignal<f64> {
    ComplexSignal { nodes: grid.nodes(), values: grid.nodes().into_iter().map(f).collect() }
}

fn max_abs(a: &[Complex64], f: impl Fn(usize) -> Complex64) -> f64 {
    a.iter().enumerate().map(|(n, v)| (v - f(n)).norm()).fold(0.0, f64::max)
}

/// Error of the raw weights on `(πs)^{−1/2}` at `t = 1` for `n` steps.
pub fn inverse_sqrt_error(n: usize) -> Result<f64> {
    let grid = TimeGrid::new(1.0, n)?;
    let w = build_weights(&grid);
    let v = half_integral(&inverse_sqrt_samples(Complex64::new(1.0, 0.0), &grid), &w)?;
    Ok((v.values[n] - 1.0).norm())
}

/// `(max over nodes, value at t = 1)` of `|I(I cos) − sin|` for `n` steps.
pub fn double_half_integral_error(n: usize) -> Result<(f64, f64)> {
    let grid = TimeGrid::new(1.0, n)?;
    let w = build_weights(&grid);
    let once = half_integral(&signal(&grid, |s| Complex64::new(s.cos(), 0.0)), &w)?;
    let twice = half_integral(&once, &w)?;
    let nodes = grid.nodes();
    let max = max_abs(&twice.values, |k| Complex64::new(nodes[k].sin(), 0.0));
    Ok((max, (twice.values[n] - nodes[n].sin()).norm()))
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

pub fn run_identities() -> Result<Vec<IdentityRow>> {
    let mut rows = Vec::new();

    let grid = TimeGrid::new(1.0, 256)?;
    let w = build_weights(&grid);
    let one = half_integral_singular(Complex64::new(1.0, 0.0), &w);
    rows.push(IdentityRow::new("abel_inverse_sqrt_exact", max_abs(&one.values, |_| Complex64::new(1.0, 0.0)), 1e-10));

    let e: Vec<f64> = [256, 512, 1024].iter().map(|&n| inverse_sqrt_error(n)).collect::<Result<_>>()?;
    rows.push(IdentityRow::new("abel_inverse_sqrt_weights", e[0], 5e-2).with_order(order(e[1], e[2]).min(order(e[0], e[1])), 0.5));

    let d: Vec<(f64, f64)> = [256, 512, 1024].iter().map(|&n| double_half_integral_error(n)).collect::<Result<_>>()?;
    rows.push(IdentityRow::new("abel_twice_is_integral", d[2].0, 1e-3).with_order(order(d[1].1, d[2].1).min(order(d[0].1, d[1].1)), 1.4));

    let nodes = grid.nodes();
    let sums: Vec<f64> = (0..grid.len()).map(|n| w.row(n).iter().sum()).collect();
    let dev = (0..grid.len())
        .map(|n| (sums[n] - 2.0 * (nodes[n] / std::f64::consts::PI).sqrt()).abs())
        .fold(0.0, f64::max);
    rows.push(IdentityRow::new("abel_weights_constant", dev, 1e-13));
    let dev = (0..grid.len())
        .map(|n| {
            let s: f64 = w.row(n).iter().zip(&nodes).map(|(a, t)| a * t).sum();
            (s - 4.0 / 3.0 * nodes[n].powf(1.5) / std::f64::consts::PI.sqrt()).abs()
        })
        .fold(0.0, f64::max);
    rows.push(IdentityRow::new("abel_weights_linear", dev, 1e-13));

    rows.push(IdentityRow::new("fresnel_at_one", (fresnel(1.0f64) - FRESNEL_ONE).norm(), 1e-9));
    let limit = fresnel_limit::<f64>();
    let tail = (0..100)
        .map(|k| {
            let z = 10f64.powf(6.0 * k as f64 / 99.0);
            (fresnel(z) - limit).norm() * z
        })
        .fold(0.0, f64::max);
    rows.push(IdentityRow::new("fresnel_tail_bound", tail, 1.0));
    let z = FRESNEL_SWITCH;
    rows.push(IdentityRow::new("fresnel_branch_continuity", (fresnel_series(z) - (limit - fresnel_tail_fraction(z))).norm(), 1e-10));

    let p = Profile::x_gaussian(1.0, Complex64::new(1.0, 0.0));
    let g = trace_route_fourier(&p, &grid)?;
    let dev = max_abs(&g.values, |n| Complex64::new(1.0, 4.0 * nodes[n]).powf(-1.5));
    rows.push(IdentityRow::new("trace_x_gaussian", dev, 1e-10));

    let base = Profile::gaussian(1.0, Complex64::new(1.0, 0.0)).plus(Profile::x_gaussian(1.0, Complex64::new(1.0, 0.0)));
    let datum = make_initial_datum(base, Complex64::new(1.0, 0.0), 1.0);
    let a = source_f0(&datum, &w, SourceRoute::Phi0)?;
    let b = source_f0(&datum, &w, SourceRoute::Psi0)?;
    rows.push(IdentityRow::new("source_routes_agree", a.max_abs_diff(&b), 1e-12));
    rows.push(IdentityRow::new("source_at_zero", (a.values[0] - datum.q0).norm(), 0.0));
    Ok(rows)
}
