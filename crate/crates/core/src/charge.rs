//! The charge equation `q = f₀ − √(4i)·I[γq]`, solved by implicit product-integration marching.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::abel::{half_integral, half_integral_singular, AbelQuadrature, AbelWeights};
use crate::error::{Error, Result};
use crate::model::{ComplexSignal, GammaProfile, InitialDatum, TimeGrid};
use crate::propagator::trace_at;
use crate::scalar::{sqrt_4i, Real};

/// Pivots smaller than this in modulus are reported as degenerate.
pub const PIVOT_FLOOR: f64 = 1e-10;

/// Largest step count for which [`solve_dense`] assembles the full matrix.
pub const DENSE_MAX_STEPS: usize = 1 << 13;

#[derive(Debug, Clone, PartialEq)]
pub struct ChargeTrajectory<T> {
    pub grid: TimeGrid<T>,
    pub q: Vec<Complex<T>>,
    /// Filled by [`estimate_q_dot`].
    pub q_dot: Option<Vec<Complex<T>>>,
    pub f0: Vec<Complex<T>>,
}

impl<T: Real> ChargeTrajectory<T> {
    pub fn q_signal(&self) -> ComplexSignal<T> {
        ComplexSignal { nodes: self.grid.nodes(), values: self.q.clone() }
    }

    /// Computes and stores `q̇`.
    pub fn with_q_dot(mut self) -> Result<Self> {
        let d = estimate_q_dot(&self)?;
        self.q_dot = Some(d.values);
        Ok(self)
    }

    /// `max |q − other.q|` over the common nodes of two grids, where `other` is `factor` times finer.
    pub fn max_error_against(&self, other: &Self, factor: usize) -> T {
        self.q
            .iter()
            .enumerate()
            .map(|(n, q)| (*q - other.q[n * factor]).norm())
            .fold(T::zero(), T::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceRoute {
    /// `f₀ = q₀ + √(4i)·I[(U(·)φ₀)′(0)]`.
    Phi0,
    /// `f₀ = √(4i)·I[(U(·)ψ₀)′(0)]`, the `q₀(4πis)^{−1/2}` part integrated exactly.
    Psi0,
}

pub fn source_f0<T: Real>(
    datum: &InitialDatum<T>,
    weights: &AbelWeights<T>,
    route: SourceRoute,
) -> Result<ComplexSignal<T>> {
    let grid = weights.grid;
    let nodes = grid.nodes();
    let g = ComplexSignal::new(nodes.clone(), trace_at(&datum.phi0, &nodes, None)?)?;
    let ig = half_integral(&g, weights)?;
    let s = sqrt_4i::<T>();
    let values = match route {
        SourceRoute::Phi0 => ig.values.iter().map(|v| datum.q0 + s * *v).collect(),
        SourceRoute::Psi0 => {
            let singular = half_integral_singular(datum.q0 / s, weights);
            ig.values.iter().zip(&singular.values).map(|(v, c)| s * (*v + *c)).collect()
        }
    };
    ComplexSignal::new(nodes, values)
}

fn check_source<T: Real>(f0: &ComplexSignal<T>, weights: &AbelWeights<T>) -> Result<()> {
    if f0.len() != weights.grid.len() {
        return Err(Error::GridMismatch(format!(
            "source has {} samples, weights expect {}",
            f0.len(),
            weights.grid.len()
        )));
    }
    Ok(())
}

fn pivot<T: Real>(s: Complex<T>, gamma: T, w: T, node: usize) -> Result<Complex<T>> {
    let p = Complex::new(T::one(), T::zero()) + s * (gamma * w);
    if p.norm() < T::lit(PIVOT_FLOOR) {
        return Err(Error::DiagonalDegeneracy { node, pivot: p.norm().to_f64_lossy() });
    }
    Ok(p)
}

/// Node-by-node solve: `qₙ(1 + √(4i)γₙw[n][n]) = f₀(tₙ) − √(4i)Σ_{j<n} w[n][j]γⱼqⱼ`.
pub fn solve_marching<T: Real>(
    f0: &ComplexSignal<T>,
    gamma: &GammaProfile<T>,
    weights: &AbelWeights<T>,
) -> Result<ChargeTrajectory<T>> {
    check_source(f0, weights)?;
    let grid = weights.grid;
    let s = sqrt_4i::<T>();
    let g = gamma.sample(&grid);
    let mut q = Vec::with_capacity(grid.len());
    let mut gq = Vec::with_capacity(grid.len());
    q.push(f0.values[0]);
    gq.push(f0.values[0] * g[0]);
    for n in 1..grid.len() {
        let p = pivot(s, g[n], weights.diagonal(n), n)?;
        // history: row n without the diagonal
        let mut hist = gq[0] * weights.weight(n, 0);
        for (j, v) in gq.iter().enumerate().skip(1) {
            hist = hist + *v * weights.weight(n, j);
        }
        let qn = (f0.values[n] - s * hist) / p;
        q.push(qn);
        gq.push(qn * g[n]);
    }
    Ok(ChargeTrajectory { grid, q, q_dot: None, f0: f0.values.clone() })
}

/// Assembles `Id + √(4i)·W·diag(γ)` explicitly and solves it by forward substitution.
pub fn solve_dense<T: Real>(
    f0: &ComplexSignal<T>,
    gamma: &GammaProfile<T>,
    weights: &AbelWeights<T>,
) -> Result<ChargeTrajectory<T>> {
    check_source(f0, weights)?;
    let grid = weights.grid;
    if grid.n_steps > DENSE_MAX_STEPS {
        return Err(Error::ResourceGuard(format!(
            "dense solve needs {} complex entries; limit is {} steps",
            grid.len() * grid.len(),
            DENSE_MAX_STEPS
        )));
    }
    let s = sqrt_4i::<T>();
    let g = gamma.sample(&grid);
    let w = weights.dense();
    let matrix: Vec<Vec<Complex<T>>> = w
        .iter()
        .enumerate()
        .map(|(n, row)| {
            row.iter()
                .enumerate()
                .map(|(j, wj)| {
                    let off = s * (*wj * g[j]);
                    if j == n { off + T::one() } else { off }
                })
                .collect()
        })
        .collect();
    let mut q: Vec<Complex<T>> = Vec::with_capacity(grid.len());
    for (n, row) in matrix.iter().enumerate() {
        let d = row[n];
        if d.norm() < T::lit(PIVOT_FLOOR) {
            return Err(Error::DiagonalDegeneracy { node: n, pivot: d.norm().to_f64_lossy() });
        }
        let acc = row[..n].iter().zip(&q).fold(f0.values[n], |acc, (a, x)| acc - *a * *x);
        q.push(if n == 0 { f0.values[0] } else { acc / d });
    }
    Ok(ChargeTrajectory { grid, q, q_dot: None, f0: f0.values.clone() })
}

/// Fourth-order finite differences of `q`: central inside, one-sided five-point at the ends.
pub fn estimate_q_dot<T: Real>(traj: &ChargeTrajectory<T>) -> Result<ComplexSignal<T>> {
    let n = traj.grid.n_steps;
    if n < 4 {
        return Err(Error::GridTooShort(format!("q̇ needs at least 4 steps, got {n}")));
    }
    let q = &traj.q;
    let c = T::one() / (T::lit(12.0) * traj.grid.step());
    let lin = |coef: [f64; 5], idx: [usize; 5]| {
        coef.iter().zip(idx).fold(Complex::new(T::zero(), T::zero()), |a, (k, i)| a + q[i] * T::lit(*k)) * c
    };
    const EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
    const EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
    let neg = |k: [f64; 5]| k.map(|v| -v);
    let mut out = Vec::with_capacity(n + 1);
    out.push(lin(EDGE0, [0, 1, 2, 3, 4]));
    out.push(lin(EDGE1, [0, 1, 2, 3, 4]));
    for m in 2..n - 1 {
        out.push(lin([1.0, -8.0, 0.0, 8.0, -1.0], [m - 2, m - 1, m, m + 1, m + 2]));
    }
    out.push(lin(neg(EDGE1), [n, n - 1, n - 2, n - 3, n - 4]));
    out.push(lin(neg(EDGE0), [n, n - 1, n - 2, n - 3, n - 4]));
    ComplexSignal::on_time_grid(&traj.grid, out)
}

/// Source that makes `q⋆` the exact solution: `f₀ = q⋆ + √(4i)·I[γq⋆]`, with the
/// half-integral evaluated by a fine Gauss–Legendre rule rather than the scheme's weights.
pub fn manufactured_source<T: Real>(
    q_star: impl Fn(T) -> Complex<T>,
    gamma: &GammaProfile<T>,
    grid: &TimeGrid<T>,
) -> Result<ComplexSignal<T>> {
    let quad = AbelQuadrature::new(20, 16)?;
    let s = sqrt_4i::<T>();
    let values = grid
        .nodes()
        .iter()
        .map(|&t| q_star(t) + s * quad.apply(|u| q_star(u) * gamma.evaluate(u), t))
        .collect();
    ComplexSignal::on_time_grid(grid, values)
}

/// `q⋆(t) = e^{iωt}`.
pub fn manufactured_charge<T: Real>(omega: T) -> impl Fn(T) -> Complex<T> {
    move |t| Complex::new(T::zero(), omega * t).exp()
}

/// Solution of `q = 1 − √(4i)γ·I q` for constant `γ`:
/// `Σₙ (−2√i γ)ⁿ tⁿᐟ²/Γ(1+n/2)`, summed until the terms fall below round-off.
pub fn resolvent_series<T: Real>(gamma: T, t: T) -> Complex<T> {
    let x = -sqrt_4i::<T>() * gamma * t.sqrt();
    let x2 = x * x;
    let mut even = Complex::new(T::one(), T::zero());
    let mut odd = x * (T::lit(2.0) / T::PI().sqrt());
    let mut sum = even + odd;
    let mut n = 0usize;
    while n < 2000 {
        even = even * x2 / (T::from_usize_lossy(n) / T::lit(2.0) + T::one());
        odd = odd * x2 / (T::from_usize_lossy(n + 1) / T::lit(2.0) + T::one());
        sum = sum + even + odd;
        n += 2;
        if even.norm() + odd.norm() <= T::epsilon() * sum.norm() && n > 4 {
            break;
        }
    }
    sum
}
