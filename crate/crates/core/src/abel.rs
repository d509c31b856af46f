//! The half-order integral `I f(t) = π^{−1/2} ∫₀ᵗ f(s)(t−s)^{−1/2} ds`.
//!
//! Discretized by product integration: `f` is replaced by its piecewise-linear
//! interpolant on the time grid and integrated exactly against the kernel.
//! Away from the first column the weights depend only on `n − j`, so they are
//! kept as two length-`N+1` tables instead of a triangular array.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{ComplexSignal, TimeGrid};
use crate::scalar::Real;

/// Kernel moments over one cell at distance `u ≥ 1` (in steps) from the evaluation node:
/// `(∫₀¹(u−θ)^{−1/2}(1−θ)dθ, ∫₀¹(u−θ)^{−1/2}θ dθ)`.
/// Written with `d = 1/(√u + √(u−1))` to avoid cancellation for large `u`.
fn cell_moments<T: Real>(u: usize) -> (T, T) {
    let a = T::from_usize_lossy(u).sqrt();
    let b = T::from_usize_lossy(u - 1).sqrt();
    let d = T::one() / (a + b);
    let two_thirds = T::lit(2.0) / T::lit(3.0);
    (two_thirds * d * (T::lit(2.0) - a * d), two_thirds * d * (a * d + T::one()))
}

/// Product-trapezoid weights: `(I f)(tₙ) ≈ Σⱼ w[n][j] f(tⱼ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelWeights<T> {
    pub grid: TimeGrid<T>,
    /// `w[n][n−m]` for `1 ≤ n−m`, indexed by `m = n − j`.
    interior: Vec<T>,
    /// `w[n][0]`, indexed by `n`.
    first: Vec<T>,
}

pub fn build_weights<T: Real>(grid: &TimeGrid<T>) -> AbelWeights<T> {
    let n = grid.n_steps;
    let scale = (grid.step() / T::PI()).sqrt();
    let moments: Vec<(T, T)> = std::iter::once((T::zero(), T::zero()))
        .chain((1..=n + 1).map(cell_moments))
        .collect();
    let mut interior = vec![T::zero(); n + 1];
    let mut first = vec![T::zero(); n + 1];
    interior[0] = scale * moments[1].1;
    for m in 1..=n {
        interior[m] = scale * (moments[m].0 + moments[m + 1].1);
        first[m] = scale * moments[m].0;
    }
    AbelWeights { grid: *grid, interior, first }
}

impl<T: Real> AbelWeights<T> {
    #[inline]
    pub fn weight(&self, n: usize, j: usize) -> T {
        if n == 0 || j > n {
            T::zero()
        } else if j == 0 {
            self.first[n]
        } else {
            self.interior[n - j]
        }
    }

    #[inline]
    pub fn diagonal(&self, n: usize) -> T {
        self.weight(n, n)
    }

    /// Row `n` as a vector of length `n + 1`.
    pub fn row(&self, n: usize) -> Vec<T> {
        (0..=n).map(|j| self.weight(n, j)).collect()
    }

    /// Full lower-triangular matrix, `(N+1)²` entries.
    pub fn dense(&self) -> Vec<Vec<T>> {
        (0..self.grid.len()).map(|n| self.row(n)).collect()
    }

    /// `Σⱼ w[n][j] f[j]` for every `n`.
    pub fn apply(&self, f: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..f.len()).map(|n| self.apply_row(n, f)).collect()
    }

    /// `Σ_{j≤n} w[n][j] f[j]`.
    pub fn apply_row(&self, n: usize, f: &[Complex<T>]) -> Complex<T> {
        if n == 0 {
            return Complex::new(T::zero(), T::zero());
        }
        let mut acc = f[0] * self.first[n];
        for j in 1..=n {
            acc = acc + f[j] * self.interior[n - j];
        }
        acc
    }
}

fn check_grid<T: Real>(f: &ComplexSignal<T>, grid: &TimeGrid<T>) -> Result<()> {
    if f.len() != grid.len() {
        return Err(Error::GridMismatch(format!("signal has {} samples, weights expect {}", f.len(), grid.len())));
    }
    let h = grid.step();
    if let Some(n) = f.nodes.iter().enumerate().position(|(n, s)| (*s - grid.node(n)).abs() > h * T::lit(1e-6)) {
        return Err(Error::GridMismatch(format!("signal node {n} is off the weight grid")));
    }
    Ok(())
}

/// `(I f)(tₙ)` at every node; `(I f)(0) = 0`.
pub fn half_integral<T: Real>(f: &ComplexSignal<T>, weights: &AbelWeights<T>) -> Result<ComplexSignal<T>> {
    check_grid(f, &weights.grid)?;
    ComplexSignal::new(f.nodes.clone(), weights.apply(&f.values))
}

/// `I[c(π·)^{−1/2}] ≡ c`, evaluated exactly instead of through the weights.
pub fn half_integral_singular<T: Real>(c: Complex<T>, weights: &AbelWeights<T>) -> ComplexSignal<T> {
    ComplexSignal { nodes: weights.grid.nodes(), values: vec![c; weights.grid.len()] }
}

/// Samples of `c(πs)^{−1/2}` for the raw weights; the value at `s = 0` is chosen
/// so the first-cell interpolant has the exact cell mean `2c/√(πh)`.
pub fn inverse_sqrt_samples<T: Real>(c: Complex<T>, grid: &TimeGrid<T>) -> ComplexSignal<T> {
    let h = grid.step();
    let values = grid
        .nodes()
        .iter()
        .map(|&s| {
            let s = if s == T::zero() { h / T::lit(9.0) } else { s };
            c / (T::PI() * s).sqrt()
        })
        .collect();
    ComplexSignal { nodes: grid.nodes(), values }
}

/// Composite Gauss–Legendre rule for `I f(t)` after `s = t − u²`:
/// `I f(t) = (2/√π) ∫₀^{√t} f(t − u²) du`, whose integrand is smooth for smooth `f`.
pub struct AbelQuadrature<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    panels: usize,
}

impl<T: Real> AbelQuadrature<T> {
    pub fn new(order: usize, panels: usize) -> Result<Self> {
        let order = NonZeroUsize::new(order).ok_or_else(|| Error::InvalidArgument("quadrature order must be positive".into()))?;
        if panels == 0 {
            return Err(Error::InvalidArgument("panel count must be positive".into()));
        }
        let rule = GaussLegendre::new(order);
        let (nodes, weights) = rule.as_node_weight_pairs().iter().map(|(x, w)| (T::lit(*x), T::lit(*w))).unzip();
        Ok(Self { nodes, weights, panels })
    }

    pub fn apply(&self, f: impl Fn(T) -> Complex<T>, t: T) -> Complex<T> {
        if t <= T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        let root = t.sqrt();
        let width = root / T::from_usize_lossy(self.panels);
        let half = width / T::lit(2.0);
        let mut acc = Complex::new(T::zero(), T::zero());
        for p in 0..self.panels {
            let mid = width * T::from_usize_lossy(p) + half;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                let u = mid + half * *x;
                acc = acc + f(t - u * u) * (*w * half);
            }
        }
        acc * (T::lit(2.0) / T::PI().sqrt())
    }
}
