//! Structural checks on a solved run: norm conservation on the window, the boundary
//! condition, the quadratic form for constant coupling, fractional seminorms and
//! refinement studies.

use std::collections::BTreeMap;

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::abel::AbelWeights;
use crate::charge::ChargeTrajectory;
use crate::error::{Error, Result};
use crate::model::{ComplexSignal, GammaProfile, SpatialGrid};
use crate::reconstruction::{derivative_at_origin, eta, Reconstructor, WavefunctionFrame};
use crate::scalar::Real;

/// `‖ψ‖²` on `[−L, L]` with `ψ = φ + qη`:
/// `∫|φ|² + 2Re(q̄∫φη) + |q|²L/2`. The cross term is a trapezoid sum corrected for
/// the kink of `φη` at the origin (`+dx²φ′(0)/12`); `η²` is integrated exactly.
pub fn window_norm_sq<T: Real>(frame: &WavefunctionFrame<T>, grid: &SpatialGrid<T>) -> T {
    let dx = grid.dx();
    let phi = &frame.phi.values;
    let own: T = phi.iter().map(|v| v.norm_sqr()).sum::<T>() * dx;
    let cross = phi
        .iter()
        .zip(&frame.phi.nodes)
        .fold(Complex::new(T::zero(), T::zero()), |a, (v, x)| a + *v * eta(*x))
        * dx;
    let cross = cross + derivative_at_origin(grid, phi) * (dx * dx / T::lit(12.0));
    own + T::lit(2.0) * (frame.q.conj() * cross).re + frame.q.norm_sqr() * grid.half_width / T::lit(2.0)
}

/// `‖ψ(t)‖/‖ψ(0)‖` on the window for each frame (the first frame is the reference).
pub fn norm_conservation<T: Real>(frames: &[WavefunctionFrame<T>], grid: &SpatialGrid<T>) -> Result<Vec<T>> {
    let first = frames.first().ok_or_else(|| Error::InvalidArgument("no frames".into()))?;
    if frames.iter().any(|f| f.phi.len() != grid.n_points) {
        return Err(Error::GridMismatch("frames must share the spatial grid".into()));
    }
    let n0 = window_norm_sq(first, grid).sqrt();
    Ok(frames.iter().map(|f| window_norm_sq(f, grid).sqrt() / n0).collect())
}

/// `max |r − 1|` over a norm trace.
pub fn max_drift<T: Real>(ratios: &[T]) -> T {
    ratios.iter().map(|r| (*r - T::one()).abs()).fold(T::zero(), T::max)
}

/// Boundary-condition residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryResidual<T> {
    /// `|φ′(0,tₙ) − γ(tₙ)q(tₙ)|` at every node.
    pub raw: Vec<T>,
    /// `|I[φ′(0,·) − γq](tₙ)|` at every node.
    pub smoothed: Vec<T>,
}

/// Residuals from the reconstruction's exact boundary derivative at every node.
/// `trace` is `(U(tₙ)φ₀)′(0)`.
pub fn boundary_residual<T: Real>(
    reconstructor: &Reconstructor<'_, T>,
    traj: &ChargeTrajectory<T>,
    gamma: &GammaProfile<T>,
    weights: &AbelWeights<T>,
    trace: &[Complex<T>],
) -> BoundaryResidual<T> {
    let d = reconstructor.boundary_derivative_trace(trace);
    let g = gamma.sample(&traj.grid);
    let r: Vec<Complex<T>> = d.iter().zip(&traj.q).zip(&g).map(|((d, q), g)| *d - *q * *g).collect();
    BoundaryResidual { raw: r.iter().map(|v| v.norm()).collect(), smoothed: weights.apply(&r).iter().map(|v| v.norm()).collect() }
}

/// `|φ′(0) − γq|` at each frame, with `φ′(0)` estimated from the frame samples.
pub fn frame_boundary_residual<T: Real>(frames: &[WavefunctionFrame<T>], grid: &SpatialGrid<T>, gamma: &GammaProfile<T>) -> Vec<T> {
    frames
        .iter()
        .map(|f| (derivative_at_origin(grid, &f.phi.values) - f.q * gamma.evaluate(f.t)).norm())
        .collect()
}

/// `Q_γ = ‖φ′‖² + γ|q|²` per frame; refused unless `γ` is constant.
pub fn energy_trace<T: Real>(
    reconstructor: &Reconstructor<'_, T>,
    frames: &[WavefunctionFrame<T>],
    gamma: &GammaProfile<T>,
) -> Result<Vec<T>> {
    let g = match gamma {
        GammaProfile::Constant { value } => *value,
        _ => return Err(Error::NonConstantGamma),
    };
    let dx = reconstructor.grid().dx();
    frames
        .iter()
        .map(|f| {
            let (d1, _) = reconstructor.phi_derivatives(f)?;
            Ok(d1.iter().map(|v| v.norm_sqr()).sum::<T>() * dx + g * f.q.norm_sqr())
        })
        .collect()
}

/// `max |Q(t)/Q(0) − 1|`.
pub fn relative_energy_drift<T: Real>(energy: &[T]) -> T {
    let e0 = energy[0];
    energy.iter().map(|e| ((*e - e0) / e0).abs()).fold(T::zero(), T::max)
}

/// `sup ‖Hψ(t+h) − Hψ(t)‖` over the given consecutive frame pairs.
pub fn action_modulus<T: Real>(pairs: &[(WavefunctionFrame<T>, WavefunctionFrame<T>)], grid: &SpatialGrid<T>) -> Result<T> {
    let dx = grid.dx();
    pairs.iter().try_fold(T::zero(), |m, (a, b)| {
        let (ha, hb) = match (&a.h_psi, &b.h_psi) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(Error::InvalidArgument("frames lack the Hamiltonian action".into())),
        };
        let d: T = ha.values.iter().zip(&hb.values).map(|(x, y)| (*x - *y).norm_sqr()).sum::<T>() * dx;
        Ok(m.max(d.sqrt()))
    })
}

fn check_nu<T: Real>(nu: T) -> Result<()> {
    if nu > T::zero() && nu < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("seminorm index must lie in (0, 1), got {nu}")))
    }
}

/// Gagliardo seminorm `(∫∫ |f(s)−f(s′)|²/|s−s′|^{1+2ν})^{1/2}` on the sampled interval.
///
/// `f` is taken piecewise linear. Off-diagonal cell pairs use the midpoint values;
/// each diagonal cell contributes its exact value `|f′|²·2h^{3−2ν}/((2−2ν)(3−2ν))`.
pub fn gagliardo_seminorm<T: Real>(f: &ComplexSignal<T>, nu: T) -> Result<T> {
    check_nu(nu)?;
    if f.len() < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let m = f.len() - 1;
    let h = (f.nodes[m] - f.nodes[0]) / T::from_usize_lossy(m);
    let mids: Vec<Complex<T>> = f.values.windows(2).map(|w| (w[0] + w[1]) * T::lit(0.5)).collect();
    let p = T::one() + T::lit(2.0) * nu;
    // |c_i − c_j|^{−p} depends only on |i − j|
    let kernel: Vec<T> = (0..m).map(|d| if d == 0 { T::zero() } else { (h * T::from_usize_lossy(d)).powf(-p) }).collect();
    let mut off = T::zero();
    for i in 0..m {
        for j in i + 1..m {
            off = off + (mids[i] - mids[j]).norm_sqr() * kernel[j - i];
        }
    }
    let two = T::lit(2.0);
    let diag_factor = two * h.powf(T::lit(3.0) - two * nu) / ((two - two * nu) * (T::lit(3.0) - two * nu));
    let diag: T = f.values.windows(2).map(|w| ((w[1] - w[0]) / h).norm_sqr()).sum::<T>() * diag_factor;
    Ok((two * off * h * h + diag).sqrt())
}

/// As [`gagliardo_seminorm`] for `f` extended by zero outside the sampled window,
/// adding the exact exterior contribution `2Σ h|fᵢ|²·((b−sᵢ)^{−2ν} + (sᵢ−a)^{−2ν})/(2ν)`.
pub fn gagliardo_seminorm_line<T: Real>(f: &ComplexSignal<T>, nu: T) -> Result<T> {
    let inner = gagliardo_seminorm(f, nu)?;
    let m = f.len() - 1;
    let h = (f.nodes[m] - f.nodes[0]) / T::from_usize_lossy(m);
    let (a, b) = (f.nodes[0] - h * T::lit(0.5), f.nodes[m] + h * T::lit(0.5));
    let two_nu = T::lit(2.0) * nu;
    let ext: T = f
        .nodes
        .iter()
        .zip(&f.values)
        .map(|(s, v)| v.norm_sqr() * ((b - *s).powf(-two_nu) + (*s - a).powf(-two_nu)))
        .sum::<T>()
        * h
        / two_nu;
    Ok((inner * inner + T::lit(2.0) * ext).sqrt())
}

/// `Σ |k|^{2ν}|f̂(k)|² dk/2π` for samples on a uniform grid, `f̂` from the DFT.
pub fn fourier_energy<T: Real>(f: &ComplexSignal<T>, nu: T) -> Result<T> {
    check_nu(nu)?;
    let n = f.len();
    let dx = (f.nodes[n - 1] - f.nodes[0]) / T::from_usize_lossy(n - 1);
    let mut buf = f.values.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let dk = T::lit(2.0) * T::PI() / (dx * T::from_usize_lossy(n));
    let s: T = buf
        .iter()
        .enumerate()
        .map(|(m, v)| {
            let k = if m <= n / 2 { T::from_usize_lossy(m) } else { -T::from_usize_lossy(n - m) } * dk;
            k.abs().powf(T::lit(2.0) * nu) * (*v * dx).norm_sqr()
        })
        .sum();
    Ok(s * dk / (T::lit(2.0) * T::PI()))
}

/// Fourier-side seminorm `[f]² = C_ν Σ|k|^{2ν}|f̂|² dk/2π` with `C_ν` fitted on a Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierSeminorm<T> {
    pub nu: T,
    pub constant: T,
}

impl<T: Real> FourierSeminorm<T> {
    /// Calibrates `C_ν` as the ratio of the two sides for `e^{−x²}` on `[−8, 8)`.
    pub fn calibrate(nu: T) -> Result<Self> {
        let n = 1024;
        let grid = SpatialGrid::new(T::lit(8.0), n)?;
        let nodes = grid.nodes();
        let g = ComplexSignal::new(nodes.clone(), nodes.iter().map(|x| Complex::new((-*x * *x).exp(), T::zero())).collect())?;
        let direct = gagliardo_seminorm_line(&g, nu)?;
        let spectral = fourier_energy(&g, nu)?;
        Ok(Self { nu, constant: direct * direct / spectral })
    }

    pub fn evaluate(&self, f: &ComplexSignal<T>) -> Result<T> {
        Ok((self.constant * fourier_energy(f, self.nu)?).sqrt())
    }
}

/// Quantity whose refinement behaviour a study tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `max |q_h − q|` against the manufactured charge, or against a finer solve.
    Charge,
    /// `max |‖ψ(t)‖/‖ψ₀‖ − 1|`.
    NormDrift,
    /// `max |I[φ′(0) − γq]|`.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_steps: usize,
    pub h: f64,
    pub error: f64,
    /// `log₂(e_{k−1}/e_k)`; absent on the first row.
    pub order: Option<f64>,
}

/// Fills in observed orders from successive error ratios (grids refined by 2).
pub fn with_orders(rows: Vec<(usize, f64, f64)>) -> Vec<ConvergenceRow> {
    let mut out: Vec<ConvergenceRow> = Vec::with_capacity(rows.len());
    for (n_steps, h, error) in rows {
        let order = out.last().map(|p| (p.error / error).log2());
        out.push(ConvergenceRow { n_steps, h, error, order });
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub frame_times: Vec<f64>,
    /// `‖ψ(t)‖/‖ψ₀‖` at the frames.
    pub norm_trace: Vec<f64>,
    pub max_norm_drift: f64,
    /// Raw residual at every node.
    pub boundary_residual: Vec<f64>,
    pub max_boundary_residual: f64,
    pub smoothed_residual: Vec<f64>,
    pub max_smoothed_residual: f64,
    /// Residual at the frames with `φ′(0)` estimated from the samples.
    pub frame_boundary_residual: Vec<f64>,
    /// `|ψ(0⁺) − ψ(0⁻) − q|` at the frames.
    pub jump_error: Vec<f64>,
    pub energy_trace: Option<Vec<f64>>,
    pub energy_drift: Option<f64>,
    pub convergence_table: Vec<ConvergenceRow>,
    pub gagliardo: BTreeMap<String, f64>,
}
