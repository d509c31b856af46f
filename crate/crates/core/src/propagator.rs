//! Free evolution `U(t) = e^{itΔ}`: spectral propagation on the periodic grid,
//! closed-form evolution of the Gaussian family and the boundary trace
//! `(U(t)φ₀)′(0)`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::model::{ComplexSignal, InitialDatum, Profile, ProfileKind, SpatialGrid, TimeGrid};
use crate::scalar::{cis, Real};
use crate::special::u_eta_prime_at_zero;

/// Fraction of the points on each side that counts as the grid edge.
const EDGE_FRACTION: f64 = 0.05;

/// Fraction of `Σ|ψ|²` carried by the outer [`EDGE_FRACTION`] of the grid on either side.
pub fn edge_mass_fraction<T: Real>(values: &[Complex<T>]) -> T {
    let n = values.len();
    let m = ((n as f64 * EDGE_FRACTION).ceil() as usize).max(1);
    let total: T = values.iter().map(|v| v.norm_sqr()).sum();
    if total == T::zero() {
        return T::zero();
    }
    let edge: T = values[..m].iter().chain(&values[n - m..]).map(|v| v.norm_sqr()).sum();
    edge / total
}

/// `e^{itΔ}` on a periodic grid by multiplication with `e^{−ik²t}` in Fourier space.
pub struct SpectralPropagator<T: Real> {
    grid: SpatialGrid<T>,
    wavenumbers: Vec<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    boundary_mass: T,
    cache: Vec<(T, Vec<Complex<T>>)>,
}

impl<T: Real> SpectralPropagator<T> {
    pub fn new(grid: SpatialGrid<T>, boundary_mass: T) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            wavenumbers: grid.wavenumbers(),
            forward: planner.plan_fft_forward(grid.n_points),
            inverse: planner.plan_fft_inverse(grid.n_points),
            boundary_mass,
            cache: Vec::new(),
        }
    }

    pub fn grid(&self) -> &SpatialGrid<T> {
        &self.grid
    }

    pub fn wavenumbers(&self) -> &[T] {
        &self.wavenumbers
    }

    fn phases(&self, t: T) -> Vec<Complex<T>> {
        self.wavenumbers.iter().map(|k| cis(-*k * *k * t)).collect()
    }

    /// Caches the multiplier for `t`; later calls to [`propagate`](Self::propagate) reuse it.
    pub fn prepare(&mut self, t: T) {
        if !self.cache.iter().any(|(s, _)| *s == t) {
            let p = self.phases(t);
            self.cache.push((t, p));
        }
    }

    /// `U(t)ψ`; refuses input whose edge mass exceeds the configured tolerance.
    pub fn propagate(&self, psi: &ComplexSignal<T>, t: T) -> Result<ComplexSignal<T>> {
        if psi.len() != self.grid.n_points {
            return Err(Error::GridMismatch(format!(
                "signal has {} samples, grid has {}",
                psi.len(),
                self.grid.n_points
            )));
        }
        let mass = edge_mass_fraction(&psi.values);
        if mass > self.boundary_mass {
            return Err(Error::BoundaryMass { mass: mass.to_f64_lossy(), tolerance: self.boundary_mass.to_f64_lossy() });
        }
        Ok(ComplexSignal { nodes: psi.nodes.clone(), values: self.propagate_values(&psi.values, t) })
    }

    /// `U(t)` on raw samples, without the edge-mass check.
    pub fn propagate_values(&self, values: &[Complex<T>], t: T) -> Vec<Complex<T>> {
        if t == T::zero() {
            return values.to_vec();
        }
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        let cached = self.cache.iter().find(|(s, _)| *s == t).map(|(_, p)| p);
        match cached {
            Some(p) => buf.iter_mut().zip(p).for_each(|(b, p)| *b = *b * *p),
            None => buf.iter_mut().zip(&self.wavenumbers).for_each(|(b, k)| *b = *b * cis(-*k * *k * t)),
        }
        self.inverse.process(&mut buf);
        let scale = T::one() / T::from_usize_lossy(self.grid.n_points);
        buf.iter_mut().for_each(|b| *b = *b * scale);
        buf
    }

    /// First and second spectral derivatives of periodic samples (Nyquist mode dropped from the first).
    pub fn derivatives(&self, values: &[Complex<T>]) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let n = self.grid.n_points;
        let mut spec = values.to_vec();
        self.forward.process(&mut spec);
        let mut d1 = spec.clone();
        let mut d2 = spec;
        for m in 0..n {
            let k = self.wavenumbers[m];
            d1[m] = if m == n / 2 { Complex::new(T::zero(), T::zero()) } else { d1[m] * Complex::new(T::zero(), k) };
            d2[m] = d2[m] * (-k * k);
        }
        self.inverse.process(&mut d1);
        self.inverse.process(&mut d2);
        let scale = T::one() / T::from_usize_lossy(n);
        d1.iter_mut().chain(d2.iter_mut()).for_each(|v| *v = *v * scale);
        (d1, d2)
    }
}

/// `e^{itΔ}e^{−ax²} = (1+4iat)^{−1/2} e^{−ax²/(1+4iat)}` and
/// `e^{itΔ}(x e^{−ax²}) = x(1+4iat)^{−3/2} e^{−ax²/(1+4iat)}`.
pub fn gaussian_evolve<T: Real>(a: T, kind: ProfileKind, t: T, x: T) -> Complex<T> {
    let w = Complex::new(T::one(), T::lit(4.0) * a * t);
    let s = w.sqrt();
    let e = (Complex::new(-a * x * x, T::zero()) / w).exp();
    match kind {
        ProfileKind::Gaussian => e / s,
        ProfileKind::XGaussian => e * x / (w * s),
    }
}

/// Spatial derivative at `x = 0` of [`gaussian_evolve`]: `0` for the Gaussian, `(1+4iat)^{−3/2}` otherwise.
pub fn gaussian_evolve_dx_at_zero<T: Real>(a: T, kind: ProfileKind, t: T) -> Complex<T> {
    match kind {
        ProfileKind::Gaussian => Complex::new(T::zero(), T::zero()),
        ProfileKind::XGaussian => {
            let w = Complex::new(T::one(), T::lit(4.0) * a * t);
            (w * w.sqrt()).inv()
        }
    }
}

/// `U(t)φ` of the closed-form part at `x`.
pub fn evolve_closed<T: Real>(profile: &Profile<T>, t: T, x: T) -> Complex<T> {
    profile
        .terms
        .iter()
        .map(|term| term.coeff * gaussian_evolve(term.a, term.kind, t, x))
        .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
}

/// `U(t)φ` sampled on a grid: closed-form terms exactly, tabulated part spectrally.
pub fn evolve_on_grid<T: Real>(
    profile: &Profile<T>,
    propagator: &SpectralPropagator<T>,
    t: T,
) -> Result<Vec<Complex<T>>> {
    let grid = *propagator.grid();
    let mut out: Vec<Complex<T>> = (0..grid.n_points).map(|j| evolve_closed(profile, t, grid.x(j))).collect();
    if let Some(tab) = &profile.tabulated {
        if tab.grid != grid {
            return Err(Error::GridMismatch("tabulated profile lives on a different spatial grid".into()));
        }
        let sig = ComplexSignal { nodes: grid.nodes(), values: tab.values.clone() };
        let evolved = propagator.propagate(&sig, t)?;
        out.iter_mut().zip(evolved.values).for_each(|(a, b)| *a = *a + b);
    }
    Ok(out)
}

/// Symmetric trapezoid grid `k ∈ [−k_max, k_max]` for the trace integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceQuadrature<T> {
    pub dk: T,
    pub k_max: T,
}

impl<T: Real> TraceQuadrature<T> {
    /// Phase advance of `e^{−ik²t}` across one cell at the largest wavenumber and time.
    pub fn phase_step(&self, t_max: T) -> T {
        T::lit(2.0) * self.dk * self.k_max * t_max
    }

    fn check(&self, t_max: T) -> Result<()> {
        let p = self.phase_step(t_max);
        if !(p < T::lit(0.5)) {
            return Err(Error::OscillationResolution { phase_step: p.to_f64_lossy() });
        }
        Ok(())
    }
}

/// Relative cut-off of `|k φ̂(k)|` defining `k_max`.
const SPECTRUM_CUTOFF: f64 = 1e-14;
/// Phase step used when the quadrature is chosen automatically.
const AUTO_PHASE_STEP: f64 = 0.4;

/// Largest `|k|` where `|k·f(k)|` exceeds `SPECTRUM_CUTOFF` times its maximum, by scanning outward.
fn spectral_extent<T: Real>(f: impl Fn(T) -> Complex<T>, probe_max: T, probe_points: usize) -> T {
    let step = probe_max / T::from_usize_lossy(probe_points);
    let mags: Vec<(T, T)> = (0..=probe_points)
        .flat_map(|i| {
            let k = step * T::from_usize_lossy(i);
            [(k, (f(k) * k).norm()), (k, (f(-k) * k).norm())]
        })
        .collect();
    let peak = mags.iter().map(|m| m.1).fold(T::zero(), T::max);
    if peak == T::zero() {
        return step;
    }
    let cut = peak * T::lit(SPECTRUM_CUTOFF);
    mags.iter().filter(|m| m.1 > cut).map(|m| m.0).fold(step, T::max) + step
}

/// Quadrature that resolves `e^{−ik²t}` up to `t_max` for the closed-form part of `profile`.
pub fn auto_quadrature<T: Real>(profile: &Profile<T>, t_max: T) -> TraceQuadrature<T> {
    let a_min = profile.terms.iter().map(|t| t.a).fold(T::infinity(), T::min);
    let probe = if a_min.is_finite() { T::lit(2.0) * (T::lit(4.0) * a_min * T::lit(45.0)).sqrt() } else { T::one() };
    let k_max = spectral_extent(|k| profile.closed_fourier(k), probe, 4000);
    let a_max = profile.terms.iter().map(|t| t.a).fold(T::zero(), T::max).max(T::lit(1e-3));
    let dk = (T::lit(AUTO_PHASE_STEP) / (T::lit(2.0) * k_max * t_max.max(T::lit(1e-12))))
        .min(a_max.sqrt() / T::lit(8.0))
        .min(k_max / T::lit(64.0));
    TraceQuadrature { dk, k_max }
}

/// `(U(t)φ₀)′(0)` at every node of `times`, by k-quadrature of `(2π)^{−1}∫ e^{−ik²t}(ik)φ̂₀(k) dk`.
/// The closed-form part uses the analytic transform; a tabulated part a zero-padded DFT.
pub fn trace_route_fourier<T: Real>(phi0: &Profile<T>, times: &TimeGrid<T>) -> Result<ComplexSignal<T>> {
    let nodes = times.nodes();
    let values = trace_at(phi0, &nodes, None)?;
    ComplexSignal::new(nodes, values)
}

/// As [`trace_route_fourier`] with an explicit closed-form quadrature, refused if it cannot resolve the phase.
pub fn trace_route_fourier_with<T: Real>(
    phi0: &Profile<T>,
    times: &TimeGrid<T>,
    quadrature: TraceQuadrature<T>,
) -> Result<ComplexSignal<T>> {
    let nodes = times.nodes();
    let values = trace_at(phi0, &nodes, Some(quadrature))?;
    ComplexSignal::new(nodes, values)
}

/// The trace at arbitrary times `t ≥ 0`.
pub fn trace_at<T: Real>(
    phi0: &Profile<T>,
    times: &[T],
    quadrature: Option<TraceQuadrature<T>>,
) -> Result<Vec<Complex<T>>> {
    let t_max = times.iter().copied().fold(T::zero(), T::max);
    let mut out = vec![Complex::new(T::zero(), T::zero()); times.len()];
    if !phi0.terms.is_empty() {
        let q = quadrature.unwrap_or_else(|| auto_quadrature(phi0, t_max));
        q.check(t_max)?;
        let m = (q.k_max / q.dk).ceil().to_usize().unwrap_or(0);
        // k·φ̂(k) at symmetric nodes; the integrand at k=0 vanishes
        let samples: Vec<(T, Complex<T>)> = (1..=m)
            .flat_map(|i| {
                let k = q.dk * T::from_usize_lossy(i);
                [(k, phi0.closed_fourier(k) * Complex::new(T::zero(), k)), (-k, phi0.closed_fourier(-k) * Complex::new(T::zero(), -k))]
            })
            .collect();
        let scale = q.dk / (T::lit(2.0) * T::PI());
        for (o, &t) in out.iter_mut().zip(times) {
            let s = samples
                .iter()
                .fold(Complex::new(T::zero(), T::zero()), |acc, (k, v)| acc + *v * cis(-*k * *k * t));
            *o = s * scale;
        }
    }
    if let Some(tab) = &phi0.tabulated {
        let extra = tabulated_trace(&tab.grid, &tab.values, times, t_max)?;
        out.iter_mut().zip(extra).for_each(|(a, b)| *a = *a + b);
    }
    Ok(out)
}

fn tabulated_trace<T: Real>(
    grid: &SpatialGrid<T>,
    values: &[Complex<T>],
    times: &[T],
    t_max: T,
) -> Result<Vec<Complex<T>>> {
    let n = grid.n_points;
    let dx = grid.dx();
    // k_max from the unpadded spectrum
    let mut spec = values.to_vec();
    let mut planner = FftPlanner::<T>::new();
    planner.plan_fft_forward(n).process(&mut spec);
    let ks = grid.wavenumbers();
    let peak = spec.iter().zip(&ks).map(|(s, k)| s.norm() * k.abs()).fold(T::zero(), T::max);
    let k_max = spec
        .iter()
        .zip(&ks)
        .filter(|(s, k)| s.norm() * k.abs() > peak * T::lit(SPECTRUM_CUTOFF))
        .map(|(_, k)| k.abs())
        .fold(T::zero(), T::max);
    if k_max == T::zero() {
        return Ok(vec![Complex::new(T::zero(), T::zero()); times.len()]);
    }
    let mut pad = 1usize;
    while T::lit(2.0) * (T::PI() / (grid.half_width * T::from_usize_lossy(pad))) * k_max * t_max >= T::lit(AUTO_PHASE_STEP) {
        pad *= 2;
        if pad > 1 << 12 {
            return Err(Error::OscillationResolution {
                phase_step: (T::lit(2.0) * T::PI() / grid.half_width * k_max * t_max).to_f64_lossy(),
            });
        }
    }
    let padded_grid = SpatialGrid { half_width: grid.half_width * T::from_usize_lossy(pad), n_points: n * pad };
    let np = padded_grid.n_points;
    let offset = np / 2 - n / 2;
    let mut buf = vec![Complex::new(T::zero(), T::zero()); np];
    buf[offset..offset + n].copy_from_slice(values);
    planner.plan_fft_forward(np).process(&mut buf);
    let kp = padded_grid.wavenumbers();
    let x0 = padded_grid.x(0);
    let dk = T::PI() / padded_grid.half_width;
    let samples: Vec<(T, Complex<T>)> = (0..np)
        .filter(|&m| m != np / 2 && kp[m].abs() <= k_max)
        .map(|m| {
            let k = kp[m];
            let hat = buf[m] * cis(-k * x0) * dx;
            (k, hat * Complex::new(T::zero(), k))
        })
        .collect();
    let scale = dk / (T::lit(2.0) * T::PI());
    Ok(times
        .iter()
        .map(|&t| samples.iter().fold(Complex::new(T::zero(), T::zero()), |acc, (k, v)| acc + *v * cis(-*k * *k * t)) * scale)
        .collect())
}

/// `(U(s)ψ₀)′(0) = (U(s)φ₀)′(0) + q₀(4πis)^{−1/2}` at `s > 0`.
pub fn trace_full_psi0<T: Real>(datum: &InitialDatum<T>, times: &[T]) -> Result<ComplexSignal<T>> {
    if times.iter().any(|t| !(*t > T::zero())) {
        return Err(Error::SingularTrace);
    }
    let regular = trace_at(&datum.phi0, times, None)?;
    let values = regular
        .into_iter()
        .zip(times)
        .map(|(g, &s)| Ok(g + datum.q0 * u_eta_prime_at_zero(s)?))
        .collect::<Result<Vec<_>>>()?;
    ComplexSignal::new(times.to_vec(), values)
}
