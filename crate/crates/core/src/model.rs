//! Problem description: grids, the coupling profile `γ(t)`, the initial datum and
//! the scenario document that ties them together.
//!
//! The JSON scenario is parsed into the `*Config` structs (always `f64`) and then
//! lowered into the generic numerical types with [`Scenario::from_config`].

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{is_finite, Real};

/// Required agreement between `datum.gamma0` and `γ(0)`.
pub const GAMMA0_MATCH: f64 = 1e-12;
/// Required accuracy of the compatibility condition `φ₀′(0) = γ₀ q₀`.
pub const COMPATIBILITY_TOL: f64 = 1e-12;

/// Uniform time grid `tₙ = n·h`, `h = t_final / n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    pub t_final: T,
    pub n_steps: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t_final: T, n_steps: usize) -> Result<Self> {
        if !(t_final > T::zero() && t_final.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_final must be positive, got {t_final}")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
        }
        Ok(Self { t_final, n_steps })
    }

    #[inline]
    pub fn step(&self) -> T {
        self.t_final / T::from_usize_lossy(self.n_steps)
    }

    #[inline]
    pub fn node(&self, n: usize) -> T {
        T::from_usize_lossy(n) * self.step()
    }

    /// Number of nodes, `n_steps + 1`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.len()).map(|n| self.node(n)).collect()
    }

    /// Index of the node equal to `t` (up to a few ulps of the step), if any.
    pub fn index_of(&self, t: T) -> Option<usize> {
        let h = self.step();
        let r = t / h;
        let n = r.round();
        if n < T::zero() || (r - n).abs() > T::lit(1e-6) {
            return None;
        }
        let n = n.to_usize()?;
        (n <= self.n_steps).then_some(n)
    }

    /// Same interval, `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Self {
        Self { t_final: self.t_final, n_steps: self.n_steps * factor }
    }
}

/// Uniform periodic grid on `[−L, L)`: `xⱼ = (j − N/2)·dx`, `dx = 2L/N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid<T> {
    pub half_width: T,
    pub n_points: usize,
}

impl<T: Real> SpatialGrid<T> {
    pub fn new(half_width: T, n_points: usize) -> Result<Self> {
        let g = Self { half_width, n_points };
        let v = g.violations();
        if v.is_empty() {
            Ok(g)
        } else {
            Err(Error::InvalidArgument(v.join("; ")))
        }
    }

    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.half_width > T::zero() && self.half_width.is_finite()) {
            v.push(format!("spatial half width must be positive, got {}", self.half_width));
        }
        if self.n_points < 2 {
            v.push(format!("spatial grid needs at least 2 points, got {}", self.n_points));
        }
        if self.n_points % 2 != 0 {
            v.push("spatial grid size must be even".into());
        }
        v
    }

    #[inline]
    pub fn dx(&self) -> T {
        T::lit(2.0) * self.half_width / T::from_usize_lossy(self.n_points)
    }

    /// Index of the node at `x = 0`.
    #[inline]
    pub fn zero_index(&self) -> usize {
        self.n_points / 2
    }

    #[inline]
    pub fn x(&self, j: usize) -> T {
        let m = j as f64 - (self.n_points / 2) as f64;
        T::lit(m) * self.dx()
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Angular wavenumbers in FFT order; the Nyquist entry is `−π/dx`.
    pub fn wavenumbers(&self) -> Vec<T> {
        let n = self.n_points;
        let dk = T::PI() / self.half_width;
        (0..n)
            .map(|m| {
                let s = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
                T::lit(s) * dk
            })
            .collect()
    }
}

/// Closed-form profile families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// `e^{−ax²}`
    Gaussian,
    /// `x·e^{−ax²}`
    XGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTerm<T> {
    pub kind: ProfileKind,
    pub a: T,
    pub coeff: Complex<T>,
}

impl<T: Real> GaussianTerm<T> {
    pub fn value(&self, x: T) -> Complex<T> {
        let g = (-self.a * x * x).exp();
        match self.kind {
            ProfileKind::Gaussian => self.coeff * g,
            ProfileKind::XGaussian => self.coeff * (x * g),
        }
    }

    pub fn derivative(&self, x: T) -> Complex<T> {
        let g = (-self.a * x * x).exp();
        let two_a = T::lit(2.0) * self.a;
        match self.kind {
            ProfileKind::Gaussian => self.coeff * (-two_a * x * g),
            ProfileKind::XGaussian => self.coeff * ((T::one() - two_a * x * x) * g),
        }
    }

    pub fn second_derivative(&self, x: T) -> Complex<T> {
        let g = (-self.a * x * x).exp();
        let a = self.a;
        let x2 = x * x;
        match self.kind {
            ProfileKind::Gaussian => self.coeff * ((T::lit(4.0) * a * a * x2 - T::lit(2.0) * a) * g),
            ProfileKind::XGaussian => {
                self.coeff * ((T::lit(4.0) * a * a * x2 * x - T::lit(6.0) * a * x) * g)
            }
        }
    }

    /// `∫ e^{−ikx} f(x) dx`.
    pub fn fourier(&self, k: T) -> Complex<T> {
        let base = (T::PI() / self.a).sqrt() * (-k * k / (T::lit(4.0) * self.a)).exp();
        match self.kind {
            ProfileKind::Gaussian => self.coeff * base,
            ProfileKind::XGaussian => {
                self.coeff * Complex::new(T::zero(), -k / (T::lit(2.0) * self.a) * base)
            }
        }
    }
}

/// Samples of a profile on a spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile<T> {
    pub grid: SpatialGrid<T>,
    pub values: Vec<Complex<T>>,
}

/// A smooth profile: closed-form Gaussian terms plus an optional tabulated part.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T> {
    pub terms: Vec<GaussianTerm<T>>,
    pub tabulated: Option<TabulatedProfile<T>>,
}

impl<T: Real> Default for Profile<T> {
    fn default() -> Self {
        Self { terms: Vec::new(), tabulated: None }
    }
}

impl<T: Real> Profile<T> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn gaussian(a: T, coeff: Complex<T>) -> Self {
        Self { terms: vec![GaussianTerm { kind: ProfileKind::Gaussian, a, coeff }], tabulated: None }
    }

    pub fn x_gaussian(a: T, coeff: Complex<T>) -> Self {
        Self { terms: vec![GaussianTerm { kind: ProfileKind::XGaussian, a, coeff }], tabulated: None }
    }

    pub fn plus(mut self, other: Profile<T>) -> Self {
        self.terms.extend(other.terms);
        match (&mut self.tabulated, other.tabulated) {
            (None, t) => self.tabulated = t,
            (Some(_), None) => {}
            (Some(a), Some(b)) => {
                for (x, y) in a.values.iter_mut().zip(b.values) {
                    *x = *x + y;
                }
            }
        }
        self
    }

    pub fn is_closed_form(&self) -> bool {
        self.tabulated.is_none()
    }

    /// Value of the closed-form part at `x`.
    pub fn closed_value(&self, x: T) -> Complex<T> {
        self.terms.iter().map(|t| t.value(x)).fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    pub fn closed_derivative(&self, x: T) -> Complex<T> {
        self.terms
            .iter()
            .map(|t| t.derivative(x))
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    pub fn closed_second_derivative(&self, x: T) -> Complex<T> {
        self.terms
            .iter()
            .map(|t| t.second_derivative(x))
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    pub fn closed_fourier(&self, k: T) -> Complex<T> {
        self.terms.iter().map(|t| t.fourier(k)).fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    /// `φ′(0)`. Exact for the closed-form part; spectral for the tabulated part.
    pub fn derivative_at_zero(&self) -> Complex<T> {
        let closed = self
            .terms
            .iter()
            .filter(|t| t.kind == ProfileKind::XGaussian)
            .fold(Complex::new(T::zero(), T::zero()), |a, t| a + t.coeff);
        match &self.tabulated {
            None => closed,
            Some(tab) => closed + spectral_derivative_at_zero(&tab.grid, &tab.values),
        }
    }

    /// Samples on `grid` (closed-form part evaluated exactly).
    pub fn sample(&self, grid: &SpatialGrid<T>) -> Result<Vec<Complex<T>>> {
        let mut v: Vec<Complex<T>> = (0..grid.n_points).map(|j| self.closed_value(grid.x(j))).collect();
        if let Some(tab) = &self.tabulated {
            if tab.grid != *grid {
                return Err(Error::GridMismatch("tabulated profile lives on a different spatial grid".into()));
            }
            for (a, b) in v.iter_mut().zip(&tab.values) {
                *a = *a + *b;
            }
        }
        Ok(v)
    }
}

/// Spectral derivative at `x = 0` of samples on a periodic grid.
pub(crate) fn spectral_derivative_at_zero<T: Real>(grid: &SpatialGrid<T>, values: &[Complex<T>]) -> Complex<T> {
    let n = grid.n_points;
    let mut buf = values.to_vec();
    let mut planner = FftPlanner::<T>::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let ks = grid.wavenumbers();
    let x0 = grid.x(0);
    let mut acc = Complex::new(T::zero(), T::zero());
    for m in 0..n {
        if m == n / 2 {
            continue;
        }
        // sample j sits at x0 + j·dx, so x = 0 corresponds to phase e^{−i k x0}
        let phase = crate::scalar::cis(-ks[m] * x0);
        acc = acc + buf[m] * Complex::new(T::zero(), ks[m]) * phase;
    }
    acc / T::from_usize_lossy(n)
}

/// The real coupling `γ(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaProfile<T> {
    Constant { value: T },
    /// `mean + Σₙ cosₙ cos(2πnt/P) + sinₙ sin(2πnt/P)`.
    SmoothFourier { mean: T, period: T, cos: Vec<T>, sin: Vec<T> },
    /// `mean + amplitude·Σₙ n^{−decay} cos(2πnt/P + θₙ)`.
    RoughFourier { mean: T, amplitude: T, period: T, decay: T, sobolev_index: T, phases: Vec<T> },
    /// Piecewise-linear interpolation of samples, clamped outside the table.
    Tabulated { t: Vec<T>, values: Vec<T> },
}

impl<T: Real> GammaProfile<T> {
    pub fn constant(value: T) -> Self {
        Self::Constant { value }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant { .. })
    }

    pub fn evaluate(&self, t: T) -> T {
        match self {
            Self::Constant { value } => *value,
            Self::SmoothFourier { mean, period, cos, sin } => {
                let w = T::lit(2.0) * T::PI() / *period;
                let mut acc = *mean;
                for (n, c) in cos.iter().enumerate() {
                    acc = acc + *c * (w * T::from_usize_lossy(n + 1) * t).cos();
                }
                for (n, s) in sin.iter().enumerate() {
                    acc = acc + *s * (w * T::from_usize_lossy(n + 1) * t).sin();
                }
                acc
            }
            Self::RoughFourier { mean, amplitude, period, decay, phases, .. } => {
                let w = T::lit(2.0) * T::PI() / *period;
                let mut acc = T::zero();
                for (i, th) in phases.iter().enumerate() {
                    let n = T::from_usize_lossy(i + 1);
                    acc = acc + n.powf(-*decay) * (w * n * t + *th).cos();
                }
                *mean + *amplitude * acc
            }
            Self::Tabulated { t: ts, values } => interpolate(ts, values, t),
        }
    }

    pub fn sample(&self, grid: &TimeGrid<T>) -> Vec<T> {
        (0..grid.len()).map(|n| self.evaluate(grid.node(n))).collect()
    }
}

fn interpolate<T: Real>(ts: &[T], vs: &[T], t: T) -> T {
    if ts.is_empty() {
        return T::nan();
    }
    if t <= ts[0] {
        return vs[0];
    }
    let last = ts.len() - 1;
    if t >= ts[last] {
        return vs[last];
    }
    let i = ts.partition_point(|&s| s <= t) - 1;
    let w = (t - ts[i]) / (ts[i + 1] - ts[i]);
    vs[i] + (vs[i + 1] - vs[i]) * w
}

/// Seeded rough coupling in `H^{s+0.01}(0,T)`: coefficient magnitudes decay like
/// `n^{−(s + 1/2 + 0.01)}`. Phases are drawn sequentially, so a run with more modes
/// extends a run with fewer.
pub fn synthesize_rough_gamma<T: Real>(seed: u64, sobolev_index: f64, n_modes: usize, t_final: T) -> Result<GammaProfile<T>> {
    if !(sobolev_index > 0.5 && sobolev_index < 1.5) {
        return Err(Error::InvalidArgument(format!("sobolev_index must lie in (1/2, 3/2), got {sobolev_index}")));
    }
    if n_modes == 0 {
        return Err(Error::InvalidArgument("n_modes must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases = (0..n_modes)
        .map(|_| T::lit(rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    Ok(GammaProfile::RoughFourier {
        mean: T::one(),
        amplitude: T::lit(0.5),
        period: t_final,
        decay: T::lit(sobolev_index + 0.51),
        sobolev_index: T::lit(sobolev_index),
        phases,
    })
}

/// `ψ₀ = φ₀ + q₀η` with `φ₀′(0) = γ₀q₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDatum<T> {
    pub phi0: Profile<T>,
    pub q0: Complex<T>,
    pub gamma0: T,
    /// Coefficient `c` of the `c·x·e^{−x²}` term added to enforce compatibility.
    pub correction: Complex<T>,
}

impl<T: Real> InitialDatum<T> {
    pub fn compatibility_residual(&self) -> T {
        (self.phi0.derivative_at_zero() - self.q0 * self.gamma0).norm()
    }
}

/// Adds `c·x·e^{−x²}` with `c = γ₀q₀ − base′(0)`, so `φ₀′(0) = γ₀q₀`.
pub fn make_initial_datum<T: Real>(base: Profile<T>, q0: Complex<T>, gamma0: T) -> InitialDatum<T> {
    let c = q0 * gamma0 - base.derivative_at_zero();
    let phi0 = if c.norm() == T::zero() { base } else { base.plus(Profile::x_gaussian(T::one(), c)) };
    InitialDatum { phi0, q0, gamma0, correction: c }
}

/// Samples of a complex function on real nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal<T> {
    pub nodes: Vec<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> ComplexSignal<T> {
    pub fn new(nodes: Vec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "signal has {} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !is_finite(*v)) {
            return Err(Error::InvalidArgument(format!("non-finite signal value at index {i}")));
        }
        Ok(Self { nodes, values })
    }

    pub fn on_time_grid(grid: &TimeGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        Self::new(grid.nodes(), values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }
}

/// Named tolerances with defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Tolerances(pub BTreeMap<String, f64>);

impl Tolerances {
    pub const DEFAULTS: &'static [(&'static str, f64)] = &[
        ("boundary_mass", 1e-10),
        ("field_edge_mass", 1e-6),
        ("norm_drift", 1e-3),
        ("smoothed_residual", 1e-3),
        ("energy_drift", 1e-2),
        ("order_floor", 1.4),
        ("far_field", 1e-2),
    ];

    pub fn get(&self, name: &str) -> f64 {
        if let Some(v) = self.0.get(name) {
            return *v;
        }
        Self::DEFAULTS.iter().find(|(k, _)| *k == name).map(|(_, v)| *v).unwrap_or(f64::NAN)
    }

    /// All tolerances in effect (defaults overlaid with explicit values).
    pub fn resolved(&self) -> BTreeMap<String, f64> {
        let mut m: BTreeMap<String, f64> = Self::DEFAULTS.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        m.extend(self.0.iter().map(|(k, v)| (k.clone(), *v)));
        m
    }
}

/// Manufactured charge `q⋆(t) = e^{iωt}`; the source is built so that `q⋆` solves the charge equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedConfig {
    #[serde(default = "one")]
    pub omega: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone)]
pub struct Scenario<T> {
    pub time_grid: TimeGrid<T>,
    pub spatial_grid: SpatialGrid<T>,
    pub gamma: GammaProfile<T>,
    pub datum: InitialDatum<T>,
    pub tolerances: Tolerances,
    pub manufactured: Option<ManufacturedConfig>,
}

impl<T: Real> Scenario<T> {
    /// Lowers a parsed document; fails with every violated invariant.
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let s = Self::from_config_unchecked(cfg)?;
        let v = validate_scenario(&s);
        if v.is_empty() {
            Ok(s)
        } else {
            Err(Error::InvalidScenario(v))
        }
    }

    /// Lowers a parsed document without checking grid or datum invariants.
    pub fn from_config_unchecked(cfg: &ScenarioConfig) -> Result<Self> {
        let time_grid = TimeGrid { t_final: T::lit(cfg.time.t_final), n_steps: cfg.time.n_steps };
        let spatial_grid = SpatialGrid { half_width: T::lit(cfg.space.half_width), n_points: cfg.space.n_points };
        let gamma = cfg.gamma.lower::<T>(cfg.time.t_final)?;
        let mut base = Profile::zero();
        for term in &cfg.datum.base {
            base.terms.push(GaussianTerm {
                kind: term.kind,
                a: T::lit(term.a),
                coeff: Complex::new(T::lit(term.coeff[0]), T::lit(term.coeff[1])),
            });
        }
        if let Some(tab) = &cfg.datum.tabulated {
            if tab.re.len() != tab.im.len() {
                return Err(Error::InvalidArgument("tabulated datum: re/im lengths differ".into()));
            }
            base.tabulated = Some(TabulatedProfile {
                grid: spatial_grid,
                values: tab.re.iter().zip(&tab.im).map(|(r, i)| Complex::new(T::lit(*r), T::lit(*i))).collect(),
            });
        }
        let q0 = Complex::new(T::lit(cfg.datum.q0[0]), T::lit(cfg.datum.q0[1]));
        let gamma0 = match cfg.datum.gamma0 {
            Some(g) => T::lit(g),
            None => gamma.evaluate(T::zero()),
        };
        let datum = make_initial_datum(base, q0, gamma0);
        Ok(Self {
            time_grid,
            spatial_grid,
            gamma,
            datum,
            tolerances: cfg.tolerances.clone(),
            manufactured: cfg.manufactured,
        })
    }
}

/// Every violated invariant, with the offending value. Empty iff the scenario is consistent.
pub fn validate_scenario<T: Real>(s: &Scenario<T>) -> Vec<String> {
    let mut v = Vec::new();
    let tg = &s.time_grid;
    if !(tg.t_final > T::zero() && tg.t_final.is_finite()) {
        v.push(format!("t_final must be positive: {}", tg.t_final));
    }
    if tg.n_steps == 0 {
        v.push("n_steps must be at least 1".into());
    }
    v.extend(s.spatial_grid.violations());

    if let GammaProfile::Tabulated { t, values } = &s.gamma {
        if t.len() != values.len() || t.is_empty() {
            v.push(format!("tabulated gamma: {} times vs {} values", t.len(), values.len()));
        } else if t.windows(2).any(|w| w[1] <= w[0]) {
            v.push("tabulated gamma: times must be strictly increasing".into());
        }
    }
    if let GammaProfile::SmoothFourier { period, .. } | GammaProfile::RoughFourier { period, .. } = &s.gamma {
        if !(*period > T::zero()) {
            v.push(format!("gamma period must be positive: {period}"));
        }
    }
    if v.is_empty() {
        if let Some(bad) = s.gamma.sample(tg).iter().position(|g| !g.is_finite()) {
            v.push(format!("gamma not finite at node {bad}"));
        }
    }

    let g0 = s.gamma.evaluate(T::zero());
    if (s.datum.gamma0 - g0).abs() > T::lit(GAMMA0_MATCH) {
        v.push(format!("gamma0 mismatch: {} vs {}", s.datum.gamma0, g0));
    }
    for (i, term) in s.datum.phi0.terms.iter().enumerate() {
        if !(term.a > T::zero()) {
            v.push(format!("datum term {i}: width parameter a must be positive, got {}", term.a));
        }
    }
    if let Some(tab) = &s.datum.phi0.tabulated {
        if tab.values.len() != s.spatial_grid.n_points {
            v.push(format!(
                "tabulated datum has {} samples but the spatial grid has {}",
                tab.values.len(),
                s.spatial_grid.n_points
            ));
        }
    }
    if !is_finite(s.datum.q0) {
        v.push("q0 not finite".into());
    }
    let res = s.datum.compatibility_residual();
    if !(res <= T::lit(COMPATIBILITY_TOL) * (T::one() + (s.datum.q0 * s.datum.gamma0).norm())) {
        v.push(format!("compatibility phi0'(0) = gamma0*q0 violated by {res}"));
    }
    for (k, val) in &s.tolerances.0 {
        if !(val.is_finite() && *val > 0.0) {
            v.push(format!("tolerance {k} must be positive and finite, got {val}"));
        }
    }
    v
}

// ---------------------------------------------------------------------------
// JSON document

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub time: TimeConfig,
    pub space: SpaceConfig,
    pub gamma: GammaConfig,
    pub datum: DatumConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manufactured: Option<ManufacturedConfig>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_final: f64,
    pub n_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GammaConfig {
    Constant {
        value: f64,
    },
    SmoothFourier {
        mean: f64,
        period: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    RoughFourier {
        seed: u64,
        sobolev_index: f64,
        n_modes: usize,
    },
    Tabulated {
        t: Vec<f64>,
        values: Vec<f64>,
    },
}

impl GammaConfig {
    fn lower<T: Real>(&self, t_final: f64) -> Result<GammaProfile<T>> {
        let lit = |v: &[f64]| v.iter().map(|x| T::lit(*x)).collect::<Vec<T>>();
        Ok(match self {
            Self::Constant { value } => GammaProfile::Constant { value: T::lit(*value) },
            Self::SmoothFourier { mean, period, cos, sin } => GammaProfile::SmoothFourier {
                mean: T::lit(*mean),
                period: T::lit(*period),
                cos: lit(cos),
                sin: lit(sin),
            },
            Self::RoughFourier { seed, sobolev_index, n_modes } => {
                synthesize_rough_gamma(*seed, *sobolev_index, *n_modes, T::lit(t_final))?
            }
            Self::Tabulated { t, values } => GammaProfile::Tabulated { t: lit(t), values: lit(values) },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumConfig {
    #[serde(default)]
    pub base: Vec<TermConfig>,
    pub q0: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tabulated: Option<TabulatedConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub kind: ProfileKind,
    pub a: f64,
    pub coeff: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedConfig {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}
