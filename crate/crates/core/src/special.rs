//! Closed-form kernels of the free evolution acting on the step `η = sgn/2`.
//!
//! The Fresnel primitive `F(z) = ∫₀^z e^{iu²} du` is evaluated by its Taylor
//! series for `|z| ≤ 4` (`|z| ≤ 2` in single precision) and through the complementary tail
//! `G(z) = ∫_z^∞ e^{iu²} du = F(∞) − F(z)` otherwise. The tail is computed from
//! the continued fraction of `erfc` along the ray `e^{−iπ/4}·ℝ₊`, whose
//! convergents are rational in `z` multiplied by `e^{iz²}`.
//!
//! All complex powers use the principal branch.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cis, sqrt_i, Real};

/// Cross-over between the Taylor series and the continued-fraction tail.
pub const FRESNEL_SWITCH: f64 = 4.0;
/// Cross-over in single precision, where the series loses about `e^{z²}` ulps to cancellation.
pub const FRESNEL_SWITCH_SINGLE: f64 = 2.0;

#[inline]
fn switch<T: Real>() -> T {
    if T::epsilon() > T::lit(1e-10) {
        T::lit(FRESNEL_SWITCH_SINGLE)
    } else {
        T::lit(FRESNEL_SWITCH)
    }
}

const MAX_SERIES_TERMS: usize = 400;
const MAX_FRACTION_TERMS: usize = 2000;

/// `F(∞) = ∫₀^∞ e^{iu²} du = √(πi)/2`.
#[inline]
pub fn fresnel_limit<T: Real>() -> Complex<T> {
    sqrt_i::<T>() * (T::PI().sqrt() / T::lit(2.0))
}

/// `(πi)^{−1/2}`, prefactor of `U(t)η`.
#[inline]
fn inv_sqrt_pi_i<T: Real>() -> Complex<T> {
    sqrt_i::<T>().conj() / T::PI().sqrt()
}

/// `∫₀^z e^{iu²} du` for real `z`. Odd in `z` bit-for-bit.
pub fn fresnel<T: Real>(z: T) -> Complex<T> {
    let a = z.abs();
    let v = if a <= switch() {
        fresnel_series(a)
    } else {
        fresnel_limit::<T>() - fresnel_tail_fraction(a)
    };
    if z.is_sign_negative() {
        -v
    } else {
        v
    }
}

/// `G(z) = ∫_z^∞ e^{iu²} du` for `z ≥ 0`, computed without cancellation for large `z`.
pub fn fresnel_tail<T: Real>(z: T) -> Complex<T> {
    debug_assert!(z >= T::zero());
    if z <= switch() {
        fresnel_limit::<T>() - fresnel_series(z)
    } else {
        fresnel_tail_fraction(z)
    }
}

/// Taylor series `Σ iⁿ z^{2n+1} / (n! (2n+1))`.
pub fn fresnel_series<T: Real>(z: T) -> Complex<T> {
    let z2 = z * z;
    let mut term = Complex::new(z, T::zero());
    let mut sum = term;
    for n in 1..MAX_SERIES_TERMS {
        let nf = T::from_usize_lossy(n);
        term = term * Complex::new(T::zero(), z2 / nf);
        let contrib = term / (T::lit(2.0) * nf + T::one());
        sum = sum + contrib;
        if contrib.norm() <= T::epsilon() * T::lit(0.01) * sum.norm() {
            break;
        }
    }
    sum
}

/// Tail `G(z)` from the continued fraction
/// `erfc(w) = e^{−w²}/√π · 1/(w + ½/(w + 1/(w + 3/2/(w + …))))`, `w = e^{−iπ/4} z`,
/// using `G(z) = ½ e^{iπ/4} e^{iz²} K(w)` where `K` is the fraction.
/// Modified Lentz evaluation.
pub fn fresnel_tail_fraction<T: Real>(z: T) -> Complex<T> {
    let w = sqrt_i::<T>().conj() * z;
    let tiny = T::min_positive_value().sqrt();
    let mut f = w;
    let mut c = w;
    let mut d = Complex::new(T::zero(), T::zero());
    for k in 1..MAX_FRACTION_TERMS {
        let a = T::from_usize_lossy(k) / T::lit(2.0);
        d = w + d * a;
        if d.norm() < tiny {
            d = Complex::new(tiny, T::zero());
        }
        d = d.inv();
        c = w + c.inv() * a;
        if c.norm() < tiny {
            c = Complex::new(tiny, T::zero());
        }
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).norm() <= T::epsilon() {
            break;
        }
    }
    sqrt_i::<T>() * cis(z * z) / (f * T::lit(2.0))
}

fn require_positive<T: Real>(t: T) -> Result<()> {
    if t > T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time must be positive, got {t}")))
    }
}

/// `(U(t)η)(x) = (πi)^{−1/2} F(x / 2√t)`.
pub fn u_eta<T: Real>(t: T, x: T) -> Result<Complex<T>> {
    require_positive(t)?;
    Ok(u_eta_unchecked(t, x))
}

#[inline]
pub(crate) fn u_eta_unchecked<T: Real>(t: T, x: T) -> Complex<T> {
    inv_sqrt_pi_i::<T>() * fresnel(x / (T::lit(2.0) * t.sqrt()))
}

/// `(U(t)η)′(0) = (4πit)^{−1/2}`.
pub fn u_eta_prime_at_zero<T: Real>(t: T) -> Result<Complex<T>> {
    require_positive(t)?;
    Ok(inv_sqrt_pi_i::<T>() / (T::lit(2.0) * t.sqrt()))
}

/// `∂ₜ(U(t)η)(x) = −½ (4πi)^{−1/2} x t^{−3/2} e^{ix²/4t}`.
pub fn dt_u_eta<T: Real>(t: T, x: T) -> Result<Complex<T>> {
    require_positive(t)?;
    let half = T::lit(0.5);
    let pref = inv_sqrt_pi_i::<T>() * (-half * half * x / (t * t.sqrt()));
    Ok(pref * cis(x * x / (T::lit(4.0) * t)))
}

/// Free propagator kernel `e^{ix²/4t} / √(4πit)`.
pub fn free_kernel<T: Real>(t: T, x: T) -> Result<Complex<T>> {
    require_positive(t)?;
    Ok(inv_sqrt_pi_i::<T>() / (T::lit(2.0) * t.sqrt()) * cis(x * x / (T::lit(4.0) * t)))
}

/// `∫₀^τ (U(σ)η)(x) dσ`, odd in `x`.
///
/// With `z = x/2√τ`, a primitive is `(πi)^{−1/2}[τF(z) + (ix²/2)G(z) + (x√τ/2)e^{iz²}]`
/// for `x ≥ 0`; it vanishes at `τ = 0⁺`.
pub fn u_eta_time_primitive<T: Real>(tau: T, x: T) -> Complex<T> {
    if tau <= T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let ax = x.abs();
    let st = tau.sqrt();
    let z = ax / (T::lit(2.0) * st);
    let half = T::lit(0.5);
    let phase = cis(ax * ax / (T::lit(4.0) * tau));
    let v = fresnel(z) * tau
        + fresnel_tail(z) * Complex::new(T::zero(), half * ax * ax)
        + phase * (half * ax * st);
    let v = inv_sqrt_pi_i::<T>() * v;
    if x.is_sign_negative() {
        -v
    } else {
        v
    }
}

/// `∫₀^τ σ^{−1/2} e^{ix²/4σ} dσ = 2√τ e^{iz²} + 2i|x| G(z)`, even in `x`.
pub fn phase_integral_inv_sqrt<T: Real>(tau: T, x: T) -> Complex<T> {
    if tau <= T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let ax = x.abs();
    let st = tau.sqrt();
    let z = ax / (T::lit(2.0) * st);
    let two = T::lit(2.0);
    cis(ax * ax / (T::lit(4.0) * tau)) * (two * st)
        + fresnel_tail(z) * Complex::new(T::zero(), two * ax)
}

/// `∫₀^τ σ^{1/2} e^{ix²/4σ} dσ = (2/3)τ^{3/2}e^{iz²} + (i/3)x²√τ e^{iz²} − (|x|³/3) G(z)`, even in `x`.
pub fn phase_integral_sqrt<T: Real>(tau: T, x: T) -> Complex<T> {
    if tau <= T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let ax = x.abs();
    let st = tau.sqrt();
    let z = ax / (T::lit(2.0) * st);
    let third = T::one() / T::lit(3.0);
    let phase = cis(ax * ax / (T::lit(4.0) * tau));
    phase * Complex::new(T::lit(2.0) * third * tau * st, third * ax * ax * st)
        - fresnel_tail(z) * (third * ax * ax * ax)
}
