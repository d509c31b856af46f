//! Schrödinger evolution on the line with a time-dependent point interaction of
//! derivative type at the origin, solved through a half-order Volterra equation
//! for the boundary charge.

pub mod abel;
pub mod charge;
pub mod diagnostics;
pub mod error;
pub mod model;
pub mod export;
pub mod identities;
pub mod pipeline;
pub mod propagator;
pub mod reconstruction;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use model::*;
pub use scalar::Real;

/// Concrete aliases for the two supported scalars.
pub type Scenario64 = Scenario<f64>;
pub type Scenario32 = Scenario<f32>;
pub type ChargeTrajectory64 = charge::ChargeTrajectory<f64>;
pub type ChargeTrajectory32 = charge::ChargeTrajectory<f32>;
pub type Frame64 = reconstruction::WavefunctionFrame<f64>;
pub type Frame32 = reconstruction::WavefunctionFrame<f32>;
pub type Signal64 = ComplexSignal<f64>;
pub type Signal32 = ComplexSignal<f32>;
