//! Discrete Preisach hysteresis model and an inversion-free feedforward
//! compensator built around it.
//!
//! [`PreisachState`] holds the relay memory as a staircase over a
//! [`TriangularMesh`] weighted by a [`DensityGrid`]. [`Compensator`] closes a
//! high-gain integral loop around any [`HysteresisModel`]. The
//! [`experiments`] module wires both into reproducible CSV-producing runs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod batch;
pub mod compensator;
pub mod density;
pub mod error;
pub mod experiments;
pub mod mesh;
pub mod oracle;
pub mod signals;
pub mod state;

pub use compensator::{Compensator, CompensatorConfig, HysteresisModel, StaticGain};
pub use density::{DensityGrid, GaussianParams};
pub use error::{Error, Result};
pub use mesh::TriangularMesh;
pub use signals::{SampledSignal, SignalKind};
pub use state::{InitMode, PreisachState};
