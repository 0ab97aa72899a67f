//! Numerical toolkit for nonlinear Schrödinger envelopes in lossy fibers:
//! spectral grids, split-step propagation, integrability checks, the
//! fiber ↔ standard NLSE transformation, closeness bounds, CW noise
//! amplitudes and orbital distances.

pub mod closeness;
pub mod coefficient;
pub mod cw_noise;
pub mod error;
pub mod grid;
pub mod orbital;
pub mod painleve;
pub mod propagator;
pub mod solutions;
pub mod transform;

pub use coefficient::Coefficient;
pub use error::{Error, Result};
pub use grid::{fmt_f64, norms, spectral_derivative, Envelope, NormReport, TimeGrid, C64};
pub use propagator::{
    propagate, residual, EquationSpec, GeneralCoefficients, Scheme, Snapshot, StepperConfig,
    Trajectory,
};

/// Crate version, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
