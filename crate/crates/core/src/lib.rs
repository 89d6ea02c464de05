//! Scaled radial-basis-function interpolation on point sets in `ℝ^d`.
//!
//! The crate covers interpolation with kernels `φ(ε‖x − y‖)`, power
//! functions, native-space norms, flat-limit polynomial baselines, the
//! scale-sweep experiment and the small-ε expansion study.

pub mod bessel;
pub mod error;
pub mod expansion;
pub mod flat_limit;
pub mod interpolation;
pub mod kernel;
pub mod linalg;
pub mod monomials;
pub mod norms;
pub mod points;
pub mod power;
pub mod quadrature;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use interpolation::{
    ConditionGate, Interpolant, KernelSystem, LagrangeBasis, Outcome, Status, DEFAULT_COND_LIMIT,
};
pub use kernel::{KernelId, KernelSpectrum, RadialKernel, Smoothness, SpectrumKind};
pub use norms::{NativeNorm, NormScan, SpectralFunction};
pub use points::PointSet;
pub use power::PowerEvaluation;
pub use sweep::{SweepConfig, SweepRecord, TestFunction};
