//! The power function `P_{X,Φ_ε}(x)`, the norm of the interpolation error
//! functional at `x`:
//!
//! ```text
//! P²(x) = φ_ε(0) − b(x)ᵀ A⁻¹ b(x),   b(x)_j = φ_ε(‖x − x_j‖)
//! ```
//!
//! Positive definite kernels only.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interpolation::{ConditionGate, KernelSystem, Outcome};
use crate::kernel::RadialKernel;
use crate::points::PointSet;

/// Negative `P²` below `-CLAMP_TOL · φ_ε(0)` flags a conditioning warning.
const CLAMP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerEvaluation {
    pub kernel: RadialKernel,
    pub eps: f64,
    /// `P(x)` at each evaluation point.
    pub values: Vec<f64>,
    pub sup: f64,
    /// Some `P²` fell below the clamping threshold before the square root.
    pub conditioning_warning: bool,
}

impl KernelSystem {
    /// `P(x)` at every point, sharing this system's factorization.
    pub fn power_values<'a>(&self, points: impl IntoIterator<Item = &'a [f64]>) -> Result<PowerEvaluation> {
        if self.tail_len() > 0 {
            return Err(Error::UnsupportedKernel(self.kernel().id.to_string()));
        }
        let b = self.kernel_columns(points);
        let phi0 = self.kernel().value_at_zero();
        let forms = self
            .factorization()
            .quadratic_forms(&b)
            .ok_or_else(|| Error::Domain("factorization broke down".into()))?;
        let mut warning = false;
        let values: Vec<f64> = forms
            .into_iter()
            .map(|q| {
                let p2 = phi0 - q;
                if p2 < -CLAMP_TOL * phi0 {
                    warning = true;
                }
                p2.max(0.0).sqrt()
            })
            .collect();
        let sup = values.iter().copied().fold(0.0, f64::max);
        Ok(PowerEvaluation {
            kernel: *self.kernel(),
            eps: self.eps(),
            values,
            sup,
            conditioning_warning: warning,
        })
    }
}

pub fn power_at(
    kernel: &RadialKernel,
    eps: f64,
    sites: impl Into<Arc<PointSet>>,
    x: &[f64],
    gate: &ConditionGate,
) -> Result<Outcome<f64>> {
    let sites = sites.into();
    if x.len() != sites.dim() {
        return Err(Error::DimensionMismatch { expected: sites.dim(), got: x.len() });
    }
    Ok(match KernelSystem::factor(kernel, eps, sites, gate)? {
        Outcome::Ok(sys) => Outcome::Ok(sys.power_values([x])?.sup),
        Outcome::Skipped { status, cond_estimate } => Outcome::Skipped { status, cond_estimate },
    })
}

/// `max_{x ∈ grid} P(x)`.
pub fn power_sup(
    kernel: &RadialKernel,
    eps: f64,
    sites: impl Into<Arc<PointSet>>,
    grid: &PointSet,
    gate: &ConditionGate,
) -> Result<Outcome<PowerEvaluation>> {
    let sites = sites.into();
    if grid.dim() != sites.dim() {
        return Err(Error::DimensionMismatch { expected: sites.dim(), got: grid.dim() });
    }
    Ok(match KernelSystem::factor(kernel, eps, sites, gate)? {
        Outcome::Ok(sys) => Outcome::Ok(sys.power_values(grid.iter())?),
        Outcome::Skipped { status, cond_estimate } => Outcome::Skipped { status, cond_estimate },
    })
}

/// Expected algebraic decay exponent of `F_Φ(h)`: `β/2 − d/2` for finite
/// smoothness, `m − d/2` for polyharmonic kernels, `None` (faster than any
/// power) for analytic kernels.
pub fn expected_decay_exponent(kernel: &RadialKernel, dim: usize) -> Option<f64> {
    kernel.beta().map(|beta| beta / 2.0 - dim as f64 / 2.0)
}
