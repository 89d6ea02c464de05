//! Scale-free baselines: least-squares polynomials and polyharmonic
//! interpolants.
//!
//! Both stand in for the `ε → 0` limit of scaled interpolation: analytic
//! kernels tend to polynomials, finite-smoothness kernels to polyharmonic
//! splines.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interpolation::{self, ConditionGate, Outcome};
use crate::kernel::RadialKernel;
use crate::monomials;
use crate::norms::native_norm_of_interpolant;
use crate::points::PointSet;

/// Singular values below this fraction of the largest are discarded.
pub const DEFAULT_PINV_CUTOFF: f64 = 1e-12;

/// Upper limit on the tried polynomial degree, to bound runtime.
pub const MAX_DEGREE_CAP: u32 = 20;

/// Largest degree whose basis fits in `n` sites, capped at [`MAX_DEGREE_CAP`].
pub fn default_max_degree(dim: usize, n: usize) -> u32 {
    monomials::max_degree_for(dim, n).unwrap_or(0).min(MAX_DEGREE_CAP)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialFit {
    pub degree: u32,
    pub basis: Vec<Vec<u32>>,
    pub coefficients: Vec<f64>,
    /// Max error on the evaluation grid at the chosen degree.
    pub error: f64,
    /// Max error for every degree `0..=max_degree`.
    pub errors: Vec<f64>,
}

impl PolynomialFit {
    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.basis
            .iter()
            .zip(&self.coefficients)
            .map(|(e, c)| c * monomials::eval(e, x))
            .sum()
    }
}

fn vandermonde(points: &PointSet, basis: &[Vec<u32>]) -> DMatrix<f64> {
    DMatrix::from_fn(points.len(), basis.len(), |i, q| monomials::eval(&basis[q], points.point(i)))
}

/// Least-squares coefficients through a truncated pseudoinverse.
pub fn least_squares(v: &DMatrix<f64>, y: &DVector<f64>, cutoff: f64) -> DVector<f64> {
    let svd = v.clone().svd(true, true);
    let tol = cutoff * svd.singular_values.max();
    svd.solve(y, tol).expect("u and v_t were requested")
}

/// Least-squares polynomial fits of degree `0..=max_degree`, keeping the one
/// with the smallest max error against `truth` on `eval_grid`.
///
/// Ties go to the lower degree.
pub fn fit_polynomial(
    sites: &PointSet,
    values: &[f64],
    eval_grid: &PointSet,
    truth: &[f64],
    max_degree: u32,
    cutoff: f64,
) -> Result<PolynomialFit> {
    if values.len() != sites.len() {
        return Err(Error::DimensionMismatch { expected: sites.len(), got: values.len() });
    }
    if truth.len() != eval_grid.len() {
        return Err(Error::DimensionMismatch { expected: eval_grid.len(), got: truth.len() });
    }
    if monomials::count(sites.dim(), max_degree) > sites.len() {
        return Err(Error::Domain(format!(
            "degree {max_degree} needs {} sites, have {}",
            monomials::count(sites.dim(), max_degree),
            sites.len()
        )));
    }
    let y = DVector::from_column_slice(values);
    let fits: Vec<(Vec<Vec<u32>>, Vec<f64>, f64)> = (0..=max_degree)
        .into_par_iter()
        .map(|deg| {
            let basis = monomials::exponents(sites.dim(), deg);
            let c = least_squares(&vandermonde(sites, &basis), &y, cutoff);
            let c: Vec<f64> = c.iter().copied().collect();
            let fitted = vandermonde(eval_grid, &basis) * DVector::from_column_slice(&c);
            let err = fitted.iter().zip(truth).map(|(p, t)| (p - t).abs()).fold(0.0, f64::max);
            (basis, c, err)
        })
        .collect();

    let errors: Vec<f64> = fits.iter().map(|f| f.2).collect();
    let mut best = 0;
    for (deg, &e) in errors.iter().enumerate() {
        if e < errors[best] {
            best = deg;
        }
    }
    let (basis, coefficients, error) = fits.into_iter().nth(best).expect("at least degree 0");
    Ok(PolynomialFit {
        degree: best as u32,
        basis,
        coefficients,
        error,
        errors,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyharmonicBaseline {
    pub kernel: RadialKernel,
    /// Max error on the evaluation grid.
    pub error: f64,
    pub native_norm: f64,
    pub cond_estimate: f64,
}

/// Error of the polyharmonic interpolant of `values` on `eval_grid`.
pub fn polyharmonic_baseline(
    kernel: &RadialKernel,
    sites: impl Into<Arc<PointSet>>,
    values: &[f64],
    eval_grid: &PointSet,
    truth: &[f64],
    gate: &ConditionGate,
) -> Result<Outcome<PolyharmonicBaseline>> {
    if !kernel.is_polyharmonic() {
        return Err(Error::UnsupportedKernel(kernel.id.to_string()));
    }
    if truth.len() != eval_grid.len() {
        return Err(Error::DimensionMismatch { expected: eval_grid.len(), got: truth.len() });
    }
    // The scale is ignored by polyharmonic kernels.
    let outcome = interpolation::solve(kernel, 1.0, sites, values, gate)?;
    Ok(outcome.map(|s| {
        let error = s
            .evaluate(eval_grid.iter())
            .iter()
            .zip(truth)
            .map(|(v, t)| (v - t).abs())
            .fold(0.0, f64::max);
        PolyharmonicBaseline {
            kernel: *kernel,
            error,
            native_norm: native_norm_of_interpolant(&s).value,
            cond_estimate: s.cond_estimate,
        }
    }))
}
