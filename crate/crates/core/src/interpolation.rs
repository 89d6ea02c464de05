//! Scaled kernel interpolation.
//!
//! For a positive definite kernel the coefficients solve `A α = y` with
//! `A_jk = φ_ε(‖x_j − x_k‖)`. Conditionally positive definite kernels add a
//! polynomial tail and solve the saddle system
//!
//! ```text
//! [ A   P ] [ λ ]   [ y ]
//! [ Pᵀ  0 ] [ γ ] = [ 0 ]
//! ```
//!
//! where `P` holds the tail monomials at the sites.
//!
//! Every system passes a [`ConditionGate`] before it is solved. A tripped
//! gate is not an error: it yields [`Outcome::Skipped`] so that scale sweeps
//! can record it and move on.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::RadialKernel;
use crate::linalg::{self, Factor};
use crate::monomials;
use crate::points::{distance, PointSet};

pub const DEFAULT_COND_LIMIT: f64 = 1e14;

/// Relative singular-value threshold for the tail unisolvency check.
const UNISOLVENCY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionGate {
    pub limit: f64,
}

impl Default for ConditionGate {
    fn default() -> Self {
        ConditionGate { limit: DEFAULT_COND_LIMIT }
    }
}

impl ConditionGate {
    pub fn new(limit: f64) -> Self {
        ConditionGate { limit }
    }

    pub fn passes(&self, estimate: f64) -> bool {
        estimate <= self.limit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Ok,
    SkippedCondition,
    SkippedSingular,
    Baseline,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::SkippedCondition => "skipped(condition)",
            Status::SkippedSingular => "skipped(singular)",
            Status::Baseline => "baseline",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Status::Ok, Status::SkippedCondition, Status::SkippedSingular, Status::Baseline]
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown status {s:?}")))
    }
}

/// Result of a gated computation.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<T> {
    Ok(T),
    Skipped { status: Status, cond_estimate: f64 },
}

impl<T> Outcome<T> {
    pub fn ok(self) -> Option<T> {
        match self {
            Outcome::Ok(v) => Some(v),
            Outcome::Skipped { .. } => None,
        }
    }

    pub fn as_ref(&self) -> Outcome<&T> {
        match self {
            Outcome::Ok(v) => Outcome::Ok(v),
            Outcome::Skipped { status, cond_estimate } => Outcome::Skipped {
                status: *status,
                cond_estimate: *cond_estimate,
            },
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Outcome<U> {
        match self {
            Outcome::Ok(v) => Outcome::Ok(f(v)),
            Outcome::Skipped { status, cond_estimate } => Outcome::Skipped { status, cond_estimate },
        }
    }

    pub fn status(&self) -> Status {
        match self {
            Outcome::Ok(_) => Status::Ok,
            Outcome::Skipped { status, .. } => *status,
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, Outcome::Ok(_))
    }

    /// Unwraps a solved value; panics on a skipped outcome.
    pub fn expect_ok(self, msg: &str) -> T {
        match self {
            Outcome::Ok(v) => v,
            Outcome::Skipped { status, cond_estimate } => {
                panic!("{msg}: {status} (condition estimate {cond_estimate:e})")
            }
        }
    }
}

/// Kernel matrix, plus the monomial block and zero corner for CPD kernels.
pub fn assemble(kernel: &RadialKernel, eps: f64, sites: &PointSet) -> Result<DMatrix<f64>> {
    check_eps(kernel, eps)?;
    let tail = tail_basis(kernel, sites.dim());
    Ok(assemble_with_tail(kernel, eps, sites, &tail))
}

fn assemble_with_tail(kernel: &RadialKernel, eps: f64, sites: &PointSet, tail: &[Vec<u32>]) -> DMatrix<f64> {
    let n = sites.len();
    let l = tail.len();
    let scale = kernel.effective_scale(eps);
    let mut a = DMatrix::zeros(n + l, n + l);
    let diag = kernel.value(0.0);
    for j in 0..n {
        a[(j, j)] = diag;
        let xj = sites.point(j);
        for k in 0..j {
            let v = kernel.value(scale * distance(xj, sites.point(k)));
            a[(j, k)] = v;
            a[(k, j)] = v;
        }
        for (q, exps) in tail.iter().enumerate() {
            let v = monomials::eval(exps, xj);
            a[(j, n + q)] = v;
            a[(n + q, j)] = v;
        }
    }
    a
}

fn tail_basis(kernel: &RadialKernel, dim: usize) -> Vec<Vec<u32>> {
    match kernel.tail_degree() {
        Some(deg) => monomials::exponents(dim, deg),
        None => Vec::new(),
    }
}

fn check_eps(kernel: &RadialKernel, eps: f64) -> Result<()> {
    if kernel.is_positive_definite() && !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("scale must be positive, got {eps}")));
    }
    Ok(())
}

/// Estimated 1-norm condition number of a symmetric matrix.
pub fn condition_estimate(matrix: &DMatrix<f64>) -> f64 {
    linalg::condition_estimate(matrix)
}

/// A factored kernel system at a fixed kernel, scale and site set.
///
/// One factorization serves coefficient solves for any number of data
/// vectors, Lagrange bases and power-function quadratic forms.
#[derive(Debug, Clone)]
pub struct KernelSystem {
    kernel: RadialKernel,
    eps: f64,
    sites: Arc<PointSet>,
    tail: Vec<Vec<u32>>,
    matrix: DMatrix<f64>,
    /// Tail columns and rows are multiplied by this before factoring.
    tail_scale: f64,
    factor: Factor,
    cond_estimate: f64,
}

impl KernelSystem {
    pub fn factor(
        kernel: &RadialKernel,
        eps: f64,
        sites: impl Into<Arc<PointSet>>,
        gate: &ConditionGate,
    ) -> Result<Outcome<KernelSystem>> {
        check_eps(kernel, eps)?;
        let sites = sites.into();
        if sites.is_empty() {
            return Err(Error::Domain("empty site set".into()));
        }
        let tail = tail_basis(kernel, sites.dim());
        if sites.len() < tail.len() {
            return Err(Error::Domain(format!(
                "{} sites cannot determine a tail of {} monomials",
                sites.len(),
                tail.len()
            )));
        }
        if !tail.is_empty() && !unisolvent(&sites, &tail) {
            return Ok(Outcome::Skipped {
                status: Status::SkippedSingular,
                cond_estimate: f64::INFINITY,
            });
        }

        let matrix = assemble_with_tail(kernel, eps, &sites, &tail);
        let tail_scale = balance_scale(&matrix, sites.len());
        let balanced = balanced(&matrix, sites.len(), tail_scale);
        let factor = Factor::new(&balanced, kernel.is_positive_definite());
        let cond_estimate = linalg::condition_estimate_with(&balanced, &factor);
        if !gate.passes(cond_estimate) {
            let status = if cond_estimate.is_infinite() && !tail.is_empty() {
                Status::SkippedSingular
            } else {
                Status::SkippedCondition
            };
            return Ok(Outcome::Skipped { status, cond_estimate });
        }
        Ok(Outcome::Ok(KernelSystem {
            kernel: *kernel,
            eps,
            sites,
            tail,
            matrix,
            tail_scale,
            factor,
            cond_estimate,
        }))
    }

    pub fn kernel(&self) -> &RadialKernel {
        &self.kernel
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn sites(&self) -> &Arc<PointSet> {
        &self.sites
    }

    pub fn cond_estimate(&self) -> f64 {
        self.cond_estimate
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub(crate) fn factorization(&self) -> &Factor {
        &self.factor
    }

    pub fn tail_len(&self) -> usize {
        self.tail.len()
    }

    /// `b(x)_j = φ_ε(‖x − x_j‖)`.
    pub fn kernel_column(&self, x: &[f64]) -> DVector<f64> {
        let scale = self.kernel.effective_scale(self.eps);
        DVector::from_iterator(
            self.sites.len(),
            self.sites.iter().map(|xj| self.kernel.value(scale * distance(x, xj))),
        )
    }

    /// Kernel columns for many points, one column per point.
    pub fn kernel_columns<'a>(&self, points: impl IntoIterator<Item = &'a [f64]>) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = points.into_iter().map(|x| self.kernel_column(x)).collect();
        if cols.is_empty() {
            return DMatrix::zeros(self.sites.len(), 0);
        }
        DMatrix::from_columns(&cols)
    }

    pub fn solve(&self, values: &[f64]) -> Result<Interpolant> {
        let n = self.sites.len();
        if values.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite data value".into()));
        }
        let mut rhs = DVector::zeros(n + self.tail.len());
        rhs.rows_mut(0, n).copy_from_slice(values);
        let mut sol = self
            .factor
            .solve(&rhs)
            .ok_or_else(|| Error::Domain("factorization broke down".into()))?;
        sol.rows_mut(n, self.tail.len()).scale_mut(self.tail_scale);
        let coefficients: Vec<f64> = sol.rows(0, n).iter().copied().collect();
        let tail_coefficients: Vec<f64> = sol.rows(n, self.tail.len()).iter().copied().collect();

        let fitted = &self.matrix * &sol;
        let residual = (0..n).map(|j| (fitted[j] - values[j]).abs()).fold(0.0, f64::max);
        let side_residual = (n..n + self.tail.len()).map(|q| fitted[q].abs()).fold(0.0, f64::max);

        Ok(Interpolant {
            kernel: self.kernel,
            eps: self.eps,
            sites: Arc::clone(&self.sites),
            tail: self.tail.clone(),
            coefficients,
            tail_coefficients,
            values: values.to_vec(),
            cond_estimate: self.cond_estimate,
            residual,
            side_residual,
        })
    }

    /// Lagrange basis coefficients `β = A⁻¹`; positive definite kernels only.
    pub fn lagrange_basis(&self) -> Result<LagrangeBasis> {
        if !self.tail.is_empty() {
            return Err(Error::UnsupportedKernel(self.kernel.id.to_string()));
        }
        let n = self.sites.len();
        let inv = self
            .factor
            .solve_matrix(&DMatrix::identity(n, n))
            .ok_or_else(|| Error::Domain("factorization broke down".into()))?;
        Ok(LagrangeBasis {
            kernel: self.kernel,
            eps: self.eps,
            sites: Arc::clone(&self.sites),
            coefficients: inv,
        })
    }
}

/// Power of two bringing the monomial block to the size of the kernel block,
/// so that the condition estimate reflects the problem rather than units.
fn balance_scale(matrix: &DMatrix<f64>, n: usize) -> f64 {
    let l = matrix.nrows() - n;
    if l == 0 {
        return 1.0;
    }
    let kernel_max = matrix.view((0, 0), (n, n)).amax();
    let tail_max = matrix.view((0, n), (n, l)).amax();
    if kernel_max > 0.0 && tail_max > 0.0 {
        (kernel_max / tail_max).log2().round().exp2()
    } else {
        1.0
    }
}

fn balanced(matrix: &DMatrix<f64>, n: usize, tail_scale: f64) -> DMatrix<f64> {
    let mut b = matrix.clone();
    let l = matrix.nrows() - n;
    if tail_scale != 1.0 {
        b.view_mut((0, n), (n, l)).scale_mut(tail_scale);
        b.view_mut((n, 0), (l, n)).scale_mut(tail_scale);
    }
    b
}

fn unisolvent(sites: &PointSet, tail: &[Vec<u32>]) -> bool {
    let p = DMatrix::from_fn(sites.len(), tail.len(), |j, q| monomials::eval(&tail[q], sites.point(j)));
    let sv = p.singular_values();
    let max = sv.max();
    max > 0.0 && sv.iter().filter(|&&s| s > UNISOLVENCY_TOL * max).count() == tail.len()
}

/// Gated solve of the interpolation problem `s(x_j) = y_j`.
pub fn solve(
    kernel: &RadialKernel,
    eps: f64,
    sites: impl Into<Arc<PointSet>>,
    values: &[f64],
    gate: &ConditionGate,
) -> Result<Outcome<Interpolant>> {
    match KernelSystem::factor(kernel, eps, sites, gate)? {
        Outcome::Ok(sys) => Ok(Outcome::Ok(sys.solve(values)?)),
        Outcome::Skipped { status, cond_estimate } => Ok(Outcome::Skipped { status, cond_estimate }),
    }
}

/// Gated Lagrange basis for a positive definite kernel.
pub fn lagrange_basis(
    kernel: &RadialKernel,
    eps: f64,
    sites: impl Into<Arc<PointSet>>,
    gate: &ConditionGate,
) -> Result<Outcome<LagrangeBasis>> {
    match KernelSystem::factor(kernel, eps, sites, gate)? {
        Outcome::Ok(sys) => Ok(Outcome::Ok(sys.lagrange_basis()?)),
        Outcome::Skipped { status, cond_estimate } => Ok(Outcome::Skipped { status, cond_estimate }),
    }
}

/// A solved interpolant `s(x) = Σ α_j φ_ε(‖x − x_j‖) + Σ γ_q x^q`.
#[derive(Debug, Clone)]
pub struct Interpolant {
    pub kernel: RadialKernel,
    pub eps: f64,
    pub sites: Arc<PointSet>,
    /// Tail monomial exponents, empty for positive definite kernels.
    pub tail: Vec<Vec<u32>>,
    /// Kernel coefficients (α, or λ for CPD kernels).
    pub coefficients: Vec<f64>,
    pub tail_coefficients: Vec<f64>,
    pub values: Vec<f64>,
    pub cond_estimate: f64,
    /// `max_j |s(x_j) − y_j|` at solve time.
    pub residual: f64,
    /// `max_q |Σ_j λ_j q(x_j)|`, zero without a tail.
    pub side_residual: f64,
}

impl Interpolant {
    pub fn value_at(&self, x: &[f64]) -> f64 {
        let scale = self.kernel.effective_scale(self.eps);
        let kernel_part: f64 = self
            .sites
            .iter()
            .zip(&self.coefficients)
            .map(|(xj, a)| a * self.kernel.value(scale * distance(x, xj)))
            .sum();
        let tail_part: f64 = self
            .tail
            .iter()
            .zip(&self.tail_coefficients)
            .map(|(e, g)| g * monomials::eval(e, x))
            .sum();
        kernel_part + tail_part
    }

    pub fn evaluate<'a>(&self, points: impl IntoIterator<Item = &'a [f64]>) -> Vec<f64> {
        points.into_iter().map(|x| self.value_at(x)).collect()
    }

    pub fn is_conditionally_positive_definite(&self) -> bool {
        !self.tail.is_empty()
    }
}

/// Cardinal functions `u_j(x) = Σ_k β_jk φ_ε(‖x − x_k‖)` with `u_j(x_i) = δ_ji`.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    pub kernel: RadialKernel,
    pub eps: f64,
    pub sites: Arc<PointSet>,
    /// Row `j` holds the coefficients of `u_j`.
    pub coefficients: DMatrix<f64>,
}

impl LagrangeBasis {
    /// `(u_1(x), …, u_n(x))`.
    pub fn values_at(&self, x: &[f64]) -> Vec<f64> {
        let scale = self.kernel.effective_scale(self.eps);
        let b = DVector::from_iterator(
            self.sites.len(),
            self.sites.iter().map(|xj| self.kernel.value(scale * distance(x, xj))),
        );
        (&self.coefficients * b).iter().copied().collect()
    }

    pub fn value(&self, j: usize, x: &[f64]) -> f64 {
        self.values_at(x)[j]
    }

    /// `Σ_j y_j u_j(x)`.
    pub fn interpolate_at(&self, values: &[f64], x: &[f64]) -> f64 {
        self.values_at(x).iter().zip(values).map(|(u, y)| u * y).sum()
    }
}
