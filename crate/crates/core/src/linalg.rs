//! Dense factorizations and 1-norm condition estimation.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

/// A factorization reused for every solve against one kernel matrix.
#[derive(Debug, Clone)]
pub enum Factor {
    Cholesky(Cholesky<f64, Dyn>),
    Lu(LU<f64, Dyn, Dyn>),
}

impl Factor {
    /// Cholesky when `positive_definite` and it succeeds, LU otherwise.
    pub fn new(matrix: &DMatrix<f64>, positive_definite: bool) -> Self {
        if positive_definite {
            if let Some(ch) = Cholesky::new(matrix.clone()) {
                return Factor::Cholesky(ch);
            }
        }
        Factor::Lu(LU::new(matrix.clone()))
    }

    pub fn is_cholesky(&self) -> bool {
        matches!(self, Factor::Cholesky(_))
    }

    /// `A⁻¹ b`, `None` if the factorization is singular or the solution is
    /// not finite.
    pub fn solve(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        let x = match self {
            Factor::Cholesky(ch) => ch.solve(b),
            Factor::Lu(lu) => lu.solve(b)?,
        };
        x.iter().all(|v| v.is_finite()).then_some(x)
    }

    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
        let x = match self {
            Factor::Cholesky(ch) => ch.solve(b),
            Factor::Lu(lu) => lu.solve(b)?,
        };
        x.iter().all(|v| v.is_finite()).then_some(x)
    }

    /// Column-wise `bᵀ A⁻¹ b` for each column `b` of `rhs`.
    pub fn quadratic_forms(&self, rhs: &DMatrix<f64>) -> Option<Vec<f64>> {
        match self {
            Factor::Cholesky(ch) => {
                let w = ch.l_dirty().solve_lower_triangular(rhs)?;
                Some(w.column_iter().map(|c| c.norm_squared()).collect())
            }
            Factor::Lu(lu) => {
                let x = lu.solve(rhs)?;
                Some(rhs.column_iter().zip(x.column_iter()).map(|(b, x)| b.dot(&x)).collect())
            }
        }
    }

    fn dim(&self) -> usize {
        match self {
            Factor::Cholesky(ch) => ch.l_dirty().nrows(),
            Factor::Lu(lu) => lu.l().nrows(),
        }
    }
}

pub fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Hager–Higham estimate of `‖A⁻¹‖₁` for a symmetric `A` given its factor.
///
/// Returns `+∞` when a solve breaks down.
pub fn inverse_norm1_estimate(factor: &Factor) -> f64 {
    let n = factor.dim();
    if n == 0 {
        return 0.0;
    }
    let solve = |v: &DVector<f64>| factor.solve(v);
    let sign = |v: &DVector<f64>| v.map(|x| if x >= 0.0 { 1.0 } else { -1.0 });

    let x = DVector::from_element(n, 1.0 / n as f64);
    let Some(y) = solve(&x) else { return f64::INFINITY };
    let mut est = y.lp_norm(1);
    if n == 1 {
        return est;
    }
    let mut xi = sign(&y);
    let Some(mut z) = solve(&xi) else { return f64::INFINITY };

    for _ in 0..5 {
        let j = z.iamax();
        let mut e = DVector::zeros(n);
        e[j] = 1.0;
        let Some(y_new) = solve(&e) else { return f64::INFINITY };
        let est_new = y_new.lp_norm(1);
        let xi_new = sign(&y_new);
        if est_new <= est || xi_new == xi {
            est = est.max(est_new);
            break;
        }
        est = est_new;
        xi = xi_new;
        let Some(z_new) = solve(&xi) else { return f64::INFINITY };
        if z_new.iamax() == j {
            break;
        }
        z = z_new;
    }

    // Alternating test vector guards against pathological cancellations.
    let alt = DVector::from_fn(n, |i, _| {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        s * (1.0 + i as f64 / (n - 1) as f64)
    });
    if let Some(w) = solve(&alt) {
        est = est.max(2.0 * w.lp_norm(1) / (3.0 * n as f64));
    }
    if est.is_finite() {
        est
    } else {
        f64::INFINITY
    }
}

/// Estimated `κ₁(A) = ‖A‖₁ ‖A⁻¹‖₁` for a symmetric matrix, `+∞` if singular.
pub fn condition_estimate(matrix: &DMatrix<f64>) -> f64 {
    let factor = Factor::new(matrix, false);
    condition_estimate_with(matrix, &factor)
}

pub fn condition_estimate_with(matrix: &DMatrix<f64>, factor: &Factor) -> f64 {
    let est = norm1(matrix) * inverse_norm1_estimate(factor);
    if est.is_nan() {
        f64::INFINITY
    } else {
        est.max(1.0)
    }
}

/// Exact `κ₁` via an explicit inverse; for tests and small systems.
pub fn exact_condition_1(matrix: &DMatrix<f64>) -> f64 {
    match matrix.clone().try_inverse() {
        Some(inv) if inv.iter().all(|v| v.is_finite()) => norm1(matrix) * norm1(&inv),
        _ => f64::INFINITY,
    }
}
