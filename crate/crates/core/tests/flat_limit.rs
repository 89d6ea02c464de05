use std::sync::Arc;

use kscale_core::flat_limit::{default_max_degree, fit_polynomial, polyharmonic_baseline, DEFAULT_PINV_CUTOFF};
use kscale_core::interpolation::solve;
use kscale_core::{monomials, ConditionGate, KernelId, PointSet, RadialKernel, TestFunction};
use nalgebra::{DMatrix, DVector};

fn setup(grid: usize) -> (Arc<PointSet>, PointSet) {
    (Arc::new(PointSet::regular_grid(grid).unwrap()), PointSet::midpoint_grid(grid).unwrap())
}

/// Regularized normal equations, then two steps of refinement on the
/// least-squares residual.
fn normal_equations(v: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let mut g = v.transpose() * v;
    let shift = 1e-12 * g.diagonal().max();
    for i in 0..g.nrows() {
        g[(i, i)] += shift;
    }
    let chol = g.cholesky().expect("shifted Gram matrix is positive definite");
    let mut c = chol.solve(&(v.transpose() * y));
    for _ in 0..2 {
        let r = y - v * &c;
        c += chol.solve(&(v.transpose() * r));
    }
    c
}

#[test]
fn normal_equations_agree_with_pseudoinverse() {
    let (sites, grid) = setup(11);
    let f = TestFunction::RungeGood;
    let fit = fit_polynomial(
        &sites,
        &f.values_on(&sites),
        &grid,
        &f.values_on(&grid),
        default_max_degree(2, sites.len()),
        DEFAULT_PINV_CUTOFF,
    )
    .unwrap();

    let basis = monomials::exponents(2, fit.degree);
    let v = DMatrix::from_fn(sites.len(), basis.len(), |i, q| monomials::eval(&basis[q], sites.point(i)));
    let c = normal_equations(&v, &DVector::from_vec(f.values_on(&sites)));
    let other = grid
        .iter()
        .map(|x| {
            let p: f64 = basis.iter().zip(c.iter()).map(|(e, c)| c * monomials::eval(e, x)).sum();
            (p - f.eval(x)).abs()
        })
        .fold(0.0, f64::max);
    assert!((other - fit.error).abs() <= 5e-4 * fit.error, "{other:e} vs {:e}", fit.error);
}

#[test]
fn baseline_is_insensitive_to_the_cutoff() {
    for grid_k in [11, 21] {
        let (sites, grid) = setup(grid_k);
        let max_degree = default_max_degree(2, sites.len());
        for f in TestFunction::ALL {
            let (y, truth) = (f.values_on(&sites), f.values_on(&grid));
            let errors: Vec<f64> = [1e-10, DEFAULT_PINV_CUTOFF, 1e-13]
                .iter()
                .map(|&c| fit_polynomial(&sites, &y, &grid, &truth, max_degree, c).unwrap().error)
                .collect();
            let hi = errors.iter().copied().fold(0.0, f64::max);
            let lo = errors.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(hi <= 1.1 * lo, "{f} grid({grid_k}): {errors:?}");
        }
    }
}

#[test]
fn degree_selection_is_deterministic() {
    let (sites, grid) = setup(11);
    let f = TestFunction::RungeBad;
    let run = || fit_polynomial(&sites, &f.values_on(&sites), &grid, &f.values_on(&grid), 14, DEFAULT_PINV_CUTOFF).unwrap();
    assert_eq!(run(), run());
}

#[test]
fn polyharmonic_baselines_on_r3() {
    let (sites, grid) = setup(21);
    let f = TestFunction::R3;
    let gate = ConditionGate::default();
    for id in [KernelId::Polyharmonic3, KernelId::Polyharmonic4] {
        let b = polyharmonic_baseline(&RadialKernel::new(id), Arc::clone(&sites), &f.values_on(&sites), &grid, &f.values_on(&grid), &gate)
            .unwrap()
            .expect_ok("grid(21)");
        assert!(b.error.is_finite() && b.error > 0.0, "{id}: {:e}", b.error);
        assert!(b.error < 1e-2, "{id}: {:e}", b.error);
    }
}

#[test]
fn polyharmonic_ignores_the_user_scale() {
    let (sites, grid) = setup(11);
    let y = TestFunction::Linf.values_on(&sites);
    let gate = ConditionGate::default();
    for id in [KernelId::Polyharmonic3, KernelId::Polyharmonic4] {
        let k = RadialKernel::new(id);
        let a = solve(&k, 0.3, Arc::clone(&sites), &y, &gate).unwrap().expect_ok("grid(11)");
        let b = solve(&k, 7.0, Arc::clone(&sites), &y, &gate).unwrap().expect_ok("grid(11)");
        assert_eq!(a.evaluate(grid.iter()), b.evaluate(grid.iter()), "{id}");
    }
}
