use std::sync::Arc;

use kscale_core::interpolation::{lagrange_basis, solve};
use kscale_core::norms::{quadrature_norm, sobolev_norm_formula};
use kscale_core::sweep::{format_float, SweepRecord};
use kscale_core::{ConditionGate, KernelId, KernelSpectrum, KernelSystem, PointSet, RadialKernel, SpectralFunction, Status};
use proptest::prelude::*;

fn kernel_id() -> impl Strategy<Value = KernelId> {
    prop::sample::select(KernelId::ALL.to_vec())
}

fn pd_kernel_id() -> impl Strategy<Value = KernelId> {
    prop::sample::select(vec![KernelId::Gaussian, KernelId::InverseMultiquadric, KernelId::Matern3, KernelId::Wendland])
}

fn point() -> impl Strategy<Value = [f64; 2]> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| [a, b])
}

fn grid5() -> Arc<PointSet> {
    Arc::new(PointSet::regular_grid(5).unwrap())
}

/// Unit pre-scale, with a scale range that keeps grid(5) well conditioned.
fn unit_kernel(id: KernelId) -> RadialKernel {
    RadialKernel::new(id).with_pre_scale(1.0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaled_evaluation_is_pre_scaled_argument(id in kernel_id(), eps in 0.01..10.0f64, r in 0.0..3.0f64) {
        let k = RadialKernel::new(id);
        let direct = if k.is_polyharmonic() { k.eval(k.pre_scale * r) } else { k.eval(k.pre_scale * eps * r) };
        prop_assert_eq!(k.eval_scaled(eps, r).unwrap(), direct.unwrap());
    }

    #[test]
    fn wendland_vanishes_outside_unit_ball(r in 1.0..1e3f64) {
        prop_assert_eq!(RadialKernel::new(KernelId::Wendland).eval(r).unwrap(), 0.0);
    }

    #[test]
    fn power_scaling_law(id in prop::sample::select(vec![KernelId::Gaussian, KernelId::Matern3]), eps in 0.5..2.0f64, x in point()) {
        let k = unit_kernel(id);
        let gate = ConditionGate::default();
        let sites = grid5();
        let scaled_sites = Arc::new(sites.scaled(eps).unwrap());
        let a = KernelSystem::factor(&k, eps, sites, &gate).unwrap().expect_ok("grid(5)");
        let b = KernelSystem::factor(&k, 1.0, scaled_sites, &gate).unwrap().expect_ok("scaled grid(5)");
        let pa = a.power_values([&x[..]]).unwrap().sup;
        let pb = b.power_values([&[eps * x[0], eps * x[1]][..]]).unwrap().sup;
        prop_assert!((pa - pb).abs() <= 1e-8, "{} vs {}", pa, pb);
    }

    #[test]
    fn power_is_bounded_by_kernel_at_zero(id in pd_kernel_id(), eps in 0.3..3.0f64, x in point()) {
        let k = RadialKernel::new(id);
        let sys = KernelSystem::factor(&k, eps, grid5(), &ConditionGate::default()).unwrap().expect_ok("grid(5)");
        let p = sys.power_values([&x[..]]).unwrap().sup;
        prop_assert!(p >= 0.0 && p <= k.value_at_zero().sqrt() + 1e-12);
    }

    #[test]
    fn lagrange_scaling_invariance(eps in 0.5..2.0f64, x in point(), j in 0usize..25) {
        let k = unit_kernel(KernelId::Matern3);
        let gate = ConditionGate::default();
        let sites = grid5();
        let scaled = Arc::new(sites.scaled(eps).unwrap());
        let a = lagrange_basis(&k, eps, sites, &gate).unwrap().expect_ok("grid(5)");
        let b = lagrange_basis(&k, 1.0, scaled, &gate).unwrap().expect_ok("scaled grid(5)");
        let ua = a.value(j, &x);
        let ub = b.value(j, &[eps * x[0], eps * x[1]]);
        prop_assert!((ua - ub).abs() <= 1e-8);
    }

    #[test]
    fn similarity_invariance(id in prop::sample::select(vec![KernelId::Gaussian, KernelId::Matern3, KernelId::Wendland]), eps in 0.5..2.0f64, x in point()) {
        let k = unit_kernel(id);
        let eps = if id == KernelId::Gaussian { 2.0 * eps } else { eps };
        let f = |p: &[f64]| (p[0] - 0.3 * p[1]).sin() + p[1] * p[1];
        let gate = ConditionGate::default();
        let sites = grid5();
        let scaled = Arc::new(sites.scaled(eps).unwrap());
        let fe: Vec<f64> = sites.iter().map(|p| f(&[eps * p[0], eps * p[1]])).collect();
        let s1 = solve(&k, eps, Arc::clone(&sites), &fe, &gate).unwrap().expect_ok("grid(5)");
        let s2 = solve(&k, 1.0, scaled, &fe, &gate).unwrap().expect_ok("scaled grid(5)");
        prop_assert!((s1.value_at(&x) - s2.value_at(&[eps * x[0], eps * x[1]])).abs() <= 1e-8);
    }

    #[test]
    fn solve_is_linear_and_interpolates(id in kernel_id(), ys in prop::collection::vec(-5.0..5.0f64, 25), c in -3.0..3.0f64) {
        let k = RadialKernel::new(id);
        let gate = ConditionGate::default();
        let sites = grid5();
        let scaled: Vec<f64> = ys.iter().map(|y| c * y).collect();
        let a = solve(&k, 1.0, Arc::clone(&sites), &ys, &gate).unwrap().expect_ok("grid(5)");
        let b = solve(&k, 1.0, Arc::clone(&sites), &scaled, &gate).unwrap().expect_ok("grid(5)");
        let ymax = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        prop_assert!(a.residual <= 1e-8 * (1.0 + ymax));
        prop_assert!(a.side_residual <= 1e-8 * (1.0 + ymax));
        let x = [0.13, -0.71];
        prop_assert!((b.value_at(&x) - c * a.value_at(&x)).abs() <= 1e-9 * (1.0 + ymax));
    }

    #[test]
    fn polyharmonic_rescaling_is_absorbed(id in prop::sample::select(vec![KernelId::Polyharmonic3, KernelId::Polyharmonic4]), c in 0.5..7.0f64, ys in prop::collection::vec(-1.0..1.0f64, 25)) {
        let gate = ConditionGate::default();
        let sites = grid5();
        let base = solve(&RadialKernel::new(id), 1.0, Arc::clone(&sites), &ys, &gate).unwrap().expect_ok("grid(5)");
        let scaled = solve(&RadialKernel::new(id).with_pre_scale(c), 1.0, Arc::clone(&sites), &ys, &gate).unwrap().expect_ok("grid(5)");
        let mids = PointSet::midpoint_grid(5).unwrap();
        let (va, vb) = (base.evaluate(mids.iter()), scaled.evaluate(mids.iter()));
        let scale = va.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let dev = va.iter().zip(&vb).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(dev <= 1e-9 * scale, "{:e}", dev / scale);
    }

    #[test]
    fn norm_scaling_law(a in 0.3..3.0f64, eps in 0.5..2.0f64, matern in any::<bool>()) {
        let spectrum = if matern { KernelSpectrum::matern(3, 2) } else { KernelSpectrum::gaussian(2) };
        let f = SpectralFunction::gaussian_bump(a, 2);
        // the Gaussian pair is finite only while the kernel is wider in spectrum
        prop_assume!(matern || (eps * eps > a / 2.0 && 1.0 > a / 2.0));
        let base = quadrature_norm(&f, &spectrum, 1.0).unwrap();
        let scaled = quadrature_norm(&f.scaled(eps), &spectrum, eps).unwrap();
        prop_assert!(rel(scaled, base) <= 1e-6, "{} vs {}", scaled, base);
    }

    #[test]
    fn sobolev_formula_matches_quadrature(a in 0.3..3.0f64, eps in 0.25..4.0f64, m in 2u32..=3, dim in 1usize..=2) {
        let f = SpectralFunction::gaussian_bump(a, dim);
        let formula = sobolev_norm_formula(&f, m, eps).unwrap();
        let quad = quadrature_norm(&f, &KernelSpectrum::matern(m, dim), eps).unwrap();
        prop_assert!(rel(formula, quad) <= 1e-6);
    }

    #[test]
    fn floats_round_trip_through_csv(v in prop::num::f64::POSITIVE | prop::num::f64::NEGATIVE | prop::num::f64::ZERO) {
        let text = format_float(v);
        prop_assert_eq!(text.parse::<f64>().unwrap(), v);
        let rec = SweepRecord {
            experiment_id: "linf_121".into(),
            kernel: "g".into(),
            function: "linf".into(),
            n_sites: 121,
            epsilon: v.abs(),
            linf_error: Some(v.abs()),
            native_norm: None,
            power_sup: Some(v.abs()),
            bound_product: None,
            cond_estimate: Some(1e14),
            status: Status::Ok,
        };
        prop_assert_eq!(SweepRecord::from_csv_row(&rec.to_csv_row()).unwrap(), rec);
    }
}
