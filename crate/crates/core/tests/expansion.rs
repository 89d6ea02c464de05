use std::sync::Arc;

use kscale_core::expansion::{
    extremal_points, fit_expansion, sign_criterion, theorem61_demo, DemoOutcome, ExpansionSettings, Verdict, SIGNIFICANCE,
};
use kscale_core::sweep::scale_grid;
use kscale_core::verify::lagrange_polynomial;
use kscale_core::{ConditionGate, Error, KernelId, PointSet, RadialKernel};

fn unit(id: KernelId) -> RadialKernel {
    RadialKernel::new(id).with_pre_scale(1.0)
}

fn equispaced(n: usize) -> Vec<f64> {
    (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect()
}

const PROBES: [f64; 7] = [-0.95, -0.7, -0.35, 0.1, 0.4, 0.65, 0.9];

fn window(eps_min: f64, eps_max: f64, samples: usize, terms: usize) -> ExpansionSettings {
    ExpansionSettings { eps_min, eps_max, samples, terms, ..ExpansionSettings::default() }
}

fn settings_for(id: KernelId, n: usize) -> ExpansionSettings {
    match (id, n) {
        (KernelId::Gaussian, 7) => window(0.1, 0.5, 16, 4),
        (KernelId::InverseMultiquadric, 3) => window(0.02, 0.2, 12, 3),
        (KernelId::InverseMultiquadric, 5) => window(0.08, 0.4, 12, 5),
        (KernelId::InverseMultiquadric, 7) => window(0.1, 0.4, 16, 6),
        _ => ExpansionSettings::default(),
    }
}

#[test]
fn constant_term_is_the_lagrange_interpolant() {
    for id in [KernelId::Gaussian, KernelId::InverseMultiquadric] {
        for n in [3, 5, 7] {
            let xs = equispaced(n);
            let ys: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
            let fit = fit_expansion(
                &unit(id),
                PointSet::from_1d(&xs).unwrap(),
                &ys,
                &PointSet::from_1d(&PROBES).unwrap(),
                &settings_for(id, n),
            )
            .unwrap();
            for (i, &x) in PROBES.iter().enumerate() {
                let err = (fit.coefficients[i][0] - lagrange_polynomial(&xs, &ys, x)).abs();
                assert!(err <= 1e-5, "{id} n={n} x={x}: {err:e}");
            }
            assert!(fit.relative_residual() <= 1e-6, "{id} n={n}: {:e}", fit.relative_residual());

            let tol = fit.tolerances();
            for x in fit.sites.iter() {
                let c = fit.coefficients_at(x);
                for t in 1..c.len() {
                    assert!(c[t].abs() <= SIGNIFICANCE * tol[t], "{id} n={n} power {}: {:e}", fit.powers[t], c[t]);
                }
            }
        }
    }
}

#[test]
fn odd_powers_are_absent() {
    let xs = equispaced(5);
    let ys: Vec<f64> = xs.iter().map(|x| (1.0 + x).exp()).collect();
    let settings = ExpansionSettings { odd_powers: true, ..ExpansionSettings::default() };
    let fit = fit_expansion(&unit(KernelId::Gaussian), PointSet::from_1d(&xs).unwrap(), &ys, &PointSet::from_1d(&PROBES).unwrap(), &settings)
        .unwrap();
    assert_eq!(fit.powers, vec![0, 1, 2, 3, 4, 6]);
    let tol = fit.tolerances();
    for (i, c) in fit.coefficients.iter().enumerate() {
        for t in [1, 3] {
            assert!(c[t].abs() <= SIGNIFICANCE * tol[t], "probe {i} power {}: {:e}", fit.powers[t], c[t]);
        }
    }
}

#[test]
fn coefficients_are_linear_in_the_data() {
    let xs = equispaced(5);
    let ys: Vec<f64> = xs.iter().map(|x| x.sin() + 0.3).collect();
    let twice: Vec<f64> = ys.iter().map(|y| 2.0 * y).collect();
    let sites = Arc::new(PointSet::from_1d(&xs).unwrap());
    let probes = PointSet::from_1d(&PROBES).unwrap();
    let s = ExpansionSettings::default();
    let a = fit_expansion(&unit(KernelId::Gaussian), Arc::clone(&sites), &ys, &probes, &s).unwrap();
    let b = fit_expansion(&unit(KernelId::Gaussian), sites, &twice, &probes, &s).unwrap();
    for (ca, cb) in a.coefficients.iter().zip(&b.coefficients) {
        for (u, v) in ca.iter().zip(cb) {
            assert!((v - 2.0 * u).abs() <= 1e-8 * v.abs().max(1e-300), "{u:e} {v:e}");
        }
    }
}

/// Kernel interpolants of linear data are not linear at positive scale, so
/// only the flat limit reproduces the data; higher terms vanish on the sites.
#[test]
fn linear_data_flat_limit() {
    let xs = [-1.0, 0.0, 1.0];
    let ys: Vec<f64> = xs.iter().map(|x| 0.5 - 2.0 * x).collect();
    let fit = fit_expansion(&unit(KernelId::Gaussian), PointSet::from_1d(&xs).unwrap(), &ys, &PointSet::from_1d(&PROBES).unwrap(), &ExpansionSettings::default())
        .unwrap();
    for (i, &x) in PROBES.iter().enumerate() {
        assert!((fit.coefficients[i][0] - (0.5 - 2.0 * x)).abs() <= 1e-6, "x={x}");
    }
    let tol = fit.tolerances();
    for x in xs {
        let c = fit.coefficients_at(&[x]);
        assert!((1..c.len()).all(|t| c[t].abs() <= SIGNIFICANCE * tol[t]), "{c:?}");
    }
    assert!(fit.coefficients_at(&[0.5])[1].abs() > 1e3 * tol[1]);
}

#[test]
fn exact_truth_gives_flat_limit_exact() {
    let xs = equispaced(5);
    let ys: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
    let fit = fit_expansion(&unit(KernelId::Gaussian), PointSet::from_1d(&xs).unwrap(), &ys, &PointSet::from_1d(&PROBES).unwrap(), &ExpansionSettings::default())
        .unwrap();
    let verdict = sign_criterion(&fit, |x| fit.p0_at(&[x]), 0.1).unwrap();
    assert_eq!(verdict.verdict, Verdict::FlatLimitExact);
}

#[test]
fn extremal_points_include_symmetric_ties() {
    let pts = extremal_points(|x| x * (x * x - 1.0) * (1.0 + 1e-9 * x), -1.0, 1.0);
    let expected = 1.0 / 3f64.sqrt();
    assert_eq!(pts.len(), 2, "{pts:?}");
    assert!(pts.iter().all(|p| (p.abs() - expected).abs() < 1e-6));
}

#[test]
fn three_point_demo_has_opposite_verdicts() {
    let settings = ExpansionSettings::default();
    let scan = scale_grid(settings.eps_min, settings.eps_max, 30, true).unwrap();
    let report = theorem61_demo(&unit(KernelId::Gaussian), PointSet::from_1d(&[-1.0, 0.0, 1.0]).unwrap(), &[1.0, 0.0, 1.0], &settings, &scan)
        .unwrap();
    assert!(report.opposite_verdicts(), "{}", report.to_text());
    let DemoOutcome::Extensions { k_min, plus, minus } = &report.outcome else {
        panic!("{}", report.to_text());
    };
    assert_eq!(*k_min, 1);
    assert_eq!(plus.criterion.verdict, Verdict::Improvable);
    assert_eq!(minus.criterion.verdict, Verdict::NotImprovable);
    assert!(plus.criterion.checks.iter().all(|c| (c.x.abs() - 0.5f64.sqrt()).abs() < 1e-4));
    assert!(report.to_text().contains("opposite verdicts: true"));
}

#[test]
fn zero_data_is_flat_limit_exact() {
    let settings = ExpansionSettings::default();
    let report = theorem61_demo(&unit(KernelId::Gaussian), PointSet::from_1d(&[-1.0, 0.0, 1.0]).unwrap(), &[0.0; 3], &settings, &[0.1, 0.2])
        .unwrap();
    assert!(matches!(report.outcome, DemoOutcome::FlatLimitExact));
    assert!(report.fit.coefficients.iter().flatten().all(|c| *c == 0.0));
}

#[test]
fn constant_only_fit() {
    let settings = ExpansionSettings { terms: 0, ..ExpansionSettings::default() };
    let report = theorem61_demo(&unit(KernelId::Gaussian), PointSet::from_1d(&[-1.0, 0.0, 1.0]).unwrap(), &[1.0, 0.0, 1.0], &settings, &[0.1])
        .unwrap();
    assert_eq!(report.fit.powers, vec![0]);
    assert!(matches!(report.outcome, DemoOutcome::Inconclusive));
    assert!(report.to_text().contains("higher terms: unavailable"));
}

#[test]
fn too_few_samples_survive_the_gate() {
    let settings = ExpansionSettings {
        eps_min: 1e-3,
        eps_max: 5e-3,
        gate: ConditionGate::new(1e8),
        ..ExpansionSettings::default()
    };
    let xs = equispaced(7);
    let r = fit_expansion(&unit(KernelId::Gaussian), PointSet::from_1d(&xs).unwrap(), &[1.0; 7], &PointSet::from_1d(&PROBES).unwrap(), &settings);
    assert!(matches!(r, Err(Error::InsufficientSamples { needed: 8, .. })), "{r:?}");
}

#[test]
fn finite_smoothness_kernels_are_rejected() {
    let r = fit_expansion(
        &RadialKernel::new(KernelId::Matern3),
        PointSet::from_1d(&[0.0, 1.0]).unwrap(),
        &[0.0, 1.0],
        &PointSet::from_1d(&[0.5]).unwrap(),
        &ExpansionSettings::default(),
    );
    assert!(matches!(r, Err(Error::UnsupportedKernel(_))));
}
