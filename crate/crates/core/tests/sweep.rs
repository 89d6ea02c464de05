use std::sync::OnceLock;

use kscale_core::sweep::{read_csv, run_sweep, top_decade_slope, write_csv, POLYNOMIAL_LABEL};
use kscale_core::{KernelId, RadialKernel, Status, SweepConfig, SweepRecord, TestFunction};

fn finite_smoothness(grid: usize) -> SweepConfig {
    let mut c = SweepConfig::new(grid);
    c.kernels = vec![RadialKernel::new(KernelId::Matern3), RadialKernel::new(KernelId::Wendland)];
    c
}

fn sweep(grid: usize) -> &'static [SweepRecord] {
    static G11: OnceLock<Vec<SweepRecord>> = OnceLock::new();
    static G21: OnceLock<Vec<SweepRecord>> = OnceLock::new();
    let cell = if grid == 11 { &G11 } else { &G21 };
    cell.get_or_init(|| run_sweep(&finite_smoothness(grid)).unwrap())
}

fn rows<'a>(records: &'a [SweepRecord], kernel: &str, f: TestFunction) -> Vec<&'a SweepRecord> {
    records.iter().filter(|r| r.kernel == kernel && r.function == f.as_str()).collect()
}

fn baseline(records: &[SweepRecord], kernel: &str, f: TestFunction) -> f64 {
    rows(records, kernel, f)[0].linf_error.unwrap()
}

/// Errors of the ok rows, smallest scale first.
fn ok_errors(records: &[SweepRecord], kernel: &str, f: TestFunction) -> Vec<f64> {
    rows(records, kernel, f)
        .into_iter()
        .filter(|r| r.status == Status::Ok)
        .map(|r| r.linf_error.unwrap())
        .collect()
}

fn csv(records: &[SweepRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    write_csv(&mut out, &[("grid".into(), "11".into())], records).unwrap();
    out
}

#[test]
fn identical_configs_give_identical_csv() {
    let mut c = SweepConfig::new(11);
    c.kernels = vec![RadialKernel::new(KernelId::Gaussian), RadialKernel::new(KernelId::Matern3)];
    c.functions = vec![TestFunction::RungeBad, TestFunction::Linf];
    c.eps = vec![0.02, 0.1, 0.5, 2.0];
    let a = csv(&run_sweep(&c).unwrap());
    let b = csv(&run_sweep(&c).unwrap());
    assert_eq!(a, b);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c1 = csv(&single.install(|| run_sweep(&c).unwrap()));
    assert_eq!(a, c1);

    let (meta, parsed) = read_csv(std::str::from_utf8(&a).unwrap()).unwrap();
    assert_eq!(meta, vec![("grid".to_string(), "11".to_string())]);
    assert_eq!(csv(&parsed), a);
}

#[test]
fn rows_are_grouped_and_baselines_close_each_function() {
    let mut c = SweepConfig::new(11);
    c.kernels = vec![RadialKernel::new(KernelId::Gaussian), RadialKernel::new(KernelId::Wendland)];
    c.functions = vec![TestFunction::R3, TestFunction::RungeGood];
    c.eps = vec![0.5, 1.0, 2.0];
    let recs = run_sweep(&c).unwrap();
    assert_eq!(recs.len(), 2 * (2 * 3 + 3));
    let labels: Vec<(&str, &str)> = recs.iter().map(|r| (r.function.as_str(), r.kernel.as_str())).collect();
    assert_eq!(labels[0], ("r3", "g"));
    assert_eq!(labels[3], ("r3", "w3.5"));
    assert_eq!(&labels[6..9], &[("r3", POLYNOMIAL_LABEL), ("r3", "ph3"), ("r3", "ph4")]);
    assert_eq!(labels[9], ("runge_good", "g"));
    assert!(recs.iter().all(|r| r.experiment_id == format!("{}_121", r.function)));
    for r in recs.iter().filter(|r| r.status == Status::Ok) {
        assert_eq!(r.bound_product, Some(r.power_sup.unwrap() * r.native_norm.unwrap()));
    }
}

#[test]
fn more_sites_do_not_hurt_at_unit_scale() {
    let run = |grid| {
        let mut c = finite_smoothness(grid);
        c.eps = vec![1.0];
        c.baselines = false;
        run_sweep(&c).unwrap()
    };
    let (coarse, fine) = (run(11), run(21));
    for (a, b) in coarse.iter().zip(&fine) {
        assert_eq!((&a.kernel, &a.function), (&b.kernel, &b.function));
        assert!(b.linf_error.unwrap() <= a.linf_error.unwrap(), "{} {}", a.kernel, a.function);
    }
}

/// Matching flat limits: ph3 for ms3; w3.5 sits between ph3 and ph4.
fn matching_range(records: &[SweepRecord], kernel: &str, f: TestFunction) -> (f64, f64) {
    let ph3 = baseline(records, "ph3", f);
    let ph4 = baseline(records, "ph4", f);
    match kernel {
        "ms3" => (ph3, ph3),
        _ => (ph3.min(ph4), ph3.max(ph4)),
    }
}

fn distance_to_range(e: f64, (lo, hi): (f64, f64)) -> f64 {
    if e < lo {
        lo / e
    } else if e > hi {
        e / hi
    } else {
        1.0
    }
}

#[test]
fn curves_flatten_toward_polyharmonic_baselines() {
    for grid in [11, 21] {
        let recs = sweep(grid);
        for f in TestFunction::ALL {
            for k in ["ms3", "w3.5"] {
                let range = matching_range(recs, k, f);
                let errs = ok_errors(recs, k, f);
                assert!(distance_to_range(errs[0], range) < 5.0, "{k} {f} grid({grid})");
                for e in &errs[..3] {
                    assert!(distance_to_range(*e, range) < 10.0, "{k} {f} grid({grid}): {e:e} vs {range:?}");
                }
            }
        }
    }
}

#[test]
fn linf_flat_trend_matches_baseline() {
    let recs = sweep(21);
    let ph3 = baseline(recs, "ph3", TestFunction::Linf);
    for k in ["ms3", "w3.5"] {
        let e = ok_errors(recs, k, TestFunction::Linf)[0];
        assert!(e / ph3 < 3.0 && ph3 / e < 3.0, "{k}: {e:e} vs {ph3:e}");
    }
}

#[test]
fn bound_slope_is_reported() {
    for grid in [11, 21] {
        let owned: Vec<SweepRecord> = rows(sweep(grid), "ms3", TestFunction::RungeGood).into_iter().cloned().collect();
        let slope = top_decade_slope(&owned, |r| r.bound_product).unwrap();
        assert!(slope.is_finite() && slope > 0.0);
        if (slope - 6.0).abs() > 1.0 {
            eprintln!("ms3 grid({grid}): top-decade slope of the bound proxy is {slope:.2}, far from 6");
        }
    }
}

#[test]
fn skipped_rows_carry_only_the_estimate() {
    let recs = sweep(11);
    let skipped: Vec<&SweepRecord> = recs.iter().filter(|r| r.status == Status::SkippedCondition).collect();
    assert!(!skipped.is_empty());
    for r in skipped {
        assert!(r.linf_error.is_none() && r.native_norm.is_none() && r.power_sup.is_none() && r.bound_product.is_none());
        assert!(r.cond_estimate.unwrap() > 1e14);
    }
}
