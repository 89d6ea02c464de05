use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use kscale_core::expansion::{theorem61_demo, DemoReport, ExpansionSettings};
use kscale_core::sweep::{run_sweep, scale_grid, top_decade_slope, write_csv};
use kscale_core::verify::{run_suites, VerifyContext, SUITES};
use kscale_core::{ConditionGate, KernelId, PointSet, RadialKernel, Status, SweepConfig, SweepRecord};
use log::{info, warn};

use crate::config::{ExpandConfig, Output, RunConfig};
use crate::error::{CliError, Result};

/// Top-decade slope expected of the ms3 bound proxy.
const MS3_SLOPE: f64 = 6.0;

fn metadata(pairs: Vec<(&'static str, String)>) -> Vec<(String, String)> {
    let mut m = vec![("command".to_string(), RunConfig::COMMAND.to_string())];
    m.extend(pairs.into_iter().map(|(k, v)| (k.to_string(), v)));
    m
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>) -> Result<()> {
    let file = fs::File::create(path).map_err(CliError::io(path))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(CliError::io(path))
}

/// Runs the sweep and writes its CSVs; returns the files written.
pub fn sweep(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut sc = SweepConfig::new(cfg.grid);
    sc.kernels = cfg.kernels.iter().map(|&k| RadialKernel::new(k)).collect();
    sc.functions = cfg.functions.clone();
    sc.eps = cfg.eps.values()?;
    sc.gate = ConditionGate::new(cfg.cond_limit);
    sc.validate()?;
    let records = run_sweep(&sc)?;
    summarize(cfg, &records);

    let mut written = Vec::new();
    match &cfg.out {
        Output::Stdout => {
            let stdout = io::stdout();
            write_csv(stdout.lock(), &metadata(cfg.metadata()), &records).map_err(CliError::io("<stdout>"))?;
        }
        Output::File(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(CliError::io(parent))?;
            }
            write_file(path, |w| write_csv(w, &metadata(cfg.metadata()), &records))?;
            written.push(path.clone());
        }
        Output::Dir(dir) => {
            fs::create_dir_all(dir).map_err(CliError::io(dir))?;
            for &f in &cfg.functions {
                let one = RunConfig { functions: vec![f], ..cfg.clone() };
                let rows: Vec<SweepRecord> = records.iter().filter(|r| r.function == f.as_str()).cloned().collect();
                let path = dir.join(format!("sweep_{f}_{}.csv", cfg.grid));
                write_file(&path, |w| write_csv(w, &metadata(one.metadata()), &rows))?;
                written.push(path);
            }
        }
    }
    for p in &written {
        info!("wrote {}", p.display());
    }
    Ok(written)
}

fn summarize(cfg: &RunConfig, records: &[SweepRecord]) {
    let count = |s: Status| records.iter().filter(|r| r.status == s).count();
    info!(
        "{} rows: {} ok, {} skipped by the gate, {} singular, {} baseline",
        records.len(),
        count(Status::Ok),
        count(Status::SkippedCondition),
        count(Status::SkippedSingular),
        count(Status::Baseline)
    );
    if !cfg.kernels.contains(&KernelId::Matern3) {
        return;
    }
    for f in &cfg.functions {
        let rows: Vec<SweepRecord> = records
            .iter()
            .filter(|r| r.kernel == KernelId::Matern3.as_str() && r.function == f.as_str())
            .cloned()
            .collect();
        match top_decade_slope(&rows, |r| r.bound_product) {
            Some(s) if (s - MS3_SLOPE).abs() > 1.0 => {
                warn!("ms3 {f}: top-decade slope of the bound proxy is {s:.2}, expected about {MS3_SLOPE}")
            }
            Some(s) => info!("ms3 {f}: top-decade slope of the bound proxy is {s:.2}"),
            None => warn!("ms3 {f}: too few ok rows in the top decade for a slope"),
        }
    }
}

/// Prints one line per check; fails when any check fails.
pub fn verify(suite: Option<&str>, mut out: impl Write) -> Result<()> {
    let checks = run_suites(suite, &VerifyContext::default())?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    let io_err = CliError::io("<stdout>");
    let printed = checks
        .iter()
        .try_for_each(|c| writeln!(out, "{c}"))
        .and_then(|_| writeln!(out, "verify: {} passed, {failed} failed", checks.len() - failed));
    printed.map_err(io_err)?;
    if failed > 0 {
        return Err(CliError::Verification { failed, total: checks.len() });
    }
    Ok(())
}

pub fn list_suites(mut out: impl Write) -> Result<()> {
    SUITES
        .iter()
        .try_for_each(|s| writeln!(out, "{:<24} {}", s.name, s.description))
        .map_err(CliError::io("<stdout>"))
}

/// Fits the expansion, runs the extension demo and writes the CSV and report.
pub fn expand(cfg: &ExpandConfig) -> Result<DemoReport> {
    let kernel = RadialKernel::new(cfg.kernel).with_pre_scale(cfg.pre_scale);
    let settings = ExpansionSettings {
        eps_min: cfg.eps.min,
        eps_max: cfg.eps.max,
        samples: cfg.eps.count,
        terms: cfg.terms,
        odd_powers: cfg.odd_powers,
        gate: ConditionGate::new(cfg.cond_limit),
    };
    let scan = scale_grid(cfg.eps.min, cfg.eps.max, cfg.scan_count, true)?;
    let report = theorem61_demo(&kernel, PointSet::from_1d(&cfg.sites)?, &cfg.values, &settings, &scan)?;

    if cfg.out != "-" {
        let dir = Path::new(&cfg.out);
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        let echo: String = std::iter::once(("command", ExpandConfig::COMMAND.to_string()))
            .chain(cfg.pairs().into_iter().filter(|(k, _)| *k != "out"))
            .map(|(k, v)| format!("# {k}={v}\n"))
            .collect();
        write_file(&dir.join("expansion.csv"), |w| {
            w.write_all(echo.as_bytes())?;
            w.write_all(report.fit.to_csv().as_bytes())
        })?;
        write_file(&dir.join("expansion.txt"), |w| w.write_all(report.to_text().as_bytes()))?;
        info!("wrote {}/expansion.{{csv,txt}}", dir.display());
    }
    Ok(report)
}
