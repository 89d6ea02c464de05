//! The scale sweep: for every kernel, test function and scale, record the
//! midpoint error, native norm, power-function sup and condition estimate,
//! followed by the scale-free baselines.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flat_limit::{self, PolyharmonicBaseline};
use crate::interpolation::{ConditionGate, KernelSystem, Outcome, Status};
use crate::kernel::{KernelId, RadialKernel};
use crate::norms::native_norm_of_interpolant;
use crate::points::PointSet;

pub const CSV_HEADER: &str =
    "experiment_id,kernel,function,n_sites,epsilon,linf_error,native_norm,power_sup,bound_product,cond_estimate,status";

/// Kernel label of the least-squares polynomial baseline rows.
pub const POLYNOMIAL_LABEL: &str = "p";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestFunction {
    /// `1 / (1 + ‖x‖²/16)`
    RungeGood,
    /// `1 / (1 + 25‖x‖²)`
    RungeBad,
    /// `‖x‖₂³`
    R3,
    /// `‖x‖_∞`
    Linf,
}

impl TestFunction {
    pub const ALL: [TestFunction; 4] = [TestFunction::RungeGood, TestFunction::RungeBad, TestFunction::R3, TestFunction::Linf];

    pub fn as_str(self) -> &'static str {
        match self {
            TestFunction::RungeGood => "runge_good",
            TestFunction::RungeBad => "runge_bad",
            TestFunction::R3 => "r3",
            TestFunction::Linf => "linf",
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match self {
            TestFunction::RungeGood => 1.0 / (1.0 + r2 / 16.0),
            TestFunction::RungeBad => 1.0 / (1.0 + 25.0 * r2),
            TestFunction::R3 => r2 * r2.sqrt(),
            TestFunction::Linf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    pub fn values_on(self, points: &PointSet) -> Vec<f64> {
        points.iter().map(|x| self.eval(x)).collect()
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestFunction::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownFunction(s.to_string()))
    }
}

/// `count` scales between `min` and `max`, geometric when `log` is set.
pub fn scale_grid(min: f64, max: f64, count: usize, log: bool) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && max.is_finite()) {
        return Err(Error::Config(format!("invalid scale range [{min}, {max}]")));
    }
    if count == 0 {
        return Err(Error::Config("scale count must be positive".into()));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let step = |i: usize| i as f64 / (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            // endpoints exactly as given
            if i == 0 {
                min
            } else if i == count - 1 {
                max
            } else if log {
                10f64.powf(min.log10() + step(i) * (max.log10() - min.log10()))
            } else {
                min + step(i) * (max - min)
            }
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub kernels: Vec<RadialKernel>,
    pub functions: Vec<TestFunction>,
    /// Sites form the `grid × grid` regular grid on `[-1, 1]²`.
    pub grid: usize,
    pub eps: Vec<f64>,
    pub gate: ConditionGate,
    pub baselines: bool,
    pub pinv_cutoff: f64,
}

impl SweepConfig {
    /// All scaled kernels and functions over 40 log-spaced scales in `[0.01, 10]`.
    pub fn new(grid: usize) -> Self {
        SweepConfig {
            kernels: [KernelId::Gaussian, KernelId::InverseMultiquadric, KernelId::Matern3, KernelId::Wendland]
                .map(RadialKernel::new)
                .to_vec(),
            functions: TestFunction::ALL.to_vec(),
            grid,
            eps: scale_grid(1e-2, 1e1, 40, true).expect("valid default range"),
            gate: ConditionGate::default(),
            baselines: true,
            pinv_cutoff: flat_limit::DEFAULT_PINV_CUTOFF,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid < 2 {
            return Err(Error::Config(format!("grid must be at least 2, got {}", self.grid)));
        }
        if let Some(k) = self.kernels.iter().find(|k| !k.is_positive_definite()) {
            return Err(Error::Config(format!("kernel {} is a baseline, not a swept kernel", k.id)));
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::Config(format!("invalid scale {e}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub experiment_id: String,
    pub kernel: String,
    pub function: String,
    pub n_sites: usize,
    /// User scale; zero on baseline rows.
    pub epsilon: f64,
    pub linf_error: Option<f64>,
    pub native_norm: Option<f64>,
    pub power_sup: Option<f64>,
    pub bound_product: Option<f64>,
    pub cond_estimate: Option<f64>,
    pub status: Status,
}

/// `‖P‖_∞ · ‖s‖_Φ`. A proxy for the error bound, with the interpolant's norm
/// standing in for the unknown norm of the function.
pub fn bound_product(power_sup: f64, native_norm: f64) -> f64 {
    if power_sup == 0.0 {
        0.0
    } else {
        power_sup * native_norm
    }
}

pub fn experiment_id(function: TestFunction, n_sites: usize) -> String {
    format!("{function}_{n_sites}")
}

fn max_error(values: &[f64], truth: &[f64]) -> f64 {
    values.iter().zip(truth).map(|(v, t)| (v - t).abs()).fold(0.0, f64::max)
}

struct ScaleResult {
    cond_estimate: f64,
    status: Status,
    power_sup: Option<f64>,
    /// `(error, norm)` per configured function.
    per_function: Vec<(f64, f64)>,
}

fn run_scale(
    kernel: &RadialKernel,
    eps: f64,
    sites: &Arc<PointSet>,
    grid: &PointSet,
    data: &[(Vec<f64>, Vec<f64>)],
    gate: &ConditionGate,
) -> Result<ScaleResult> {
    match KernelSystem::factor(kernel, eps, Arc::clone(sites), gate)? {
        Outcome::Skipped { status, cond_estimate } => Ok(ScaleResult {
            cond_estimate,
            status,
            power_sup: None,
            per_function: Vec::new(),
        }),
        Outcome::Ok(sys) => {
            let power = sys.power_values(grid.iter())?;
            let per_function = data
                .iter()
                .map(|(values, truth)| {
                    let s = sys.solve(values)?;
                    let err = max_error(&s.evaluate(grid.iter()), truth);
                    Ok((err, native_norm_of_interpolant(&s).value))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ScaleResult {
                cond_estimate: sys.cond_estimate(),
                status: Status::Ok,
                power_sup: Some(power.sup),
                per_function,
            })
        }
    }
}

/// Runs the sweep; rows are grouped by function, then kernel in configured
/// order, then scale, followed by the `p`, `ph3`, `ph4` baselines.
///
/// Scales are processed in parallel; the output does not depend on the
/// number of workers.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let sites = Arc::new(PointSet::regular_grid(config.grid)?);
    let grid = PointSet::midpoint_grid(config.grid)?;
    let n = sites.len();
    let data: Vec<(Vec<f64>, Vec<f64>)> =
        config.functions.iter().map(|f| (f.values_on(&sites), f.values_on(&grid))).collect();

    let jobs: Vec<(usize, f64)> = (0..config.kernels.len())
        .flat_map(|k| config.eps.iter().map(move |&e| (k, e)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(k, eps)| run_scale(&config.kernels[k], eps, &sites, &grid, &data, &config.gate))
        .collect::<Result<Vec<_>>>()?;

    let baselines = if config.baselines {
        config
            .functions
            .par_iter()
            .zip(&data)
            .map(|(f, (values, truth))| baseline_records(*f, &sites, &grid, values, truth, config))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![Vec::new(); config.functions.len()]
    };

    let mut records = Vec::with_capacity(jobs.len() * config.functions.len() + 3 * config.functions.len());
    for (fi, f) in config.functions.iter().enumerate() {
        let id = experiment_id(*f, n);
        for (&(k, eps), r) in jobs.iter().zip(&results) {
            let mut rec = SweepRecord {
                experiment_id: id.clone(),
                kernel: config.kernels[k].id.to_string(),
                function: f.to_string(),
                n_sites: n,
                epsilon: eps,
                linf_error: None,
                native_norm: None,
                power_sup: None,
                bound_product: None,
                cond_estimate: r.cond_estimate.is_finite().then_some(r.cond_estimate),
                status: r.status,
            };
            if let (Some(p), Some(&(err, norm))) = (r.power_sup, r.per_function.get(fi)) {
                rec.linf_error = Some(err);
                rec.native_norm = Some(norm);
                rec.power_sup = Some(p);
                rec.bound_product = Some(bound_product(p, norm));
            }
            records.push(rec);
        }
        records.extend(baselines[fi].iter().cloned());
    }
    Ok(records)
}

fn baseline_records(
    function: TestFunction,
    sites: &Arc<PointSet>,
    grid: &PointSet,
    values: &[f64],
    truth: &[f64],
    config: &SweepConfig,
) -> Result<Vec<SweepRecord>> {
    let n = sites.len();
    let row = |kernel: &str| SweepRecord {
        experiment_id: experiment_id(function, n),
        kernel: kernel.to_string(),
        function: function.to_string(),
        n_sites: n,
        epsilon: 0.0,
        linf_error: None,
        native_norm: None,
        power_sup: None,
        bound_product: None,
        cond_estimate: None,
        status: Status::Baseline,
    };

    let max_degree = flat_limit::default_max_degree(sites.dim(), n);
    let poly = flat_limit::fit_polynomial(sites, values, grid, truth, max_degree, config.pinv_cutoff)?;
    let mut out = vec![SweepRecord {
        linf_error: Some(poly.error),
        ..row(POLYNOMIAL_LABEL)
    }];

    for id in [KernelId::Polyharmonic3, KernelId::Polyharmonic4] {
        let kernel = RadialKernel::new(id);
        let rec = match flat_limit::polyharmonic_baseline(&kernel, Arc::clone(sites), values, grid, truth, &config.gate)? {
            Outcome::Ok(PolyharmonicBaseline { error, native_norm, cond_estimate, .. }) => SweepRecord {
                linf_error: Some(error),
                native_norm: Some(native_norm),
                cond_estimate: Some(cond_estimate),
                ..row(id.as_str())
            },
            Outcome::Skipped { status, cond_estimate } => SweepRecord {
                cond_estimate: cond_estimate.is_finite().then_some(cond_estimate),
                status,
                ..row(id.as_str())
            },
        };
        out.push(rec);
    }
    Ok(out)
}

/// Shortest round-trip decimal: `0`, `inf`, or scientific (`1e14`, `2.5e-3`).
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:e}")
    }
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn parse_opt(field: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| Error::Config(format!("bad number {field:?}")))
}

impl SweepRecord {
    pub fn to_csv_row(&self) -> String {
        [
            self.experiment_id.clone(),
            self.kernel.clone(),
            self.function.clone(),
            self.n_sites.to_string(),
            format_float(self.epsilon),
            format_opt(self.linf_error),
            format_opt(self.native_norm),
            format_opt(self.power_sup),
            format_opt(self.bound_product),
            format_opt(self.cond_estimate),
            self.status.to_string(),
        ]
        .join(",")
    }

    pub fn from_csv_row(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(Error::Config(format!("expected 11 fields, got {}: {line:?}", fields.len())));
        }
        let number = |s: &str| parse_opt(s)?.ok_or_else(|| Error::Config(format!("missing number in {line:?}")));
        Ok(SweepRecord {
            experiment_id: fields[0].to_string(),
            kernel: fields[1].to_string(),
            function: fields[2].to_string(),
            n_sites: fields[3]
                .parse()
                .map_err(|_| Error::Config(format!("bad site count {:?}", fields[3])))?,
            epsilon: number(fields[4])?,
            linf_error: parse_opt(fields[5])?,
            native_norm: parse_opt(fields[6])?,
            power_sup: parse_opt(fields[7])?,
            bound_product: parse_opt(fields[8])?,
            cond_estimate: parse_opt(fields[9])?,
            status: fields[10].parse()?,
        })
    }

    pub fn is_baseline(&self) -> bool {
        self.status == Status::Baseline || self.epsilon == 0.0
    }
}

/// Writes `# key=value` metadata lines, the header, then one row per record.
pub fn write_csv<W: Write>(mut out: W, metadata: &[(String, String)], records: &[SweepRecord]) -> io::Result<()> {
    for (k, v) in metadata {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.to_csv_row())?;
    }
    Ok(())
}

/// Parses sweep CSV text, skipping `#` lines; returns metadata and records.
pub fn read_csv(text: &str) -> Result<(Vec<(String, String)>, Vec<SweepRecord>)> {
    let mut metadata = Vec::new();
    let mut records = Vec::new();
    let mut header_seen = false;
    for line in text.lines() {
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.trim().split_once('=') {
                metadata.push((k.to_string(), v.to_string()));
            }
        } else if !header_seen {
            if line != CSV_HEADER {
                return Err(Error::Config(format!("unexpected header {line:?}")));
            }
            header_seen = true;
        } else if !line.is_empty() {
            records.push(SweepRecord::from_csv_row(line)?);
        }
    }
    Ok((metadata, records))
}

/// Least-squares slope of `log y` against `log ε` over the ok rows with
/// `ε ≥ ε_max / 10`.
pub fn top_decade_slope(records: &[SweepRecord], y: impl Fn(&SweepRecord) -> Option<f64>) -> Option<f64> {
    let ok: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.status == Status::Ok)
        .filter_map(|r| y(r).filter(|v| *v > 0.0).map(|v| (r.epsilon, v)))
        .collect();
    let top = ok.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let pts: Vec<(f64, f64)> = ok
        .iter()
        .filter(|p| p.0 >= top / 10.0)
        .map(|&(e, v)| (e.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}
