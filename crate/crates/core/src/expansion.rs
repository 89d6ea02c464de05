//! Small-scale expansion of analytic-kernel interpolants,
//!
//! ```text
//! s(x; ε) = p₀(x) + ε² p₂(x) + ε⁴ p₄(x) + …
//! ```
//!
//! estimated by least squares over sampled scales. `p₀` is the flat-limit
//! polynomial; the higher coefficients vanish on the data sites.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::interpolation::{self, ConditionGate, Interpolant, Outcome};
use crate::kernel::RadialKernel;
use crate::points::PointSet;

/// Relative singular-value cutoff of the sample fit.
const FIT_CUTOFF: f64 = 1e-14;

/// A coefficient counts as nonzero beyond this multiple of its tolerance.
pub const SIGNIFICANCE: f64 = 10.0;

/// Settings for [`fit_expansion`].
#[derive(Debug, Clone)]
pub struct ExpansionSettings {
    pub eps_min: f64,
    pub eps_max: f64,
    pub samples: usize,
    /// Highest even term `ε^(2J)`.
    pub terms: usize,
    /// Also fit `ε` and `ε³`, whose coefficients should vanish.
    pub odd_powers: bool,
    pub gate: ConditionGate,
}

impl Default for ExpansionSettings {
    fn default() -> Self {
        ExpansionSettings {
            eps_min: 0.05,
            eps_max: 0.4,
            samples: 12,
            terms: 3,
            odd_powers: false,
            gate: ConditionGate::default(),
        }
    }
}

impl ExpansionSettings {
    pub fn eps_samples(&self) -> Vec<f64> {
        crate::sweep::scale_grid(self.eps_min, self.eps_max, self.samples, true).unwrap_or_default()
    }

    /// Powers of ε in the fit basis.
    pub fn powers(&self) -> Vec<u32> {
        let mut p: Vec<u32> = (0..=self.terms as u32).map(|j| 2 * j).collect();
        if self.odd_powers {
            p.extend([1, 3]);
            p.sort_unstable();
        }
        p
    }
}

/// Fitted expansion at a set of probe points.
#[derive(Debug, Clone)]
pub struct ExpansionFit {
    pub kernel: RadialKernel,
    pub sites: Arc<PointSet>,
    pub values: Vec<f64>,
    pub probes: PointSet,
    /// Powers of ε in the fit basis, ascending.
    pub powers: Vec<u32>,
    /// Scales that passed the gate.
    pub eps: Vec<f64>,
    /// Scales dropped by the gate.
    pub dropped: Vec<f64>,
    /// `coefficients[i][t]` multiplies `ε^powers[t]` at probe `i`.
    pub coefficients: Vec<Vec<f64>>,
    /// Max sample misfit per probe.
    pub residuals: Vec<f64>,
    /// Max over probes of [`residuals`](Self::residuals).
    pub residual: f64,
    /// `max |s(x; ε)|` over probes and samples.
    pub sample_scale: f64,
    /// Least-squares operator mapping samples to coefficients.
    operator: DMatrix<f64>,
    interpolants: Vec<Interpolant>,
}

fn design(eps: &[f64], powers: &[u32]) -> DMatrix<f64> {
    DMatrix::from_fn(eps.len(), powers.len(), |i, t| eps[i].powi(powers[t] as i32))
}

/// Pseudoinverse with column equilibration.
fn fit_operator(eps: &[f64], powers: &[u32]) -> DMatrix<f64> {
    let v = design(eps, powers);
    let scales: Vec<f64> = v
        .column_iter()
        .map(|c| c.amax())
        .map(|m| if m > 0.0 { m } else { 1.0 })
        .collect();
    let mut vs = v.clone();
    for (t, mut c) in vs.column_iter_mut().enumerate() {
        c /= scales[t];
    }
    let svd = vs.svd(true, true);
    let tol = FIT_CUTOFF * svd.singular_values.max();
    let mut pinv = svd.pseudo_inverse(tol).expect("u and v_t were requested");
    for (t, mut row) in pinv.row_iter_mut().enumerate() {
        row /= scales[t];
    }
    pinv
}

/// Samples `s(x; ε)` on `eps` and fits the expansion at every probe.
///
/// Scales failing the gate are dropped; fewer than `2·len(powers)` survivors
/// is an error.
pub fn fit_expansion(
    kernel: &RadialKernel,
    sites: impl Into<Arc<PointSet>>,
    values: &[f64],
    probes: &PointSet,
    settings: &ExpansionSettings,
) -> Result<ExpansionFit> {
    if !kernel.is_analytic() {
        return Err(Error::UnsupportedKernel(kernel.id.to_string()));
    }
    let sites = sites.into();
    if probes.dim() != sites.dim() {
        return Err(Error::DimensionMismatch { expected: sites.dim(), got: probes.dim() });
    }
    let powers = settings.powers();
    let needed = 2 * powers.len();
    let samples = settings.eps_samples();
    if samples.is_empty() {
        return Err(Error::Config(format!(
            "invalid scale window [{}, {}] with {} samples",
            settings.eps_min, settings.eps_max, settings.samples
        )));
    }

    let mut eps = Vec::new();
    let mut dropped = Vec::new();
    let mut interpolants = Vec::new();
    for &e in &samples {
        match interpolation::solve(kernel, e, Arc::clone(&sites), values, &settings.gate)? {
            Outcome::Ok(s) => {
                eps.push(e);
                interpolants.push(s);
            }
            Outcome::Skipped { .. } => dropped.push(e),
        }
    }
    if eps.len() < needed {
        return Err(Error::InsufficientSamples { got: eps.len(), needed });
    }

    let operator = fit_operator(&eps, &powers);
    let v = design(&eps, &powers);
    let mut coefficients = Vec::with_capacity(probes.len());
    let mut residuals = Vec::with_capacity(probes.len());
    let mut sample_scale = 0.0f64;
    for x in probes.iter() {
        let s = DVector::from_iterator(eps.len(), interpolants.iter().map(|i| i.value_at(x)));
        sample_scale = sample_scale.max(s.amax());
        let c = &operator * &s;
        residuals.push((&v * &c - &s).amax());
        coefficients.push(c.iter().copied().collect());
    }
    let residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(ExpansionFit {
        kernel: *kernel,
        sites,
        values: values.to_vec(),
        probes: probes.clone(),
        powers,
        eps,
        dropped,
        coefficients,
        residuals,
        residual,
        sample_scale,
        operator,
        interpolants,
    })
}

impl ExpansionFit {
    /// Coefficients of every basis power at an arbitrary point.
    pub fn coefficients_at(&self, x: &[f64]) -> Vec<f64> {
        let s = DVector::from_iterator(self.eps.len(), self.interpolants.iter().map(|i| i.value_at(x)));
        (&self.operator * s).iter().copied().collect()
    }

    /// Index of `ε^power` in the basis.
    pub fn term(&self, power: u32) -> Option<usize> {
        self.powers.iter().position(|&p| p == power)
    }

    /// The flat-limit polynomial `p₀(x)`.
    pub fn p0_at(&self, x: &[f64]) -> f64 {
        self.coefficients_at(x)[0]
    }

    /// Uncertainty of each coefficient: the fit residual propagated through
    /// the least-squares operator, `residual · ‖row_t‖₁`.
    pub fn tolerances(&self) -> Vec<f64> {
        self.operator
            .row_iter()
            .map(|r| self.residual * r.iter().map(|v| v.abs()).sum::<f64>())
            .collect()
    }

    /// Highest even power fitted, `2J`.
    pub fn max_even_power(&self) -> u32 {
        self.powers.iter().copied().filter(|p| p % 2 == 0).max().unwrap_or(0)
    }

    /// Smallest `j ≥ 1` whose `ε^(2j)` coefficient is significant at some probe.
    pub fn k_min(&self) -> Option<u32> {
        let tol = self.tolerances();
        (1..=self.max_even_power() / 2).find(|&j| {
            let t = self.term(2 * j).expect("even powers are in the basis");
            let floor = SIGNIFICANCE * tol[t];
            self.coefficients.iter().any(|c| c[t].abs() > floor)
        })
    }

    /// Fit residual relative to the sampled magnitude.
    pub fn relative_residual(&self) -> f64 {
        if self.sample_scale > 0.0 {
            self.residual / self.sample_scale
        } else {
            self.residual
        }
    }

    /// CSV rows `probe,j,coefficient,residual`, with `j` the power of ε.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("probe,j,coefficient,residual\n");
        for (i, x) in self.probes.iter().enumerate() {
            let probe = x.iter().map(|v| crate::sweep::format_float(*v)).collect::<Vec<_>>().join(";");
            for (t, &p) in self.powers.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{probe},{p},{},{}",
                    crate::sweep::format_float(self.coefficients[i][t]),
                    crate::sweep::format_float(self.residuals[i])
                );
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The error shrinks at some positive scale.
    Improvable,
    /// The flat limit is locally optimal.
    NotImprovable,
    /// The flat limit already reproduces the function.
    FlatLimitExact,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Improvable => "improvable",
            Verdict::NotImprovable => "not improvable",
            Verdict::FlatLimitExact => "flat-limit-exact",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Relative tolerance under which local maxima of `|p₀ − f|` tie with the
/// global maximum.
pub const EXTREMAL_TIE: f64 = 1e-6;

const DENSE_SAMPLES: usize = 10_000;

/// Points of a 1D interval where `|g|` attains its maximum, up to
/// [`EXTREMAL_TIE`]. Local maxima on a dense grid are refined by golden
/// section.
pub fn extremal_points(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<f64> {
    let h = (hi - lo) / (DENSE_SAMPLES - 1) as f64;
    let xs: Vec<f64> = (0..DENSE_SAMPLES).map(|i| lo + h * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| g(x).abs()).collect();
    let mut candidates = Vec::new();
    for i in 0..DENSE_SAMPLES {
        let left = if i > 0 { ys[i - 1] } else { f64::NEG_INFINITY };
        let right = if i + 1 < DENSE_SAMPLES { ys[i + 1] } else { f64::NEG_INFINITY };
        if ys[i] >= left && ys[i] >= right && ys[i] > 0.0 {
            let a = xs[i.saturating_sub(1)];
            let b = xs[(i + 1).min(DENSE_SAMPLES - 1)];
            let x = golden_max(|x| g(x).abs(), a, b);
            candidates.push((x, g(x).abs()));
        }
    }
    let top = candidates.iter().map(|c| c.1).fold(0.0, f64::max);
    let mut out: Vec<f64> = candidates
        .into_iter()
        .filter(|c| c.1 >= top * (1.0 - EXTREMAL_TIE))
        .map(|c| c.0)
        .collect();
    out.dedup_by(|a, b| (*a - *b).abs() <= 2.0 * h);
    out
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Per-point outcome of the sign test.
#[derive(Debug, Clone, PartialEq)]
pub struct SignCheck {
    pub x: f64,
    /// `σ(x) · Σ_{j≥1} ε^(2j) p_{2j}(x)` with `σ = sign(p₀ − f)`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignCriterion {
    pub eps: f64,
    pub verdict: Verdict,
    pub checks: Vec<SignCheck>,
    /// `max |p₀ − f|` over the hull.
    pub flat_error: f64,
}

/// Sign test at the extremal points of `p₀ − f` on a 1D site hull: some
/// `ε > 0` beats the flat limit only if the expansion pushes the error
/// toward zero, `σ(x) Σ_{j≥1} ε^(2j) p_{2j}(x) < 0`, at every extremal point.
pub fn sign_criterion(fit: &ExpansionFit, truth: impl Fn(f64) -> f64, eps: f64) -> Result<SignCriterion> {
    if fit.sites.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: fit.sites.dim() });
    }
    let (lo, hi) = hull_1d(&fit.sites);
    let deviation = |x: f64| fit.p0_at(&[x]) - truth(x);
    let flat_error = (0..=1000)
        .map(|i| deviation(lo + (hi - lo) * i as f64 / 1000.0).abs())
        .fold(0.0, f64::max);
    let scale = fit.sample_scale.max(f64::MIN_POSITIVE);
    if flat_error <= (SIGNIFICANCE * fit.tolerances()[0]).max(1e-12 * scale) {
        return Ok(SignCriterion {
            eps,
            verdict: Verdict::FlatLimitExact,
            checks: Vec::new(),
            flat_error,
        });
    }
    let checks: Vec<SignCheck> = extremal_points(deviation, lo, hi)
        .into_iter()
        .map(|x| {
            let c = fit.coefficients_at(&[x]);
            let correction: f64 = fit
                .powers
                .iter()
                .zip(&c)
                .filter(|(p, _)| **p > 0)
                .map(|(p, v)| eps.powi(*p as i32) * v)
                .sum();
            SignCheck {
                x,
                value: deviation(x).signum() * correction,
            }
        })
        .collect();
    let verdict = if checks.iter().all(|c| c.value < 0.0) {
        Verdict::Improvable
    } else {
        Verdict::NotImprovable
    };
    Ok(SignCriterion {
        eps,
        verdict,
        checks,
        flat_error,
    })
}

fn hull_1d(sites: &PointSet) -> (f64, f64) {
    sites
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x[0]), hi.max(x[0])))
}

/// Max error over the hull of interpolants of `values` at each scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorScan {
    pub eps: Vec<f64>,
    pub errors: Vec<Option<f64>>,
}

impl ErrorScan {
    /// Improvable when some positive scale beats the smallest scanned one.
    pub fn verdict(&self) -> Verdict {
        let ok: Vec<f64> = self.errors.iter().flatten().copied().collect();
        match ok.first() {
            Some(&first) if ok.iter().skip(1).any(|&e| e < first) => Verdict::Improvable,
            _ => Verdict::NotImprovable,
        }
    }

    pub fn argmin(&self) -> Option<f64> {
        self.eps
            .iter()
            .zip(&self.errors)
            .filter_map(|(e, v)| v.map(|v| (*e, v)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|p| p.0)
    }
}

/// Scans `max_x |s(x; ε) − f(x)|` over a dense hull grid.
pub fn error_scan(
    kernel: &RadialKernel,
    sites: &Arc<PointSet>,
    values: &[f64],
    truth: &[f64],
    grid: &PointSet,
    eps: &[f64],
    gate: &ConditionGate,
) -> Result<ErrorScan> {
    let errors = eps
        .iter()
        .map(|&e| {
            Ok(match interpolation::solve(kernel, e, Arc::clone(sites), values, gate)? {
                Outcome::Ok(s) => Some(
                    s.evaluate(grid.iter())
                        .iter()
                        .zip(truth)
                        .map(|(v, t)| (v - t).abs())
                        .fold(0.0, f64::max),
                ),
                Outcome::Skipped { .. } => None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorScan { eps: eps.to_vec(), errors })
}

/// One of the two extensions `p₀ ± p_{2k}` of the data.
#[derive(Debug, Clone)]
pub struct Extension {
    /// `+1` for `p₀ + p_{2k}`, `-1` for `p₀ − p_{2k}`.
    pub sign: f64,
    pub criterion: SignCriterion,
    pub scan: ErrorScan,
}

impl Extension {
    pub fn label(&self) -> &'static str {
        if self.sign > 0.0 {
            "p0 + p2k"
        } else {
            "p0 - p2k"
        }
    }

    /// Sign test and scan agree.
    pub fn consistent(&self) -> bool {
        self.criterion.verdict == self.scan.verdict()
    }
}

#[derive(Debug, Clone)]
pub enum DemoOutcome {
    /// All data vanish, so every coefficient does.
    FlatLimitExact,
    /// No significant `p_{2j}` within the fitted terms.
    Inconclusive,
    Extensions { k_min: u32, plus: Extension, minus: Extension },
}

#[derive(Debug, Clone)]
pub struct DemoReport {
    pub fit: ExpansionFit,
    pub scan_eps: Vec<f64>,
    pub outcome: DemoOutcome,
}

impl DemoReport {
    /// Both extensions reach opposite verdicts, by the sign test and by the scan.
    pub fn opposite_verdicts(&self) -> bool {
        match &self.outcome {
            DemoOutcome::Extensions { plus, minus, .. } => {
                plus.consistent() && minus.consistent() && plus.criterion.verdict != minus.criterion.verdict
            }
            _ => false,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let fit = &self.fit;
        let _ = writeln!(out, "kernel: {} (pre-scale {})", fit.kernel.id, fit.kernel.pre_scale);
        let _ = writeln!(out, "sites: {}", fit.sites);
        let _ = writeln!(out, "values: {:?}", fit.values);
        let _ = writeln!(
            out,
            "samples: {} in [{:e}, {:e}], {} dropped by the gate",
            fit.eps.len(),
            fit.eps.first().copied().unwrap_or(f64::NAN),
            fit.eps.last().copied().unwrap_or(f64::NAN),
            fit.dropped.len()
        );
        let _ = writeln!(out, "powers: {:?}", fit.powers);
        let _ = writeln!(out, "fit residual: {:e} (relative {:e})", fit.residual, fit.relative_residual());
        if fit.max_even_power() == 0 {
            let _ = writeln!(out, "higher terms: unavailable (J = 0)");
        }
        match &self.outcome {
            DemoOutcome::FlatLimitExact => {
                let _ = writeln!(out, "verdict: flat-limit-exact");
            }
            DemoOutcome::Inconclusive => {
                let _ = writeln!(out, "k_min: not found; inconclusive");
            }
            DemoOutcome::Extensions { k_min, plus, minus } => {
                let _ = writeln!(out, "k_min: {k_min}");
                for e in [plus, minus] {
                    let _ = writeln!(
                        out,
                        "{}: sign test at eps={:e} -> {} ({} extremal points); scan argmin eps={} -> {}",
                        e.label(),
                        e.criterion.eps,
                        e.criterion.verdict,
                        e.criterion.checks.len(),
                        e.scan.argmin().map_or("none".into(), |v| format!("{v:e}")),
                        e.scan.verdict()
                    );
                }
                let _ = writeln!(out, "opposite verdicts: {}", self.opposite_verdicts());
            }
        }
        out
    }
}

/// Builds the extensions `p₀ ± p_{2k}` with `k = k_min` (both interpolate the
/// data since `p_{2k}` vanishes on the sites) and decides for each whether
/// a positive scale improves on the flat limit.
pub fn theorem61_demo(
    kernel: &RadialKernel,
    sites: impl Into<Arc<PointSet>>,
    values: &[f64],
    settings: &ExpansionSettings,
    scan_eps: &[f64],
) -> Result<DemoReport> {
    let sites: Arc<PointSet> = sites.into();
    if sites.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: sites.dim() });
    }
    let (lo, hi) = hull_1d(&sites);
    let probes = PointSet::from_1d(&(0..=200).map(|i| lo + (hi - lo) * i as f64 / 200.0).collect::<Vec<_>>())?;
    let fit = fit_expansion(kernel, Arc::clone(&sites), values, &probes, settings)?;

    if values.iter().all(|&v| v == 0.0) {
        return Ok(DemoReport { fit, scan_eps: scan_eps.to_vec(), outcome: DemoOutcome::FlatLimitExact });
    }
    let Some(k) = fit.k_min() else {
        return Ok(DemoReport { fit, scan_eps: scan_eps.to_vec(), outcome: DemoOutcome::Inconclusive });
    };
    let term = fit.term(2 * k).expect("k_min indexes an even power");

    let grid = PointSet::from_1d(&(0..=1000).map(|i| lo + (hi - lo) * i as f64 / 1000.0).collect::<Vec<_>>())?;
    let coeffs: Vec<Vec<f64>> = grid.iter().map(|x| fit.coefficients_at(x)).collect();
    let eps_small = fit.eps[0];

    let extension = |sign: f64| -> Result<Extension> {
        let f = |x: f64| {
            let c = fit.coefficients_at(&[x]);
            c[0] + sign * c[term]
        };
        let criterion = sign_criterion(&fit, f, eps_small)?;
        let truth: Vec<f64> = coeffs.iter().map(|c| c[0] + sign * c[term]).collect();
        let scan = error_scan(kernel, &sites, values, &truth, &grid, scan_eps, &settings.gate)?;
        Ok(Extension { sign, criterion, scan })
    };
    let plus = extension(1.0)?;
    let minus = extension(-1.0)?;
    Ok(DemoReport {
        fit,
        scan_eps: scan_eps.to_vec(),
        outcome: DemoOutcome::Extensions { k_min: k, plus, minus },
    })
}
