//! Native-space norms.
//!
//! With `f̂(ω) = (2π)^(-d/2) ∫ f(x) e^(-i⟨x,ω⟩) dx`, the native norm of a
//! translation-invariant kernel is
//!
//! ```text
//! ‖f‖²_Φ = (2π)^(-d/2) ∫ |f̂(ω)|² / Φ̂(ω) dω
//! ```
//!
//! and the scaled kernel `Φ_ε(x) = Φ(εx)` has `Φ̂_ε(ω) = ε^(-d) Φ̂(ω/ε)`.
//! Radial integrals are computed by adaptive quadrature in `ρ = ‖ω‖`.
//!
//! Seminorms carry the same prefactor, `|f|²_j = (2π)^(-d/2) ∫ |f̂|² ‖ω‖^(2j)`,
//! so that `‖f‖²_{Φ_ε} = ε^d Σ_j C(m,j) ε^(-2j) |f|²_j` holds exactly for the
//! Matérn kernel of `W₂^m`. The "L₂ norm" used in scale limits is `|f|_0`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interpolation::{ConditionGate, Interpolant, Outcome};
use crate::kernel::{KernelSpectrum, RadialKernel};
use crate::points::{distance, PointSet};
use crate::quadrature;

const QUAD_REL_TOL: f64 = 1e-11;

/// Radii probed for a growing integrand before integrating.
const DIVERGENCE_PROBE_MAX: f64 = 200.0;

/// A function known through its radial Fourier magnitude `|f̂|(ρ)`.
#[derive(Clone)]
pub struct SpectralFunction {
    pub dim: usize,
    pub label: String,
    /// `f̂` vanishes for `ρ > bandlimit`.
    pub bandlimit: Option<f64>,
    ln_profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for SpectralFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralFunction")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("bandlimit", &self.bandlimit)
            .finish_non_exhaustive()
    }
}

impl SpectralFunction {
    /// `ln_profile(ρ)` must return `ln |f̂|(ρ)`, `-∞` where `f̂` vanishes.
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        bandlimit: Option<f64>,
        ln_profile: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SpectralFunction {
            dim,
            label: label.into(),
            bandlimit,
            ln_profile: Arc::new(ln_profile),
        }
    }

    /// `f(x) = exp(-a ‖x‖²)`, with `f̂(ρ) = (2a)^(-d/2) exp(-ρ²/(4a))`.
    pub fn gaussian_bump(a: f64, dim: usize) -> Self {
        let c = -(dim as f64) / 2.0 * (2.0 * a).ln();
        SpectralFunction::new(dim, format!("gaussian_bump({a})"), None, move |rho| c - rho * rho / (4.0 * a))
    }

    /// A translate `x ↦ Φ_ε(x − x₀)` of the scaled kernel; `|f̂| = Φ̂_ε`.
    pub fn kernel_translate(spectrum: KernelSpectrum, eps: f64) -> Self {
        SpectralFunction::new(spectrum.dim, format!("{:?}_translate({eps})", spectrum.kind), None, move |rho| {
            spectrum.scaled_ln_profile(eps, rho)
        })
    }

    /// `f̂ = 1` on the ball of radius `b`, zero outside.
    pub fn ball_indicator(b: f64, dim: usize) -> Self {
        SpectralFunction::new(dim, format!("ball_indicator({b})"), Some(b), move |rho| {
            if rho <= b {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        })
    }

    /// `f_ε(x) = f(εx)`, with `f̂_ε(ω) = ε^(-d) f̂(ω/ε)`.
    pub fn scaled(&self, eps: f64) -> Self {
        let inner = Arc::clone(&self.ln_profile);
        let shift = -(self.dim as f64) * eps.ln();
        SpectralFunction {
            dim: self.dim,
            label: format!("{}@{eps}", self.label),
            bandlimit: self.bandlimit.map(|b| b * eps),
            ln_profile: Arc::new(move |rho| shift + inner(rho / eps)),
        }
    }

    pub fn ln_profile(&self, rho: f64) -> f64 {
        match self.bandlimit {
            Some(b) if rho > b => f64::NEG_INFINITY,
            _ => (self.ln_profile)(rho),
        }
    }

    pub fn profile(&self, rho: f64) -> f64 {
        self.ln_profile(rho).exp()
    }
}

/// `(2π)^(-d/2)` times the surface area of the unit sphere in `ℝ^d`.
fn radial_measure(dim: usize) -> Result<f64> {
    let sphere = match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => return Err(Error::Domain(format!("dimension {dim} is not supported"))),
    };
    Ok((2.0 * PI).powf(-(dim as f64) / 2.0) * sphere)
}

/// `(2π)^(-d/2) ∫_{ℝ^d} exp(ln_integrand(‖ω‖)) dω`.
fn spectral_integral(dim: usize, bandlimit: Option<f64>, ln_integrand: impl Fn(f64) -> f64) -> Result<f64> {
    let c = radial_measure(dim)?;
    let d1 = (dim - 1) as f64;
    let integrand = |rho: f64| {
        let ln = ln_integrand(rho);
        if ln == f64::NEG_INFINITY {
            0.0
        } else if dim == 1 {
            ln.exp()
        } else if rho == 0.0 {
            0.0
        } else {
            (ln + d1 * rho.ln()).exp()
        }
    };
    Ok(c * quadrature::integrate_half_line(integrand, bandlimit, QUAD_REL_TOL)?)
}

/// `|f|²_j = (2π)^(-d/2) ∫ |f̂(ω)|² ‖ω‖^(2j) dω`.
pub fn seminorm_squared(f: &SpectralFunction, j: u32) -> Result<f64> {
    let jf = f64::from(j);
    spectral_integral(f.dim, f.bandlimit, |rho| {
        let base = 2.0 * f.ln_profile(rho);
        if j == 0 {
            base
        } else {
            base + 2.0 * jf * rho.ln()
        }
    })
}

/// `|f|²_0`, the squared L₂ norm under the native-space normalization.
pub fn l2_norm_squared(f: &SpectralFunction) -> Result<f64> {
    seminorm_squared(f, 0)
}

/// Whether `|f̂|² / Φ̂_ε` grows over the last decade before
/// [`DIVERGENCE_PROBE_MAX`]; such integrals are reported as `+∞`.
fn integrand_diverges(f: &SpectralFunction, ln_integrand: &impl Fn(f64) -> f64) -> bool {
    if f.bandlimit.is_some() {
        return false;
    }
    let hi = DIVERGENCE_PROBE_MAX;
    let lo = hi / 10.0;
    let d1 = (f.dim - 1) as f64;
    let at = |rho: f64| ln_integrand(rho) + d1 * f64::ln(rho);
    let (a, b) = (at(lo), at(hi));
    b.is_nan() || b == f64::INFINITY || (b > a && b > f64::NEG_INFINITY)
}

/// `‖f‖_{Φ_ε}` by radial quadrature; `+∞` for divergent integrals.
///
/// `eps` is the total scale applied to the spectrum's kernel.
pub fn quadrature_norm(f: &SpectralFunction, spectrum: &KernelSpectrum, eps: f64) -> Result<f64> {
    if !spectrum.is_positive_definite() {
        return Err(Error::UnsupportedKernel(format!("{:?}", spectrum.kind)));
    }
    if spectrum.dim != f.dim {
        return Err(Error::DimensionMismatch { expected: spectrum.dim, got: f.dim });
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("scale must be positive, got {eps}")));
    }
    let ln_integrand = |rho: f64| 2.0 * f.ln_profile(rho) - spectrum.scaled_ln_profile(eps, rho);
    if integrand_diverges(f, &ln_integrand) {
        return Ok(f64::INFINITY);
    }
    Ok(spectral_integral(f.dim, f.bandlimit, ln_integrand)?.sqrt())
}

/// [`quadrature_norm`] for a catalog kernel at user scale `eps`.
pub fn quadrature_norm_for_kernel(f: &SpectralFunction, kernel: &RadialKernel, eps: f64) -> Result<f64> {
    let spectrum = kernel
        .spectrum(f.dim)
        .filter(KernelSpectrum::is_positive_definite)
        .ok_or_else(|| Error::UnsupportedKernel(kernel.id.to_string()))?;
    quadrature_norm(f, &spectrum, kernel.effective_scale(eps))
}

/// `sqrt(ε^d Σ_{j=0}^m C(m,j) ε^(-2j) |f|²_j)`, the exact `W₂^m` Matérn norm.
pub fn sobolev_norm_formula(f: &SpectralFunction, m: u32, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("scale must be positive, got {eps}")));
    }
    let seminorms = (0..=m).map(|j| seminorm_squared(f, j)).collect::<Result<Vec<_>>>()?;
    Ok(sobolev_norm_from_seminorms(&seminorms, f.dim, eps))
}

/// Same as [`sobolev_norm_formula`], reusing precomputed `|f|²_j`, `j = 0..=m`.
pub fn sobolev_norm_from_seminorms(seminorms_sq: &[f64], dim: usize, eps: f64) -> f64 {
    let m = seminorms_sq.len() - 1;
    let mut binom = 1.0;
    let mut sum = 0.0;
    for (j, s) in seminorms_sq.iter().enumerate() {
        sum += binom * eps.powi(-2 * j as i32) * s;
        binom = binom * (m - j) as f64 / (j + 1) as f64;
    }
    (eps.powi(dim as i32) * sum).sqrt()
}

/// Upper bound on useful scales: `ε^d ≤ ‖f‖²_Φ ‖Φ̂‖_∞ / |f|²_0`.
///
/// Beyond it `‖f‖_{Φ_ε} > ‖f‖_Φ`. Returns `+∞` if `‖f‖_Φ` diverges.
pub fn admissible_scale_limit(f: &SpectralFunction, spectrum: &KernelSpectrum) -> Result<f64> {
    let native = quadrature_norm(f, spectrum, 1.0)?;
    if !native.is_finite() {
        return Ok(f64::INFINITY);
    }
    let l2 = l2_norm_squared(f)?;
    Ok((native * native * spectrum.sup() / l2).powf(1.0 / f.dim as f64))
}

/// Sandwich for band-limited `f`:
/// `δ⁻(B)/δ⁺(B/ε) ≤ ‖f‖²_{Φ_ε} / (ε^d ‖f‖²_Φ) ≤ δ⁺(B)/δ⁻(B/ε)`
/// with `δ∓(K)` the inf/sup of `Φ̂` over the ball of radius `K`.
pub fn bandlimited_bounds(spectrum: &KernelSpectrum, bandlimit: f64, eps: f64) -> (f64, f64) {
    let extremes = |k: f64| {
        const SAMPLES: usize = 4001;
        (0..SAMPLES)
            .map(|i| spectrum.profile(k * i as f64 / (SAMPLES - 1) as f64))
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (lo_b, hi_b) = extremes(bandlimit);
    let (lo_s, hi_s) = extremes(bandlimit / eps);
    (lo_b / hi_s, hi_b / lo_s)
}

/// `‖f‖²_{Φ_ε} / (ε^d ‖f‖²_Φ)`.
pub fn scaled_norm_ratio(f: &SpectralFunction, spectrum: &KernelSpectrum, eps: f64) -> Result<f64> {
    let scaled = quadrature_norm(f, spectrum, eps)?;
    let base = quadrature_norm(f, spectrum, 1.0)?;
    Ok(scaled * scaled / (eps.powi(f.dim as i32) * base * base))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NativeNorm {
    pub value: f64,
    /// The quadratic form came out negative beyond round-off.
    pub conditioning_warning: bool,
}

/// `‖s‖_{Φ_ε}`: `sqrt(yᵀα)` for positive definite kernels, `sqrt(λᵀ A λ)`
/// over the kernel block for CPD kernels (the tail is norm-free).
pub fn native_norm_of_interpolant(s: &Interpolant) -> NativeNorm {
    let (q, scale) = if s.is_conditionally_positive_definite() {
        let eff = s.kernel.effective_scale(s.eps);
        let n = s.sites.len();
        let mut q = 0.0;
        let mut scale = 0.0;
        for j in 0..n {
            let xj = s.sites.point(j);
            let lj = s.coefficients[j];
            let mut row = 0.0;
            for k in 0..n {
                row += s.kernel.value(eff * distance(xj, s.sites.point(k))) * s.coefficients[k];
            }
            q += lj * row;
            scale += (lj * row).abs();
        }
        (q, scale)
    } else {
        let q: f64 = s.values.iter().zip(&s.coefficients).map(|(y, a)| y * a).sum();
        let scale: f64 = s.values.iter().zip(&s.coefficients).map(|(y, a)| (y * a).abs()).sum();
        (q, scale)
    };
    NativeNorm {
        value: q.abs().sqrt(),
        conditioning_warning: q < -1e-10 * scale,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormSource {
    Interpolant,
    Quadrature,
}

/// Norms `‖·‖_{Φ_ε}` over a grid of user scales; `None` marks skipped scales.
#[derive(Debug, Clone, PartialEq)]
pub struct NormScan {
    pub kernel: String,
    pub function: String,
    pub eps: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub source: NormSource,
}

impl NormScan {
    pub fn from_quadrature(f: &SpectralFunction, kernel: &RadialKernel, eps: &[f64]) -> Result<Self> {
        let values = eps
            .iter()
            .map(|&e| quadrature_norm_for_kernel(f, kernel, e).map(Some))
            .collect::<Result<Vec<_>>>()?;
        Ok(NormScan {
            kernel: kernel.id.to_string(),
            function: f.label.clone(),
            eps: eps.to_vec(),
            values,
            source: NormSource::Quadrature,
        })
    }

    pub fn from_interpolants(
        kernel: &RadialKernel,
        function: &str,
        sites: &Arc<PointSet>,
        values: &[f64],
        eps: &[f64],
        gate: &ConditionGate,
    ) -> Result<Self> {
        let norms = eps
            .iter()
            .map(|&e| {
                crate::interpolation::solve(kernel, e, Arc::clone(sites), values, gate)
                    .map(|o| match o {
                        Outcome::Ok(s) => Some(native_norm_of_interpolant(&s).value),
                        Outcome::Skipped { .. } => None,
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(NormScan {
            kernel: kernel.id.to_string(),
            function: function.to_string(),
            eps: eps.to_vec(),
            values: norms,
            source: NormSource::Interpolant,
        })
    }

    /// Scale of the smallest finite norm, the "natural scale" on this grid.
    pub fn argmin(&self) -> Option<f64> {
        self.eps
            .iter()
            .zip(&self.values)
            .filter_map(|(&e, v)| v.filter(|x| x.is_finite()).map(|x| (e, x)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(e, _)| e)
    }
}
