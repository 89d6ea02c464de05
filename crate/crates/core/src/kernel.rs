//! The radial kernel catalog.
//!
//! Six kernels are supported, named by their legend strings:
//!
//! | id     | φ(r)                               | class                 |
//! |--------|------------------------------------|-----------------------|
//! | `g`    | `exp(-r²)`                         | analytic              |
//! | `mq`   | `(1 + r²)^(-1/2)`                  | analytic              |
//! | `ms3`  | `r² K₂(r) / 8`                     | Matérn, `W₂³(ℝ²)`     |
//! | `w3.5` | `(1 - r)₊⁶ (35r² + 18r + 3)`       | Wendland, `W₂^3.5(ℝ²)`|
//! | `ph3`  | `r⁴ log r`                         | polyharmonic, order 3 |
//! | `ph4`  | `r⁶ log r`                         | polyharmonic, order 4 |
//!
//! A scaled kernel is `φ_ε(r) = φ(pre_scale · ε · r)`. The `ε` reported
//! everywhere is the user value; `pre_scale` is baked into the kernel.
//! Polyharmonic kernels ignore `ε`.

use std::fmt;
use std::str::FromStr;

use crate::bessel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelId {
    Gaussian,
    InverseMultiquadric,
    Matern3,
    Wendland,
    Polyharmonic3,
    Polyharmonic4,
}

impl KernelId {
    pub const ALL: [KernelId; 6] = [
        KernelId::Gaussian,
        KernelId::InverseMultiquadric,
        KernelId::Matern3,
        KernelId::Wendland,
        KernelId::Polyharmonic3,
        KernelId::Polyharmonic4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            KernelId::Gaussian => "g",
            KernelId::InverseMultiquadric => "mq",
            KernelId::Matern3 => "ms3",
            KernelId::Wendland => "w3.5",
            KernelId::Polyharmonic3 => "ph3",
            KernelId::Polyharmonic4 => "ph4",
        }
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelId::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownKernel(s.to_string()))
    }
}

/// Smoothness class of a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothness {
    /// Fourier transform decays exponentially.
    Analytic,
    /// `Φ̂(ω) = Θ(‖ω‖^(-beta))` at infinity.
    Finite { beta: f64 },
    /// Generalized Fourier transform `‖ω‖^(-2m)`.
    Polyharmonic { m: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialKernel {
    pub id: KernelId,
    pub smoothness: Smoothness,
    /// Zero for positive definite kernels; the polynomial tail has degree
    /// `cpd_order - 1`.
    pub cpd_order: u32,
    pub pre_scale: f64,
    pub sobolev_m: Option<f64>,
}

impl RadialKernel {
    pub fn new(id: KernelId) -> Self {
        let (smoothness, cpd_order, pre_scale, sobolev_m) = match id {
            KernelId::Gaussian => (Smoothness::Analytic, 0, 10.0, None),
            KernelId::InverseMultiquadric => (Smoothness::Analytic, 0, 10.0, None),
            KernelId::Matern3 => (Smoothness::Finite { beta: 6.0 }, 0, 1.0, Some(3.0)),
            KernelId::Wendland => (Smoothness::Finite { beta: 7.0 }, 0, 0.2, Some(3.5)),
            KernelId::Polyharmonic3 => (Smoothness::Polyharmonic { m: 3 }, 3, 1.0, Some(3.0)),
            KernelId::Polyharmonic4 => (Smoothness::Polyharmonic { m: 4 }, 4, 1.0, Some(4.0)),
        };
        RadialKernel {
            id,
            smoothness,
            cpd_order,
            pre_scale,
            sobolev_m,
        }
    }

    /// Same kernel with a different baked-in scale.
    ///
    /// For polyharmonic kernels this rescales the argument, `φ(c r)`, which
    /// the polynomial tail absorbs.
    pub fn with_pre_scale(mut self, pre_scale: f64) -> Self {
        assert!(pre_scale > 0.0 && pre_scale.is_finite(), "pre_scale must be positive");
        self.pre_scale = pre_scale;
        self
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cpd_order == 0
    }

    pub fn is_polyharmonic(&self) -> bool {
        matches!(self.smoothness, Smoothness::Polyharmonic { .. })
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.smoothness, Smoothness::Analytic)
    }

    /// Fourier decay exponent, when finite.
    pub fn beta(&self) -> Option<f64> {
        match self.smoothness {
            Smoothness::Analytic => None,
            Smoothness::Finite { beta } => Some(beta),
            Smoothness::Polyharmonic { m } => Some(2.0 * f64::from(m)),
        }
    }

    /// Degree of the polynomial tail, `None` for positive definite kernels.
    pub fn tail_degree(&self) -> Option<u32> {
        self.cpd_order.checked_sub(1)
    }

    /// `φ(r)`, with the domain checked.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("radius must be non-negative, got {r}")));
        }
        Ok(self.value(r))
    }

    /// `φ(r)` for `r >= 0`, unchecked.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        match self.id {
            KernelId::Gaussian => (-r * r).exp(),
            KernelId::InverseMultiquadric => 1.0 / (1.0 + r * r).sqrt(),
            KernelId::Matern3 => matern3(r),
            KernelId::Wendland => wendland_32(r),
            KernelId::Polyharmonic3 => thin_plate(r, 4),
            KernelId::Polyharmonic4 => thin_plate(r, 6),
        }
    }

    /// `φ(pre_scale · ε · r)`; polyharmonic kernels ignore `ε`.
    pub fn eval_scaled(&self, eps: f64, r: f64) -> Result<f64> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Domain(format!("scale must be positive, got {eps}")));
        }
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("radius must be non-negative, got {r}")));
        }
        Ok(self.value(self.effective_scale(eps) * r))
    }

    /// Multiplier applied to distances for user scale `eps`.
    #[inline]
    pub fn effective_scale(&self, eps: f64) -> f64 {
        if self.is_polyharmonic() {
            self.pre_scale
        } else {
            self.pre_scale * eps
        }
    }

    /// `φ_ε(0)`. Scale-free, since scaling only touches the argument.
    pub fn value_at_zero(&self) -> f64 {
        self.value(0.0)
    }

    /// Radial Fourier profile in `dim` dimensions, when a closed form exists.
    ///
    /// The profile belongs to the unscaled kernel `φ(r)`, without `pre_scale`.
    pub fn spectrum(&self, dim: usize) -> Option<KernelSpectrum> {
        match self.smoothness {
            Smoothness::Analytic if self.id == KernelId::Gaussian => Some(KernelSpectrum::gaussian(dim)),
            Smoothness::Finite { .. } if self.id == KernelId::Matern3 && dim == 2 => {
                Some(KernelSpectrum::matern(3, dim))
            }
            Smoothness::Polyharmonic { m } => Some(KernelSpectrum::polyharmonic(m, dim)),
            _ => None,
        }
    }
}

impl fmt::Display for RadialKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id.as_str())
    }
}

impl From<KernelId> for RadialKernel {
    fn from(id: KernelId) -> Self {
        RadialKernel::new(id)
    }
}

// 2^(1-m)/Γ(m) r^(m-d/2) K_(m-d/2)(r) with m = 3, d = 2.
fn matern3(r: f64) -> f64 {
    if r == 0.0 {
        0.25
    } else if r > 740.0 {
        0.0
    } else {
        r * r * bessel::k2(r) / 8.0
    }
}

fn wendland_32(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        let s = 1.0 - r;
        let s2 = s * s;
        s2 * s2 * s2 * (35.0 * r * r + 18.0 * r + 3.0)
    }
}

fn thin_plate(r: f64, power: i32) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r.powi(power) * r.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumKind {
    /// `2^(-d/2) exp(-ρ²/4)`, the transform of `exp(-r²)`.
    Gaussian,
    /// `(1 + ρ²)^(-m)`.
    Matern { m: u32 },
    /// Generalized transform `ρ^(-2m)`.
    Polyharmonic { m: u32 },
}

/// Radial Fourier profile `Φ̂(ρ)` under `f̂(ω) = (2π)^(-d/2) ∫ f(x) e^(-i⟨x,ω⟩) dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpectrum {
    pub kind: SpectrumKind,
    pub dim: usize,
}

impl KernelSpectrum {
    pub fn gaussian(dim: usize) -> Self {
        KernelSpectrum { kind: SpectrumKind::Gaussian, dim }
    }

    /// Whittle–Matérn kernel of `W₂^m(ℝ^d)`.
    pub fn matern(m: u32, dim: usize) -> Self {
        KernelSpectrum { kind: SpectrumKind::Matern { m }, dim }
    }

    pub fn polyharmonic(m: u32, dim: usize) -> Self {
        KernelSpectrum { kind: SpectrumKind::Polyharmonic { m }, dim }
    }

    pub fn profile(&self, rho: f64) -> f64 {
        match self.kind {
            SpectrumKind::Gaussian => 2f64.powf(-(self.dim as f64) / 2.0) * (-0.25 * rho * rho).exp(),
            SpectrumKind::Matern { m } => (1.0 + rho * rho).powi(-(m as i32)),
            SpectrumKind::Polyharmonic { m } => rho.powi(-2 * m as i32),
        }
    }

    /// `ln Φ̂(ρ)`, finite wherever the profile is positive in exact arithmetic.
    pub fn ln_profile(&self, rho: f64) -> f64 {
        match self.kind {
            SpectrumKind::Gaussian => -(self.dim as f64) / 2.0 * std::f64::consts::LN_2 - 0.25 * rho * rho,
            SpectrumKind::Matern { m } => -f64::from(m) * (rho * rho).ln_1p(),
            SpectrumKind::Polyharmonic { m } => -2.0 * f64::from(m) * rho.ln(),
        }
    }

    /// `‖Φ̂‖_∞`; infinite for the polyharmonic generalized transform.
    pub fn sup(&self) -> f64 {
        match self.kind {
            SpectrumKind::Polyharmonic { .. } => f64::INFINITY,
            _ => self.profile(0.0),
        }
    }

    pub fn is_positive_definite(&self) -> bool {
        !matches!(self.kind, SpectrumKind::Polyharmonic { .. })
    }

    /// `Φ̂_ε(ρ) = ε^(-d) Φ̂(ρ/ε)`.
    pub fn scaled_profile(&self, eps: f64, rho: f64) -> f64 {
        self.scaled_ln_profile(eps, rho).exp()
    }

    pub fn scaled_ln_profile(&self, eps: f64, rho: f64) -> f64 {
        -(self.dim as f64) * eps.ln() + self.ln_profile(rho / eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_examples() {
        let g = RadialKernel::new(KernelId::Gaussian);
        assert_eq!(g.eval(0.0).unwrap(), 1.0);
        let w = RadialKernel::new(KernelId::Wendland);
        assert_eq!(w.eval(1.5).unwrap(), 0.0);
        let ms3 = RadialKernel::new(KernelId::Matern3);
        assert_eq!(ms3.eval(0.0).unwrap(), 0.25);
        let ph3 = RadialKernel::new(KernelId::Polyharmonic3);
        assert_eq!(ph3.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn matern_is_continuous_at_origin() {
        let ms3 = RadialKernel::new(KernelId::Matern3);
        // r² K₂(r)/8 = 1/4 - r²/16 + O(r⁴ log r)
        for r in [1e-8, 1e-6, 1e-4] {
            let v = ms3.value(r);
            assert!((v - (0.25 - r * r / 16.0)).abs() < 1e-12, "r={r} v={v}");
        }
    }

    #[test]
    fn scaled_examples() {
        let g = RadialKernel::new(KernelId::Gaussian).with_pre_scale(1.0);
        assert_eq!(g.eval_scaled(2.0, 1.0).unwrap(), (-4.0f64).exp());

        let ph3 = RadialKernel::new(KernelId::Polyharmonic3);
        let want = 16.0 * 2f64.ln();
        assert!((ph3.eval_scaled(7.0, 2.0).unwrap() - want).abs() < 1e-14);

        let w = RadialKernel::new(KernelId::Wendland);
        let s: f64 = 0.2;
        let direct = s.powi(6) * (35.0 * 0.64 + 18.0 * 0.8 + 3.0);
        assert!((w.eval_scaled(1.0, 4.0).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        let g = RadialKernel::new(KernelId::Gaussian);
        assert!(matches!(g.eval(-1.0), Err(Error::Domain(_))));
        assert!(matches!(g.eval(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(g.eval_scaled(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(g.eval_scaled(-2.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn compact_support_is_exact() {
        let w = RadialKernel::new(KernelId::Wendland);
        for i in 0..1000 {
            let r = 1.0 + 9.0 * i as f64 / 999.0;
            assert_eq!(w.value(r), 0.0);
        }
    }

    #[test]
    fn metadata() {
        assert_eq!(RadialKernel::new(KernelId::Matern3).beta(), Some(6.0));
        assert_eq!(RadialKernel::new(KernelId::Wendland).beta(), Some(7.0));
        for id in [KernelId::Matern3, KernelId::Wendland] {
            let k = RadialKernel::new(id);
            assert_eq!(k.beta().unwrap(), 2.0 * k.sobolev_m.unwrap());
        }
        assert_eq!(RadialKernel::new(KernelId::Polyharmonic3).tail_degree(), Some(2));
        assert_eq!(RadialKernel::new(KernelId::Polyharmonic4).tail_degree(), Some(3));
        assert_eq!(RadialKernel::new(KernelId::Gaussian).tail_degree(), None);
        let pre: Vec<f64> = [KernelId::Gaussian, KernelId::InverseMultiquadric, KernelId::Wendland, KernelId::Matern3]
            .iter()
            .map(|&id| RadialKernel::new(id).pre_scale)
            .collect();
        assert_eq!(pre, vec![10.0, 10.0, 0.2, 1.0]);
        for id in KernelId::ALL {
            let k = RadialKernel::new(id);
            if k.is_positive_definite() {
                assert!(k.value_at_zero() > 0.0);
            }
        }
    }

    #[test]
    fn ids_round_trip() {
        for id in KernelId::ALL {
            assert_eq!(id.as_str().parse::<KernelId>().unwrap(), id);
        }
        assert_eq!("bogus".parse::<KernelId>(), Err(Error::UnknownKernel("bogus".into())));
    }

    #[test]
    fn spectrum_examples() {
        let ms3 = RadialKernel::new(KernelId::Matern3).spectrum(2).unwrap();
        assert_eq!(ms3.profile(0.0), 1.0);
        assert_eq!(ms3.profile(1.0), 0.125);
        let ph3 = RadialKernel::new(KernelId::Polyharmonic3).spectrum(2).unwrap();
        assert_eq!(ph3.profile(2.0), 2f64.powi(-6));
        assert!(RadialKernel::new(KernelId::InverseMultiquadric).spectrum(2).is_none());
        assert!(RadialKernel::new(KernelId::Wendland).spectrum(2).is_none());
    }

    #[test]
    fn spectra_positive() {
        // exp(-ρ²/4) underflows beyond ρ ≈ 54, so positivity of the Gaussian
        // profile is checked on the log scale.
        let mut rho = 0.0;
        while rho <= 1e6 {
            let ms3 = KernelSpectrum::matern(3, 2);
            assert!(ms3.profile(rho) > 0.0);
            let g = KernelSpectrum::gaussian(2);
            assert!(g.ln_profile(rho).is_finite());
            assert!(g.profile(rho) >= 0.0);
            rho = if rho == 0.0 { 1e-3 } else { rho * 1.5 };
        }
        assert_eq!(KernelSpectrum::gaussian(2).profile(0.0), 0.5);
        assert!((KernelSpectrum::gaussian(2).ln_profile(3.0).exp() - KernelSpectrum::gaussian(2).profile(3.0)).abs() < 1e-16);
    }
}
