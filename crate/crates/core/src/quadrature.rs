//! Adaptive Gauss–Kronrod quadrature on intervals and on the half line.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 4000;

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

/// `∫_a^b f` to within `max(abs_tol, rel_tol · |result|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (value, error) = kronrod15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;

    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if !total.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
        }
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}]: estimate {total:e}, error {total_err:e}"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = kronrod15(&f, worst.a, mid);
        let (v2, e2) = kronrod15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
    if !total.is_finite() {
        return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
    }
    // Re-sum to shed accumulated update round-off.
    Ok(heap.iter().map(|s| s.value).sum())
}

const FIRST_PANEL: f64 = 1e-3;
const MAX_RADIUS: f64 = 1e8;
const TAIL_TOL: f64 = 1e-13;

/// `∫_0^∞ f(ρ) dρ` (or `∫_0^B` when `cutoff` is given) over geometrically
/// growing panels `[0, 10⁻³], [10⁻³, 2·10⁻³], …`.
///
/// Panels stop once a panel contributes less than `10⁻¹³` of the running
/// total while shrinking, past `ρ = 1`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, cutoff: Option<f64>, rel_tol: f64) -> Result<f64> {
    let mut total = 0.0f64;
    let mut lo = 0.0;
    let mut hi = FIRST_PANEL;
    let mut prev_piece = f64::INFINITY;
    loop {
        let end = cutoff.map_or(hi, |b| hi.min(b));
        // Absolute tolerance relative to what has been accumulated so far.
        let abs_tol = 1e-3 * rel_tol * total.abs();
        let piece = integrate(&f, lo, end, abs_tol, rel_tol)?;
        total += piece;
        if cutoff.is_some_and(|b| end >= b) {
            return Ok(total);
        }
        if lo >= 1.0 && piece.abs() <= TAIL_TOL * total.abs() && piece.abs() <= prev_piece.abs() {
            return Ok(total);
        }
        if hi > MAX_RADIUS {
            return Err(Error::Quadrature(format!("tail not negligible at radius {hi:e}")));
        }
        prev_piece = piece;
        lo = hi;
        hi *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 0.0, 1e-14).unwrap();
        assert!((v - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn half_line_gaussian_and_algebraic() {
        let g = integrate_half_line(|x| (-x * x).exp(), None, 1e-12).unwrap();
        assert!((g - PI.sqrt() / 2.0).abs() < 1e-12);
        // ∫ ρ (1+ρ²)^-3 dρ = 1/4
        let m = integrate_half_line(|x| x * (1.0 + x * x).powi(-3), None, 1e-12).unwrap();
        assert!((m - 0.25).abs() < 1e-11, "{m}");
        // narrow peak near the origin
        let narrow = integrate_half_line(|x| (-(x / 1e-3).powi(2)).exp(), None, 1e-12).unwrap();
        assert!((narrow - 1e-3 * PI.sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn cutoff() {
        let v = integrate_half_line(|x| x, Some(3.0), 1e-12).unwrap();
        assert!((v - 4.5).abs() < 1e-12);
    }

    #[test]
    fn divergent_tail_errors() {
        assert!(integrate_half_line(|x| 1.0 / (1.0 + x), None, 1e-10).is_err());
    }
}
