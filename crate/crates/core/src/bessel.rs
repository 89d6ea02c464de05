//! Modified Bessel functions of the second kind of integer order 0, 1, 2.
//!
//! Power series for `x <= 2`, Steed's continued fraction (Thompson–Barnett
//! form) above. `K_2` comes from the upward recurrence
//! `K_2(x) = K_0(x) + (2/x) K_1(x)`.

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;
const MAX_TERMS: usize = 500;

/// `(K_0(x), K_1(x))` for `x > 0`.
pub fn k0_k1(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    if x <= SERIES_LIMIT {
        series(x)
    } else {
        continued_fraction(x)
    }
}

pub fn k0(x: f64) -> f64 {
    k0_k1(x).0
}

pub fn k1(x: f64) -> f64 {
    k0_k1(x).1
}

pub fn k2(x: f64) -> f64 {
    let (k0, k1) = k0_k1(x);
    k0 + 2.0 * k1 / x
}

fn series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let log_half = (0.5 * x).ln();

    // I_0, I_1 and the digamma-weighted sums share the same power terms.
    let mut term0 = 1.0; // q^k / (k!)^2
    let mut term1 = 1.0; // q^k / (k! (k+1)!)
    let mut harmonic = 0.0; // H_k
    let mut psi_k1 = -EULER_GAMMA; // psi(k + 1)
    let mut psi_k2 = 1.0 - EULER_GAMMA; // psi(k + 2)

    let mut i0 = 1.0;
    let mut i1_over = 1.0; // I_1(x) / (x/2)
    let mut sum0 = 0.0;
    let mut sum1 = psi_k1 + psi_k2;

    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term0 *= q / (kf * kf);
        term1 *= q / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        psi_k1 += 1.0 / kf;
        psi_k2 += 1.0 / (kf + 1.0);

        i0 += term0;
        i1_over += term1;
        sum0 += term0 * harmonic;
        let d1 = term1 * (psi_k1 + psi_k2);
        sum1 += d1;
        if term0 < 1e-17 * i0 && d1.abs() < 1e-17 * sum1.abs() {
            break;
        }
    }

    let k0 = -(log_half + EULER_GAMMA) * i0 + sum0;
    let i1 = 0.5 * x * i1_over;
    let k1 = 1.0 / x + log_half * i1 - 0.25 * x * sum1;
    (k0, k1)
}

fn continued_fraction(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;

    for i in 1..MAX_TERMS {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;

    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt, trapezoid rule.
    /// The integrand is analytic and decays double-exponentially, so the
    /// trapezoid rule converges geometrically in the step size.
    fn k_integral(nu: f64, x: f64) -> f64 {
        let h: f64 = 1.0 / 256.0;
        let mut sum = 0.5 * (-x).exp();
        let mut t: f64 = h;
        loop {
            let v = (-x * t.cosh()).exp() * (nu * t).cosh();
            sum += v;
            if x * t.cosh() > 800.0 {
                break;
            }
            t += h;
        }
        sum * h
    }

    #[test]
    fn matches_integral_representation() {
        let xs = [1e-8, 1e-4, 0.01, 0.3, 1.0, 1.9, 2.0, 2.1, 3.5, 7.0, 15.0, 30.0, 50.0];
        for &x in &xs {
            for (nu, got) in [(0.0, k0(x)), (1.0, k1(x)), (2.0, k2(x))] {
                let want = k_integral(nu, x);
                let rel = (got - want).abs() / want;
                assert!(rel < 1e-12, "K_{nu}({x}): got {got:e} want {want:e} rel {rel:e}");
            }
        }
    }

    #[test]
    fn known_values() {
        // A&S table 9.8 values
        assert!((k0(1.0) - 0.421_024_438_240_708_3).abs() < 1e-15);
        assert!((k1(1.0) - 0.601_907_230_197_234_6).abs() < 1e-15);
        assert!((k2(1.0) - 1.624_838_898_635_177_4).abs() < 1e-14);
    }

    #[test]
    fn continuity_at_switch() {
        let below = k0_k1(SERIES_LIMIT);
        let above = k0_k1(SERIES_LIMIT * (1.0 + 1e-15));
        assert!((below.0 - above.0).abs() < 1e-14 * below.0);
        assert!((below.1 - above.1).abs() < 1e-14 * below.1);
    }
}
