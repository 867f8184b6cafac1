//! Scalar special functions.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E1(x) = ∫_1^∞ e^{-xt}/t dt` for `x > 0`.
pub fn expint_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 is defined here for x > 0");
    if x <= 1.0 {
        e1_series(x)
    } else {
        (-x).exp() * scaled_e1_fraction(x)
    }
}

/// `e^x E1(x)`, evaluated without overflow for large `x`.
pub fn exp_expint_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 is defined here for x > 0");
    if x <= 1.0 {
        x.exp() * e1_series(x)
    } else {
        scaled_e1_fraction(x)
    }
}

fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -x / k as f64;
        let t = term / k as f64;
        sum += t;
        if t.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

// Modified Lentz evaluation of the continued fraction for e^x E1(x).
fn scaled_e1_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal upper tail `P(Z > x)`.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Composite Simpson on t = 1/u substitution: ∫_0^1 e^{-x/u}/u du.
    fn e1_quadrature(x: f64) -> f64 {
        let n = 200_000;
        let h = 1.0 / n as f64;
        let f = |u: f64| if u <= 0.0 { 0.0 } else { (-x / u).exp() / u };
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn e1_matches_quadrature() {
        for &x in &[0.05, 0.4, 1.0, 1.7, 5.0, 12.0] {
            let q = e1_quadrature(x);
            let e = expint_e1(x);
            assert!((e - q).abs() < 1e-9 * q.max(1e-12), "x={x}: {e} vs {q}");
        }
    }

    #[test]
    fn branches_agree_at_switch() {
        let lo = expint_e1(1.0);
        let hi = (-1.0f64).exp() * scaled_e1_fraction(1.0);
        assert!((lo - hi).abs() < 1e-14);
    }

    #[test]
    fn scaled_e1_large_argument() {
        // e^x E1(x) ~ 1/x (1 - 1/x + 2/x^2 - ...)
        let x = 1e6;
        let v = exp_expint_e1(x);
        assert!((v * x - (1.0 - 1.0 / x + 2.0 / (x * x))).abs() < 1e-12);
    }

    #[test]
    fn normal_tail_values() {
        assert!((normal_tail(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_tail(1.959_963_984_540_054) - 0.025).abs() < 1e-12);
        assert!(normal_tail(40.0) < 1e-300);
    }
}
