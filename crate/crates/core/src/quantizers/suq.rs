//! Scalar uniform quantization of complex Gaussian coefficients.
//!
//! With `B` bits a coefficient gets `Q = 2^{⌊B/2⌋}` levels on each of its
//! real and imaginary parts: thresholds at `0, ±Δ, ±2Δ, …` and midpoint
//! reconstruction `±Δ/2, ±3Δ/2, …, ±(Q-1)Δ/2`. The step is chosen to
//! minimize the mean-square error for a Gaussian input.

use super::BitAllocation;
use crate::error::{Error, Result};
use crate::special::{normal_pdf, normal_tail};
use num_complex::Complex64;
use std::f64::consts::{LOG2_E, SQRT_2};
use std::sync::OnceLock;

/// Largest supported bit count per coefficient.
pub const MAX_SUQ_BITS: u32 = 32;

/// Cells beyond this many standard deviations carry negligible mass.
const CELL_CUTOFF: f64 = 12.0;

const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Scalar quantizer for one coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuqDesign {
    pub bits: u32,
    /// Levels per real dimension (0 when no bits are spent).
    pub levels: u64,
    /// Step size Δ (0 when no bits are spent or the variance is 0).
    pub step: f64,
    /// Complex mean-square error `D = E|x - Q(x)|²`.
    pub distortion: f64,
}

/// Levels per real dimension for `bits` bits.
pub fn levels_for_bits(bits: u32) -> u64 {
    if bits == 0 {
        0
    } else {
        1u64 << (bits / 2)
    }
}

/// `∫_a^∞ (u - c)² φ(u) du`.
fn overload_moment(a: f64, c: f64) -> f64 {
    if a > 38.0 {
        return 0.0;
    }
    let pa = normal_pdf(a);
    (normal_tail(a) * (1.0 + c * c) + a * pa - 2.0 * c * pa).max(0.0)
}

/// `∫_a^{a+w} (u - c)² φ(u) du` by 8-point Gauss-Legendre.
fn cell_moment(a: f64, w: f64, c: f64) -> f64 {
    let mid = a + 0.5 * w;
    let half = 0.5 * w;
    let mut acc = 0.0;
    for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
        for u in [mid - half * x, mid + half * x] {
            acc += wt * (u - c).powi(2) * normal_pdf(u);
        }
    }
    acc * half
}

/// Mean-square error of the `q`-level midpoint quantizer with step `x`
/// applied to a standard normal variable.
pub fn unit_real_distortion(q: u64, x: f64) -> f64 {
    assert!(q >= 2 && q.is_multiple_of(2) && x > 0.0);
    let half = q / 2;
    let mut acc = 0.0;
    let mut i = 0u64;
    while i + 1 < half {
        let a = i as f64 * x;
        if a > CELL_CUTOFF {
            return 2.0 * acc;
        }
        acc += cell_moment(a, x, a + 0.5 * x);
        i += 1;
    }
    let a = (half - 1) as f64 * x;
    acc += overload_moment(a, a + 0.5 * x);
    2.0 * acc
}

#[derive(Debug, Clone, Copy)]
struct UnitDesign {
    levels: u64,
    // Step and per-real-dimension distortion for a unit-variance real input.
    x: f64,
    d: f64,
}

fn search_unit(bits: u32) -> UnitDesign {
    let q = levels_for_bits(bits);
    let f = |x: f64| unit_real_distortion(q, x);
    let x_asym = (8.0 * bits as f64 / LOG2_E).sqrt() * (-(bits as f64) / 2.0).exp2();
    let lo = (x_asym / 16.0).ln();
    let hi = (10.0 * SQRT_2).ln();
    const GRID: usize = 48;
    let grid: Vec<f64> = (0..GRID)
        .map(|i| (lo + (hi - lo) * i as f64 / (GRID - 1) as f64).exp())
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let best = (0..GRID)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .unwrap();
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(GRID - 1)];
    // Golden-section search on the bracketing grid cells.
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 * b {
        if fc < fd {
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
    let x = 0.5 * (a + b);
    UnitDesign {
        levels: q,
        x,
        d: f(x),
    }
}

fn unit_design(bits: u32) -> UnitDesign {
    static CACHE: [OnceLock<UnitDesign>; MAX_SUQ_BITS as usize + 1] =
        [const { OnceLock::new() }; MAX_SUQ_BITS as usize + 1];
    // Odd bit counts use the same levels as the even count below them.
    let even = bits - bits % 2;
    *CACHE[even as usize].get_or_init(|| search_unit(even))
}

fn check_bits(bits: u32) -> Result<()> {
    if bits == 1 {
        return Err(Error::OutOfRange(
            "one bit cannot be split over real and imaginary parts".into(),
        ));
    }
    if bits > MAX_SUQ_BITS {
        return Err(Error::ResourceCap {
            what: "scalar quantizer bits",
            requested: bits as u64,
            cap: MAX_SUQ_BITS as u64,
        });
    }
    Ok(())
}

/// MSE-optimal step for a `CN(0, sigma2)` coefficient quantized with `bits`.
pub fn design_suq(sigma2: f64, bits: u32) -> Result<SuqDesign> {
    check_bits(bits)?;
    if !(sigma2.is_finite() && sigma2 >= 0.0) {
        return Err(Error::OutOfRange(format!("variance {sigma2}")));
    }
    if bits == 0 || sigma2 == 0.0 {
        return Ok(SuqDesign {
            bits,
            levels: levels_for_bits(bits),
            step: 0.0,
            distortion: sigma2,
        });
    }
    let u = unit_design(bits);
    let s = (0.5 * sigma2).sqrt();
    Ok(SuqDesign {
        bits,
        levels: u.levels,
        step: u.x * s,
        distortion: sigma2 * u.d,
    })
}

/// Step size from the high-rate rule `Δ = √(4Bσ²/log2 e)·2^{-B/2}`.
pub fn asymptotic_step(sigma2: f64, bits: u32) -> f64 {
    (4.0 * bits as f64 * sigma2 / LOG2_E).sqrt() * (-(bits as f64) / 2.0).exp2()
}

/// Complex mean-square error of the `bits`-bit quantizer with an arbitrary
/// step, for a `CN(0, sigma2)` input.
pub fn suq_distortion(sigma2: f64, bits: u32, step: f64) -> Result<f64> {
    check_bits(bits)?;
    if bits == 0 || sigma2 == 0.0 {
        return Ok(sigma2);
    }
    if !(step > 0.0) {
        return Err(Error::OutOfRange(format!("step {step} must be positive")));
    }
    let s = (0.5 * sigma2).sqrt();
    Ok(sigma2 * unit_real_distortion(levels_for_bits(bits), step / s))
}

fn quantize_real(x: f64, step: f64, levels: u64) -> f64 {
    let top = (levels / 2 - 1) as f64;
    let idx = (x.abs() / step).floor().min(top);
    x.signum() * (idx + 0.5) * step
}

/// Midpoint reconstruction of the real and imaginary parts of `value`,
/// saturating at `±(Q-1)Δ/2`. Zero levels or a zero step reconstruct 0.
pub fn suq_quantize(value: Complex64, step: f64, levels: u64) -> Complex64 {
    if levels < 2 || step == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(
        quantize_real(value.re, step, levels),
        quantize_real(value.im, step, levels),
    )
}

/// Scalar quantizers for the given integer bit counts.
pub fn suq_allocation(vars: &[f64], weights: &[f64], bits: &[u32]) -> Result<BitAllocation> {
    if vars.len() != bits.len() || weights.len() != bits.len() {
        return Err(Error::Dimension(
            "allocation vectors differ in length".into(),
        ));
    }
    let designs = vars
        .iter()
        .zip(bits)
        .map(|(&v, &b)| design_suq(v, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(BitAllocation {
        variances: vars.to_vec(),
        weights: weights.to_vec(),
        bits: bits.iter().map(|&b| b as f64).collect(),
        waterlevel: None,
        steps: Some(designs.iter().map(|d| d.step).collect()),
        levels: Some(designs.iter().map(|d| d.levels).collect()),
        distortions: designs.iter().map(|d| d.distortion).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Simpson quadrature of the distortion integral over a wide window.
    fn distortion_oracle(q: u64, x: f64) -> f64 {
        let n = 200_000;
        let (lo, hi) = (-14.0, 14.0);
        let h = (hi - lo) / n as f64;
        let g = |u: f64| {
            let top = (q / 2 - 1) as f64;
            let idx = (u.abs() / x).floor().min(top);
            let r = u.signum() * (idx + 0.5) * x;
            (u - r).powi(2) * normal_pdf(u)
        };
        // Integrand has kinks at the thresholds; fine steps keep the error small.
        let mut acc = g(lo) + g(hi);
        for i in 1..n {
            let u = lo + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(u);
        }
        acc * h / 3.0
    }

    #[test]
    fn one_bit_per_dimension_optimum() {
        let d = design_suq(1.0, 2).unwrap();
        assert_eq!(d.levels, 2);
        assert!((d.step - 2.0 / PI.sqrt()).abs() < 1e-6, "{}", d.step);
        assert!(
            (d.distortion - 2.0 * (0.5 - 1.0 / PI)).abs() < 1e-8,
            "{}",
            d.distortion
        );
    }

    #[test]
    fn zero_bits_and_rejections() {
        let d = design_suq(0.7, 0).unwrap();
        assert_eq!(d.distortion, 0.7);
        assert!(design_suq(1.0, 1).is_err());
        assert!(matches!(
            design_suq(1.0, 33),
            Err(Error::ResourceCap { .. })
        ));
        assert_eq!(design_suq(0.0, 6).unwrap().distortion, 0.0);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for (q, x) in [(2, 1.2), (4, 0.9), (8, 0.6), (16, 0.33), (64, 0.1)] {
            let a = unit_real_distortion(q, x);
            let b = distortion_oracle(q, x);
            assert!(
                (a - b).abs() < 1e-7 * b.max(1e-6),
                "q={q} x={x}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn step_beats_grid() {
        for bits in [4, 6, 8] {
            let d = design_suq(1.0, bits).unwrap();
            for i in 1..400 {
                let step = 0.005 * i as f64;
                assert!(d.distortion <= suq_distortion(1.0, bits, step).unwrap() + 1e-14);
            }
        }
    }

    #[test]
    fn scales_with_variance() {
        let a = design_suq(1.0, 6).unwrap();
        let b = design_suq(4.0, 6).unwrap();
        assert!((b.step - 2.0 * a.step).abs() < 1e-12);
        assert!((b.distortion - 4.0 * a.distortion).abs() < 1e-12);
    }

    #[test]
    fn distortion_decreases_with_bits() {
        let mut prev = 1.0;
        for bits in (2..=MAX_SUQ_BITS).step_by(2) {
            let d = design_suq(1.0, bits).unwrap().distortion;
            assert!(d < prev, "bits {bits}");
            prev = d;
        }
    }

    #[test]
    fn odd_bits_reuse_even_levels() {
        let a = design_suq(1.0, 6).unwrap();
        let b = design_suq(1.0, 7).unwrap();
        assert_eq!(a.levels, b.levels);
        assert_eq!(a.distortion, b.distortion);
    }

    #[test]
    fn quantize_examples() {
        let v = suq_quantize(Complex64::new(0.4, 0.4), 1.0, 2);
        assert_eq!(v, Complex64::new(0.5, 0.5));
        assert_eq!(suq_quantize(Complex64::new(100.0, 0.0), 1.0, 4).re, 1.5);
        assert_eq!(
            suq_quantize(Complex64::new(-0.2, 2.2), 1.0, 8),
            Complex64::new(-0.5, 2.5)
        );
        assert_eq!(
            suq_quantize(Complex64::new(3.0, 1.0), 0.0, 4),
            Complex64::new(0.0, 0.0)
        );
    }
}
