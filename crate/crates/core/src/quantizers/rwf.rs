//! Reverse waterfilling over independent complex Gaussian coefficients.
//!
//! Coefficient `l` with variance `σ_l²` is reproduced with distortion
//! `min(γ, σ_l²)` at a rate of `[log2(σ_l²/γ)]_+` bits. The water level is
//! located exactly by scanning the breakpoints of the piecewise-linear
//! (resp. piecewise-logarithmic) constraint.

use super::BitAllocation;
use crate::error::{Error, Result};

fn check_variances(vars: &[f64]) -> Result<()> {
    if vars.is_empty() {
        return Err(Error::OutOfRange("no coefficients".into()));
    }
    if vars.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::OutOfRange(
            "variances must be finite and >= 0".into(),
        ));
    }
    Ok(())
}

fn allocation(vars: &[f64], weights: Vec<f64>, gamma: f64) -> BitAllocation {
    let distortions: Vec<f64> = vars.iter().map(|&v| v.min(gamma)).collect();
    let bits = vars
        .iter()
        .map(|&v| if v > gamma { (v / gamma).log2() } else { 0.0 })
        .collect();
    BitAllocation {
        variances: vars.to_vec(),
        weights,
        bits,
        waterlevel: Some(gamma),
        steps: None,
        levels: None,
        distortions,
    }
}

/// Solves `Σ min(γ, σ_l²) = d` for the water level γ.
pub fn waterlevel_for_distortion(vars: &[f64], d: f64) -> Result<f64> {
    check_variances(vars)?;
    let total: f64 = vars.iter().sum();
    if !(d > 0.0 && d <= total * (1.0 + 1e-12)) {
        return Err(Error::OutOfRange(format!(
            "distortion {d} outside (0, {total}]"
        )));
    }
    let mut sorted: Vec<f64> = vars.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // With the k smallest variances fully absorbed, γ = (d - Σ_{i<k} σ_i²)/(n-k).
    let mut below = 0.0;
    for k in 0..n {
        let gamma = (d - below) / (n - k) as f64;
        if gamma <= sorted[k] {
            return Ok(gamma);
        }
        below += sorted[k];
    }
    Ok(sorted[n - 1])
}

/// Solves `Σ [log2(σ_l²/γ)]_+ = r` for the water level γ.
pub fn waterlevel_for_rate(vars: &[f64], r: f64) -> Result<f64> {
    check_variances(vars)?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "rate {r} must be finite and >= 0"
        )));
    }
    let mut sorted: Vec<f64> = vars.iter().copied().filter(|&v| v > 0.0).collect();
    if sorted.is_empty() {
        return Err(Error::OutOfRange("all variances are zero".into()));
    }
    sorted.sort_by(|a, b| b.total_cmp(a));
    if r == 0.0 {
        return Ok(sorted[0]);
    }
    // With the k largest variances active, log2 γ = (Σ_{i<k} log2 σ_i² - r)/k.
    let mut log_sum = 0.0;
    for k in 1..=sorted.len() {
        log_sum += sorted[k - 1].log2();
        let gamma = ((log_sum - r) / k as f64).exp2();
        let next = sorted.get(k).copied().unwrap_or(0.0);
        if gamma >= next {
            return Ok(gamma);
        }
    }
    unreachable!("the last segment always satisfies the breakpoint test")
}

/// Rate needed to reach total distortion `d`.
pub fn rwf_by_distortion(vars: &[f64], d: f64) -> Result<BitAllocation> {
    let gamma = waterlevel_for_distortion(vars, d)?;
    Ok(allocation(vars, vec![1.0; vars.len()], gamma))
}

/// Minimum total distortion at total rate `r` bits.
pub fn rwf_by_rate(vars: &[f64], r: f64) -> Result<BitAllocation> {
    let gamma = waterlevel_for_rate(vars, r)?;
    Ok(allocation(vars, vec![1.0; vars.len()], gamma))
}

/// Minimizes `Σ w_l D_l` at total rate `r` by waterfilling over the
/// effective variances `w_l σ_l²`.
pub fn weighted_rwf_by_rate(vars: &[f64], weights: &[f64], r: f64) -> Result<BitAllocation> {
    if weights.len() != vars.len() {
        return Err(Error::Dimension(
            "weights and variances differ in length".into(),
        ));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::OutOfRange("weights must be positive".into()));
    }
    let eff: Vec<f64> = vars.iter().zip(weights).map(|(v, w)| v * w).collect();
    let gamma = waterlevel_for_rate(&eff, r)?;
    let mut out = allocation(&eff, weights.to_vec(), gamma);
    for (d, w) in out.distortions.iter_mut().zip(weights) {
        *d /= w;
    }
    out.variances = vars.to_vec();
    Ok(out)
}

/// Real bits rounded to even integers summing to at most `budget`:
/// floor to even, then hand out the leftover pairs by largest remainder
/// (lowest index first on ties).
pub fn round_to_even_bits(bits: &[f64], budget: u32) -> Vec<u32> {
    let mut out: Vec<u32> = bits
        .iter()
        .map(|&b| 2 * ((b.max(0.0) / 2.0).floor() as u32))
        .collect();
    let mut used: u32 = out.iter().sum();
    while used > budget {
        // Only reachable through roundoff in `bits`; trim the largest.
        let i = (0..out.len())
            .max_by_key(|&i| (out[i], usize::MAX - i))
            .unwrap();
        out[i] -= 2;
        used -= 2;
    }
    let mut order: Vec<usize> = (0..bits.len()).filter(|&i| bits[i] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let ra = bits[a] - out[a] as f64;
        let rb = bits[b] - out[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for i in order {
        if used + 2 > budget {
            break;
        }
        out[i] += 2;
        used += 2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIP: [f64; 5] = [0.5, 0.24, 0.17, 0.06, 0.03];

    fn gamma_oracle(vars: &[f64], d: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, vars.iter().cloned().fold(0.0, f64::max));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if vars.iter().map(|v| v.min(mid)).sum::<f64>() < d {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn zero_rate_point() {
        let a = rwf_by_distortion(&DIP, 1.0).unwrap();
        assert!(a.total_bits().abs() < 1e-12);
        assert!((a.waterlevel.unwrap() - 0.5).abs() < 1e-12);
        let b = rwf_by_rate(&DIP, 0.0).unwrap();
        assert!((b.total_distortion() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn small_distortion_all_active() {
        let a = rwf_by_distortion(&DIP, 0.05).unwrap();
        assert!((a.waterlevel.unwrap() - 0.01).abs() < 1e-15);
        let r = 50f64.log2() + 24f64.log2() + 17f64.log2() + 6f64.log2() + 3f64.log2();
        assert!((a.total_bits() - r).abs() < 1e-12);
        assert!((r - 18.486).abs() < 1e-3);
        let back = rwf_by_rate(&DIP, r).unwrap();
        assert!((back.total_distortion() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn partial_activity_matches_bisection() {
        let a = rwf_by_distortion(&DIP, 0.9).unwrap();
        let g = a.waterlevel.unwrap();
        // Only the strongest tap sits above the water level.
        assert!((g - 0.4).abs() < 1e-12, "{g}");
        assert!((g - gamma_oracle(&DIP, 0.9)).abs() < 1e-12);
        let sum: f64 = DIP.iter().map(|v| v.min(g)).sum();
        assert!((sum - 0.9).abs() < 1e-12);
        for (b, v) in a.bits.iter().zip(DIP) {
            assert_eq!(*b > 0.0, v > g);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(rwf_by_distortion(&DIP, 0.0).is_err());
        assert!(rwf_by_distortion(&DIP, 1.1).is_err());
        assert!(rwf_by_rate(&DIP, -1.0).is_err());
        assert!(rwf_by_rate(&[0.0, 0.0], 3.0).is_err());
    }

    #[test]
    fn zero_variance_coefficients_ignored() {
        let v = [1.0, 0.0, 0.25];
        let a = rwf_by_rate(&v, 4.0).unwrap();
        assert_eq!(a.bits[1], 0.0);
        assert_eq!(a.distortions[1], 0.0);
        assert!((a.total_bits() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_matches_scaled_problem() {
        let v = [1.0, 0.3162 * 1.0, 0.1585];
        let w = [1.0, 0.5, 1.0];
        let a = weighted_rwf_by_rate(&v, &w, 10.0).unwrap();
        assert!((a.total_bits() - 10.0).abs() < 1e-12);
        let g = a.waterlevel.unwrap();
        for i in 0..3 {
            assert!((w[i] * a.distortions[i] - (w[i] * v[i]).min(g)).abs() < 1e-15);
            assert!(a.distortions[i] <= v[i]);
        }
    }

    #[test]
    fn even_rounding() {
        assert_eq!(round_to_even_bits(&[5.9, 3.1, 1.0], 10), vec![6, 4, 0]);
        assert_eq!(round_to_even_bits(&[5.9, 3.1, 1.0], 9), vec![6, 2, 0]);
        assert_eq!(round_to_even_bits(&[0.0, 0.0], 4), vec![0, 0]);
        let r = round_to_even_bits(&[7.3, 7.3, 7.3], 22);
        assert_eq!(r.iter().sum::<u32>(), 22);
        assert!(r.iter().all(|b| b % 2 == 0));
    }
}
