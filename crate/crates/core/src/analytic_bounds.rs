//! Closed-form upper bounds on the per-user rate gap (nats) of each
//! feedback scheme, and feedback-budget conversions.

use crate::channel_model::ChannelStats;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::quantizers::rvq::cluster_span;
use crate::quantizers::rwf::waterlevel_for_rate;
use crate::quantizers::BitAllocation;
use crate::zfbf_rates::perfect_csit_rate;

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const EIGEN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetKind {
    Analog,
    Rvq,
    Digital,
}

/// Normalized feedback budget `α_fb`: `α_fb M` feedback channel uses per
/// user per frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackBudget {
    pub alpha_fb: f64,
    pub m: usize,
    pub snr: f64,
    pub kind: BudgetKind,
}

impl FeedbackBudget {
    pub fn new(alpha_fb: f64, m: usize, snr: f64, kind: BudgetKind) -> Result<Self> {
        if !(alpha_fb >= 0.0 && alpha_fb.is_finite()) {
            return Err(Error::OutOfRange(format!("alpha_fb = {alpha_fb}")));
        }
        if m == 0 || !(snr > 0.0 && snr.is_finite()) {
            return Err(Error::OutOfRange("need M > 0 and positive SNR".into()));
        }
        Ok(Self {
            alpha_fb,
            m,
            snr,
            kind,
        })
    }

    /// Feedback channel uses per user per frame.
    pub fn channel_uses(&self) -> f64 {
        self.alpha_fb * self.m as f64
    }
}

/// Feedback bits per user carried error-free at capacity. RVQ budgets are
/// normalized by `M - 1` rather than `M`.
pub fn budget_to_bits(b: &FeedbackBudget) -> Result<f64> {
    let c = (1.0 + b.snr).log2();
    match b.kind {
        BudgetKind::Rvq => Ok(b.alpha_fb * (b.m as f64 - 1.0) * c),
        BudgetKind::Digital => Ok(b.alpha_fb * b.m as f64 * c),
        BudgetKind::Analog => Err(Error::Unsupported(
            "analog feedback is budgeted in channel uses, not bits".into(),
        )),
    }
}

/// `log(1 + (M-1)/M · snr · err)`: the gap for a per-subcarrier CSIT error
/// variance `err` independent of the estimate.
pub fn gap_from_error(snr: f64, m: usize, err: f64) -> f64 {
    ((m as f64 - 1.0) / m as f64 * snr * err).ln_1p()
}

/// Spectra entering the analog-feedback bound.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogSpectrum {
    /// Nonzero eigenvalues of Σ_h, decreasing.
    pub delta2: Vec<f64>,
    /// Nonzero eigenvalues of `α Σ_h α^H`, increasing, where `α` holds the
    /// sampled rows of the unitary DFT restricted to the first L columns.
    pub lambda: Vec<f64>,
}

impl AnalogSpectrum {
    pub fn new(stats: &ChannelStats, j: usize) -> Result<Self> {
        let n = stats.n_subcarriers();
        if j == 0 || !n.is_multiple_of(j) {
            return Err(Error::OutOfRange(format!(
                "J = {j} does not divide N = {n}"
            )));
        }
        let spacing = n / j;
        let t = stats.dft().matrix();
        let scale = 1.0 / (n as f64).sqrt();
        let alpha = CMatrix::from_fn(j, stats.n_taps(), |i, l| t[(i * spacing, l)] * scale);
        let cov = &alpha * stats.tap_covariance() * alpha.adjoint();
        let mut lambda = nonzero(hermitian_eigen(&cov).0);
        lambda.reverse();
        let delta2 = nonzero(stats.tap_eigenvalues());
        Ok(Self { delta2, lambda })
    }

    /// True when every direction of the tap covariance is observed.
    pub fn fully_observed(&self) -> bool {
        self.lambda.len() >= self.delta2.len()
    }
}

fn nonzero(decreasing: Vec<f64>) -> Vec<f64> {
    let max = decreasing.first().copied().unwrap_or(0.0);
    decreasing
        .into_iter()
        .filter(|&v| v > EIGEN_TOLERANCE * max)
        .collect()
}

/// Analog feedback gap bound. The `r - z` strongest tap-covariance
/// eigenvalues that are not observed enter unattenuated; the remaining
/// ones are paired in decreasing order with the observed eigenvalues in
/// increasing order.
pub fn bound_analog(stats: &ChannelStats, j: usize, beta: f64, snr: f64, m: usize) -> Result<f64> {
    let sp = AnalogSpectrum::new(stats, j)?;
    Ok(bound_analog_spectrum(
        &sp,
        stats.n_subcarriers(),
        beta,
        snr,
        m,
    ))
}

pub fn bound_analog_spectrum(sp: &AnalogSpectrum, n: usize, beta: f64, snr: f64, m: usize) -> f64 {
    let r = sp.delta2.len();
    let z = sp.lambda.len().min(r);
    let mut err: f64 = sp.delta2[..r - z].iter().sum();
    for (i, &d) in sp.delta2[r - z..].iter().enumerate() {
        err += d / (1.0 + n as f64 * beta * snr * sp.lambda[i]);
    }
    gap_from_error(snr, m, err)
}

/// High-SNR limit of the analog bound, `None` when the gap is unbounded.
pub fn analog_limit(stats: &ChannelStats, j: usize, beta: f64, m: usize) -> Result<Option<f64>> {
    let sp = AnalogSpectrum::new(stats, j)?;
    if !sp.fully_observed() {
        return Ok(None);
    }
    let n = stats.n_subcarriers() as f64;
    let sum: f64 = sp
        .delta2
        .iter()
        .zip(&sp.lambda)
        .map(|(d, l)| d / (beta * l))
        .sum();
    Ok(Some(((m as f64 - 1.0) / (m as f64 * n) * sum).ln_1p()))
}

/// Choice of cluster count and bandwidth expansion for an analog budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalogChoice {
    pub j: usize,
    pub beta: f64,
    pub gap: f64,
}

/// Splits `α_fb = β J` over the candidate `J` (each `≤ α_fb`, so `β ≥ 1`)
/// and keeps the split with the smallest bound. Ties go to the smaller J.
pub fn analog_budget_choice(
    stats: &ChannelStats,
    alpha_fb: f64,
    snr: f64,
    m: usize,
    j_grid: &[usize],
) -> Result<AnalogChoice> {
    let mut best: Option<AnalogChoice> = None;
    for &j in j_grid {
        if j as f64 > alpha_fb {
            continue;
        }
        let beta = alpha_fb / j as f64;
        let gap = bound_analog(stats, j, beta, snr, m)?;
        if best.is_none_or(|b| gap < b.gap) {
            best = Some(AnalogChoice { j, beta, gap });
        }
    }
    best.ok_or_else(|| {
        Error::OutOfRange(format!(
            "no cluster count J <= alpha_fb = {alpha_fb} in the grid"
        ))
    })
}

fn rvq_gap(stats: &ChannelStats, j: usize, snr: f64, m: usize, quant: f64) -> Result<f64> {
    let n = stats.n_subcarriers();
    if j == 0 || !n.is_multiple_of(j) {
        return Err(Error::OutOfRange(format!(
            "J = {j} does not divide N = {n}"
        )));
    }
    let (a, b) = cluster_span(n / j);
    let s2 = stats.sigma_h_total();
    let mf = m as f64;
    let sum: f64 = (-(a as i64)..=(b as i64))
        .map(|d| {
            let c2 = stats.freq_correlation(d).norm_sqr().min(1.0);
            (s2 * snr * (c2 * quant + (mf - 1.0) / mf * (1.0 - c2))).ln_1p()
        })
        .sum();
    Ok(j as f64 / n as f64 * sum)
}

/// RVQ gap bound with `bits` bits per fed-back subcarrier.
pub fn bound_rvq(stats: &ChannelStats, j: usize, bits: f64, snr: f64, m: usize) -> Result<f64> {
    if !(bits >= 0.0) {
        return Err(Error::OutOfRange(format!("bits = {bits}")));
    }
    rvq_gap(stats, j, snr, m, (-bits / (m as f64 - 1.0)).exp2())
}

/// RVQ gap bound with the budget `α_fb` spread over `J` subcarriers.
pub fn bound_rvq_alpha(
    stats: &ChannelStats,
    j: usize,
    alpha_fb: f64,
    snr: f64,
    m: usize,
) -> Result<f64> {
    rvq_gap(stats, j, snr, m, (1.0 + snr).powf(-alpha_fb / j as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RvqChoice {
    pub best_j: usize,
    pub gap: f64,
    pub per_j: Vec<(usize, f64)>,
}

/// Evaluates the budgeted RVQ bound on `j_grid` and keeps the minimizer
/// (ties to the smaller J).
pub fn bound_rvq_budget(
    stats: &ChannelStats,
    alpha_fb: f64,
    snr: f64,
    m: usize,
    j_grid: &[usize],
) -> Result<RvqChoice> {
    if j_grid.is_empty() {
        return Err(Error::OutOfRange("empty J grid".into()));
    }
    let per_j = j_grid
        .iter()
        .map(|&j| Ok((j, bound_rvq_alpha(stats, j, alpha_fb, snr, m)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut best = per_j[0];
    for &(j, g) in &per_j[1..] {
        if g < best.1 || (g == best.1 && j < best.0) {
            best = (j, g);
        }
    }
    Ok(RvqChoice {
        best_j: best.0,
        gap: best.1,
        per_j,
    })
}

/// Divisors of `n`, increasing.
pub fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// RVQ with every subcarrier fed back, before the high-SNR relaxation:
/// `log(1 + σ_H² snr (1+snr)^{-α_fb/N})`.
pub fn rvq_per_subcarrier_limit(sigma_h2: f64, alpha_fb: f64, snr: f64, n: usize) -> f64 {
    (sigma_h2 * snr * (1.0 + snr).powf(-alpha_fb / n as f64)).ln_1p()
}

/// High-SNR relaxation `log(1 + σ_H² snr^{1-α_fb/N})`.
pub fn rvq_per_subcarrier_relaxed(sigma_h2: f64, alpha_fb: f64, snr: f64, n: usize) -> f64 {
    (sigma_h2 * snr.powf(1.0 - alpha_fb / n as f64)).ln_1p()
}

/// Where a rate-distortion-limit distortion is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitDomain {
    /// Tap-domain distortion `E|h - ĥ|²`.
    TimeTaps,
    /// Distortion of the K-L coefficients of the frequency response, which
    /// carry `N` times the per-subcarrier error.
    KlOfSigmaH,
}

/// Gap of quantization at distortion `d`.
pub fn bound_tdq_limit(n: usize, d: f64, snr: f64, m: usize, domain: LimitDomain) -> f64 {
    match domain {
        LimitDomain::TimeTaps => gap_from_error(snr, m, d),
        LimitDomain::KlOfSigmaH => gap_from_error(snr, m, d / n as f64),
    }
}

/// High-SNR form from the total rate: `log(1 + σ_H² snr (M-1)/M 2^{-R/L})`.
pub fn tdq_highsnr_from_rate(
    sigma_h2: f64,
    rate_bits: f64,
    coeffs: usize,
    snr: f64,
    m: usize,
) -> f64 {
    gap_from_error(snr, m, sigma_h2 * (-rate_bits / coeffs as f64).exp2())
}

/// The same, before the arithmetic/geometric mean step: every coefficient
/// at distortion `γ = 2^{-R/L} (Π σ_l²)^{1/L}`. Valid while `γ` stays below
/// every variance.
pub fn tdq_highsnr_exact(vars: &[f64], rate_bits: f64, snr: f64, m: usize) -> f64 {
    let l = vars.len() as f64;
    let log_geo = vars.iter().map(|v| v.log2()).sum::<f64>() / l;
    let gamma = (log_geo - rate_bits / l).exp2();
    gap_from_error(snr, m, l * gamma)
}

/// High-SNR form from the budget: `log(1 + σ_H² (M-1)/M snr^{1-α_fb/L})`.
pub fn tdq_highsnr_from_budget(
    sigma_h2: f64,
    alpha_fb: f64,
    coeffs: usize,
    snr: f64,
    m: usize,
) -> f64 {
    let mf = m as f64;
    (sigma_h2 * (mf - 1.0) / mf * snr.powf(1.0 - alpha_fb / coeffs as f64)).ln_1p()
}

/// Rate-distortion-limit gap for `rate_bits` per antenna spread over
/// coefficients with the given variances and weights.
pub fn tdq_limit_gap_for_rate(
    vars: &[f64],
    weights: &[f64],
    rate_bits: f64,
    snr: f64,
    m: usize,
) -> Result<f64> {
    let eff: Vec<f64> = vars.iter().zip(weights).map(|(v, w)| v * w).collect();
    let gamma = waterlevel_for_rate(&eff, rate_bits)?;
    let d: f64 = eff.iter().map(|&v| v.min(gamma)).sum();
    Ok(gap_from_error(snr, m, d))
}

/// Scalar-quantizer gap `log(1 + (M-1)/M snr Σ w_l D_l)`.
pub fn bound_suq(alloc: &BitAllocation, snr: f64, m: usize) -> f64 {
    gap_from_error(snr, m, alloc.total_distortion())
}

/// High-rate scalar-quantizer approximation with constant `kappa`, and
/// its budget form.
pub fn suq_highrate(
    sigma_h2: f64,
    b_tot: f64,
    coeffs: usize,
    snr: f64,
    m: usize,
    kappa: f64,
) -> f64 {
    let per = b_tot / (coeffs * m) as f64;
    gap_from_error(snr, m, kappa * sigma_h2 * (-per).exp2() * per)
}

pub fn suq_highrate_budget(
    sigma_h2: f64,
    alpha_fb: f64,
    coeffs: usize,
    snr: f64,
    m: usize,
    kappa: f64,
) -> f64 {
    let mf = m as f64;
    let l = coeffs as f64;
    (kappa * alpha_fb * sigma_h2 / l * (mf - 1.0) / mf
        * snr.powf(1.0 - alpha_fb / l)
        * (1.0 + snr).log2())
    .ln_1p()
}

/// Sum-rate lower bound `K·max(0, R_CSIT - gap)` in nats.
pub fn sum_rate_lower(sigma_h2: f64, snr: f64, m: usize, k: usize, gap: f64) -> f64 {
    k as f64 * (perfect_csit_rate(snr, m, sigma_h2) - gap).max(0.0)
}

pub fn nats_to_bits(x: f64) -> f64 {
    x / std::f64::consts::LN_2
}
