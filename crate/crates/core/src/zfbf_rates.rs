//! Zero-forcing beamforming from imperfect CSIT and Monte Carlo estimation
//! of the resulting rate gap.
//!
//! The base station serves `K = M` single-antenna users with uniform power
//! `P/M` per stream. With unit noise variance, `snr = P`. For beams `v̂_j`
//! built from the CSIT, user `k` sees the couplings `a_{k,j} = H_k^H v̂_j`
//! of its true channel.

use crate::channel_model::{ChannelRealization, ChannelStats, FreqResponse};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::rng::{substream, SimRng};
use crate::special::exp_expint_e1;
use log::{debug, warn};
use num_complex::Complex64;
use rayon::prelude::*;

/// Ratio of extreme singular values beyond which a subcarrier's CSIT is
/// treated as rank deficient.
pub const ZF_CONDITION_LIMIT: f64 = 1e12;

/// Per-user ergodic rate (nats) with perfect CSIT, `e^x E1(x)` with
/// `x = M/(snr σ_H²)`.
pub fn perfect_csit_rate(snr: f64, m: usize, sigma_h2: f64) -> f64 {
    if snr <= 0.0 {
        return 0.0;
    }
    exp_expint_e1(m as f64 / (snr * sigma_h2))
}

/// Unit-norm zero-forcing beams for `K` CSIT row vectors stacked in the
/// K×M matrix `a` (row `k` is `Ĥ_k^H`). Column `k` of the result is
/// orthogonal to every `Ĥ_j`, `j ≠ k`. Returns `None` when the CSIT is
/// rank deficient.
pub fn zf_beams(a: &CMatrix) -> Option<CMatrix> {
    let (k, m) = a.shape();
    if k > m || k == 0 {
        return None;
    }
    let svd = a.clone().svd(true, true);
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin > 0.0) || smax / smin > ZF_CONDITION_LIMIT {
        return None;
    }
    let u = svd.u.as_ref()?;
    let vt = svd.v_t.as_ref()?;
    // Pseudoinverse V Σ^{-1} U^H, M×K.
    let mut pinv = vt.adjoint();
    for (c, &sv) in s.iter().enumerate() {
        pinv.column_mut(c).scale_mut(1.0 / sv);
    }
    let mut v = pinv * u.adjoint();
    for mut col in v.column_iter_mut() {
        let n = col.norm();
        col.scale_mut(1.0 / n);
    }
    Some(v)
}

/// Beams for every subcarrier of a CSIT set.
#[derive(Debug, Clone)]
pub struct BeamformerSet {
    beams: Vec<Option<CMatrix>>,
}

impl BeamformerSet {
    pub fn new(csit: &FreqResponse) -> Self {
        let (k, m) = (csit.users(), csit.antennas());
        let beams = (0..csit.subcarriers())
            .map(|n| zf_beams(&csit_rows(csit, n, k, m)))
            .collect();
        Self { beams }
    }

    pub fn subcarriers(&self) -> usize {
        self.beams.len()
    }

    /// M×K beam matrix on subcarrier `n`, `None` if degenerate.
    pub fn beams(&self, n: usize) -> Option<&CMatrix> {
        self.beams[n].as_ref()
    }

    pub fn degenerate_count(&self) -> usize {
        self.beams.iter().filter(|b| b.is_none()).count()
    }
}

fn csit_rows(csit: &FreqResponse, n: usize, k: usize, m: usize) -> CMatrix {
    CMatrix::from_fn(k, m, |r, c| csit.response(r, c)[n].conj())
}

/// Produces the transmitter's channel knowledge from a realization.
pub trait CsitSource: Sync {
    /// Per-user CSIT vectors `Ĥ_k[n]`, drawing any feedback randomness from
    /// `rng`.
    fn csit(&self, real: &ChannelRealization, rng: &mut SimRng) -> Result<FreqResponse>;
}

/// Monte Carlo estimates for one SNR, in nats per user per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub snr: f64,
    /// `csit_rate - gap`, averaged over users.
    pub lower_nats: f64,
    pub genie_upper_nats: f64,
    pub genie_stderr: f64,
    pub csit_rate_nats: f64,
    /// `(1/N) Σ_n log(1 + Î_n)` averaged over users, `Î_n` the estimated
    /// interference power on subcarrier `n`.
    pub gap_nats: f64,
    /// Standard error of `gap_nats` (and of `lower_nats`).
    pub stderr: f64,
    pub n_trials: usize,
    pub per_user_gap: Vec<f64>,
    pub per_user_gap_stderr: Vec<f64>,
    pub per_user_genie: Vec<f64>,
    /// `E|I_k[n]|²` per subcarrier, averaged over users.
    pub interference: Vec<f64>,
    pub interference_stderr: Vec<f64>,
    /// Fraction of (trial, subcarrier) pairs with rank-deficient CSIT.
    pub degenerate_fraction: f64,
}

struct TrialOut {
    // Indexed [k * N + n].
    leak: Vec<f64>,
    own: Vec<f64>,
    degenerate: Vec<bool>,
}

fn run_trial(
    stats: &ChannelStats,
    scheme: &dyn CsitSource,
    m: usize,
    k: usize,
    seed: u64,
    trial: u64,
) -> Result<TrialOut> {
    let n = stats.n_subcarriers();
    let real = stats.sample(m, k, &mut substream(seed, &[trial, 0]));
    let csit = scheme.csit(&real, &mut substream(seed, &[trial, 1]))?;
    if csit.users() != k || csit.antennas() != m || csit.subcarriers() != n {
        return Err(Error::Dimension(
            "CSIT shape differs from the channel".into(),
        ));
    }
    let mut leak = vec![0.0; k * n];
    let mut own = vec![0.0; k * n];
    let mut degenerate = vec![false; n];
    let f = real.freq();
    for sc in 0..n {
        let Some(v) = zf_beams(&csit_rows(&csit, sc, k, m)) else {
            degenerate[sc] = true;
            continue;
        };
        for user in 0..k {
            let h: Vec<Complex64> = (0..m).map(|a| f.response(user, a)[sc]).collect();
            for j in 0..k {
                let a: Complex64 = (0..m).map(|r| h[r].conj() * v[(r, j)]).sum();
                if j == user {
                    own[user * n + sc] = a.norm_sqr();
                } else {
                    leak[user * n + sc] += a.norm_sqr();
                }
            }
        }
    }
    Ok(TrialOut {
        leak,
        own,
        degenerate,
    })
}

fn mean_and_stderr(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut count = 0usize;
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for x in xs {
        count += 1;
        sum += x;
        sum2 += x * x;
    }
    if count == 0 {
        return (0.0, 0.0);
    }
    let c = count as f64;
    let mean = sum / c;
    if count < 2 {
        return (mean, 0.0);
    }
    let var = ((sum2 - c * mean * mean) / (c - 1.0)).max(0.0);
    (mean, (var / c).sqrt())
}

/// Runs `n_trials` fading blocks through `scheme` and evaluates the rate
/// gap, lower bound and genie-aided upper bound at each SNR in `snrs`.
///
/// Trial `t` draws its channel from stream `[t, 0]` and its feedback
/// randomness from stream `[t, 1]` under `seed`, so the result does not
/// depend on the number of worker threads. The CSIT is shared by all
/// entries of `snrs`; schemes whose feedback depends on the SNR must be
/// run once per SNR.
pub fn mc_rates(
    stats: &ChannelStats,
    scheme: &dyn CsitSource,
    snrs: &[f64],
    m: usize,
    k: usize,
    n_trials: usize,
    seed: u64,
) -> Result<Vec<RateEstimate>> {
    if k != m {
        return Err(Error::OutOfRange(format!(
            "need K = M, got K = {k}, M = {m}"
        )));
    }
    if n_trials < 2 {
        return Err(Error::OutOfRange("need at least two trials".into()));
    }
    if snrs.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::OutOfRange("SNR values must be positive".into()));
    }
    let trials: Vec<TrialOut> = (0..n_trials as u64)
        .into_par_iter()
        .map(|t| run_trial(stats, scheme, m, k, seed, t))
        .collect::<Result<_>>()?;
    let n = stats.n_subcarriers();
    let degenerate_total: usize = trials
        .iter()
        .map(|t| t.degenerate.iter().filter(|&&d| d).count())
        .sum();
    let degenerate_fraction = degenerate_total as f64 / (n_trials * n) as f64;
    if degenerate_total > 0 {
        warn!(
            "{degenerate_total} of {} subcarrier CSIT matrices were rank deficient",
            n_trials * n
        );
    }

    let mut out = Vec::with_capacity(snrs.len());
    for &snr in snrs {
        let c = snr / m as f64;
        let csit_rate = perfect_csit_rate(snr, m, stats.sigma_h_total());
        // Mean leakage per (user, subcarrier) over non-degenerate trials.
        let mut mean_leak = vec![0.0; k * n];
        let mut counts = vec![0usize; n];
        for t in &trials {
            for sc in 0..n {
                if t.degenerate[sc] {
                    continue;
                }
                counts[sc] += 1;
                for user in 0..k {
                    mean_leak[user * n + sc] += t.leak[user * n + sc];
                }
            }
        }
        for user in 0..k {
            for sc in 0..n {
                mean_leak[user * n + sc] /= counts[sc].max(1) as f64;
            }
        }
        let slope: Vec<f64> = mean_leak.iter().map(|&x| c / (1.0 + c * x)).collect();

        let mut per_user_gap = Vec::with_capacity(k);
        let mut per_user_gap_stderr = Vec::with_capacity(k);
        let mut per_user_genie = Vec::with_capacity(k);
        for user in 0..k {
            let row = &mean_leak[user * n..(user + 1) * n];
            per_user_gap.push(row.iter().map(|&x| (c * x).ln_1p()).sum::<f64>() / n as f64);
            // Delta method: linearize the gap around the sample means.
            let (_, se) = mean_and_stderr(trials.iter().map(|t| {
                (0..n)
                    .filter(|&sc| !t.degenerate[sc])
                    .map(|sc| slope[user * n + sc] * t.leak[user * n + sc])
                    .sum::<f64>()
                    / n as f64
            }));
            per_user_gap_stderr.push(se);
            per_user_genie.push(
                trials
                    .iter()
                    .map(|t| genie_term(t, user, n, c))
                    .sum::<f64>()
                    / n_trials as f64,
            );
        }
        let gap = per_user_gap.iter().sum::<f64>() / k as f64;
        let (_, gap_se) = mean_and_stderr(trials.iter().map(|t| {
            let mut acc = 0.0;
            for sc in (0..n).filter(|&sc| !t.degenerate[sc]) {
                for user in 0..k {
                    acc += slope[user * n + sc] * t.leak[user * n + sc];
                }
            }
            acc / (n * k) as f64
        }));
        let (genie, genie_se) = mean_and_stderr(
            trials
                .iter()
                .map(|t| (0..k).map(|user| genie_term(t, user, n, c)).sum::<f64>() / k as f64),
        );
        let mut interference = Vec::with_capacity(n);
        let mut interference_stderr = Vec::with_capacity(n);
        for sc in 0..n {
            let (mu, se) = mean_and_stderr(
                trials
                    .iter()
                    .filter(|t| !t.degenerate[sc])
                    .map(|t| c * (0..k).map(|user| t.leak[user * n + sc]).sum::<f64>() / k as f64),
            );
            interference.push(mu);
            interference_stderr.push(se);
        }
        let lower = (1.0 - degenerate_fraction) * csit_rate - gap;
        debug!("snr {snr}: csit {csit_rate:.6} gap {gap:.6} ± {gap_se:.2e} genie {genie:.6}");
        out.push(RateEstimate {
            snr,
            lower_nats: lower,
            genie_upper_nats: genie,
            genie_stderr: genie_se,
            csit_rate_nats: csit_rate,
            gap_nats: gap,
            stderr: gap_se,
            n_trials,
            per_user_gap,
            per_user_gap_stderr,
            per_user_genie,
            interference,
            interference_stderr,
            degenerate_fraction,
        });
    }
    Ok(out)
}

fn genie_term(t: &TrialOut, user: usize, n: usize, c: f64) -> f64 {
    (0..n)
        .filter(|&sc| !t.degenerate[sc])
        .map(|sc| (c * t.own[user * n + sc] / (1.0 + c * t.leak[user * n + sc])).ln_1p())
        .sum::<f64>()
        / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn orthogonal_csit_keeps_directions() {
        let a =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let v = zf_beams(&a).unwrap();
        assert!((v[(0, 0)].norm() - 1.0).abs() < 1e-12 && v[(1, 0)].norm() < 1e-12);
        assert!((v[(1, 1)].norm() - 1.0).abs() < 1e-12 && v[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn two_user_hand_example() {
        let r = 0.5f64.sqrt();
        // Rows are Ĥ_k^H for Ĥ_1 = (1, 0), Ĥ_2 = (1, 1)/√2.
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(r, 0.0), c(r, 0.0)]);
        let v = zf_beams(&a).unwrap();
        // v̂_1 ∝ (1, -1)/√2 and v̂_2 ∝ (0, 1), up to a unit phase.
        let p1 = v[(0, 0)] / r;
        assert!((p1.norm() - 1.0).abs() < 1e-12);
        assert!((v[(1, 0)] + p1 * r).norm() < 1e-12);
        assert!(v[(0, 1)].norm() < 1e-12 && (v[(1, 1)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_is_flagged() {
        let a =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0)]);
        assert!(zf_beams(&a).is_none());
    }

    #[test]
    fn closed_form_rate() {
        let r = perfect_csit_rate(10.0, 4, 1.0);
        assert!((r - 1.0478).abs() < 1e-3, "{r}");
        assert_eq!(perfect_csit_rate(0.0, 4, 1.0), 0.0);
    }

    #[test]
    fn rate_prelog_is_one() {
        let mut prev = 0.0;
        for snr in [1e3, 1e6, 1e9] {
            let r = perfect_csit_rate(snr, 4, 1.0) / snr.ln();
            assert!(r > prev && r < 1.0);
            prev = r;
        }
        let d = (perfect_csit_rate(1e10, 4, 1.0) - perfect_csit_rate(1e8, 4, 1.0)) / 100f64.ln();
        assert!((d - 1.0).abs() < 1e-6);
    }
}
