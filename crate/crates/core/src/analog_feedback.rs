//! Analog (unquantized) feedback over an AWGN link and linear MMSE
//! interpolation of the frequency response at the base station.
//!
//! Observations are handled in noise-normalized units: each user sends
//! `J` samples of its frequency response, one per cluster of `N/J`
//! subcarriers, and the base station sees `g = √ρ S H + w` with
//! `w ~ CN(0, I)` and `ρ = β·snr_fb`.

use crate::channel_model::{ChannelRealization, ChannelStats};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, psd_sqrt, trace_re, CMatrix};
use crate::rng::complex_normal;
use nalgebra::{Cholesky, DVector};
use num_complex::Complex64;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalogFeedbackConfig {
    /// Number of fed-back subcarriers (one per cluster).
    pub j: usize,
    /// Bandwidth expansion `M'/M`.
    pub beta: f64,
    /// Feedback-link SNR, linear.
    pub snr_fb: f64,
}

impl AnalogFeedbackConfig {
    pub fn new(j: usize, beta: f64, snr_fb: f64) -> Result<Self> {
        if j == 0 {
            return Err(Error::OutOfRange("J must be positive".into()));
        }
        if !(beta >= 1.0 && beta.is_finite()) {
            return Err(Error::OutOfRange(format!("beta = {beta} must be >= 1")));
        }
        if !(snr_fb > 0.0 && snr_fb.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "feedback SNR {snr_fb} must be positive"
            )));
        }
        Ok(Self { j, beta, snr_fb })
    }

    pub fn rho(&self) -> f64 {
        self.beta * self.snr_fb
    }
}

/// Linear MMSE estimator of the frequency response from `J` noisy samples.
#[derive(Debug, Clone)]
pub struct MmseInterpolator {
    n: usize,
    j: usize,
    rho: f64,
    /// N×J estimator matrix.
    gain: CMatrix,
    /// N×N error covariance.
    err_cov: CMatrix,
    mean_err: f64,
}

/// `G[i,l] = e^{-j2π l i N'/N}`: the sampled rows of the tap synthesis map.
fn sampled_synthesis(stats: &ChannelStats, j: usize) -> CMatrix {
    let t = stats.dft().matrix();
    let spacing = stats.n_subcarriers() / j;
    CMatrix::from_fn(j, stats.n_taps(), |i, l| t[(i * spacing, l)])
}

fn check_grid(stats: &ChannelStats, j: usize) -> Result<()> {
    let n = stats.n_subcarriers();
    if j == 0 || !n.is_multiple_of(j) {
        return Err(Error::OutOfRange(format!(
            "J = {j} does not divide N = {n}"
        )));
    }
    Ok(())
}

impl MmseInterpolator {
    pub fn new(stats: &ChannelStats, cfg: &AnalogFeedbackConfig) -> Result<Self> {
        Self::with_rho(stats, cfg.j, cfg.rho())
    }

    /// Builds the estimator for an arbitrary effective SNR `rho ≥ 0`.
    ///
    /// Works in the tap domain: with `S_h = Σ_h^{1/2}` and `G` the sampled
    /// synthesis rows, the tap error covariance is
    /// `S_h (I + ρ S_h G^H G S_h)^{-1} S_h` and the tap-domain gain is
    /// `√ρ Σ_{e,h} G^H`. Both only invert `I + PSD` through an
    /// eigendecomposition, which stays accurate for very large `rho`.
    pub fn with_rho(stats: &ChannelStats, j: usize, rho: f64) -> Result<Self> {
        check_grid(stats, j)?;
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "rho = {rho} must be finite and >= 0"
            )));
        }
        let n = stats.n_subcarriers();
        let g = sampled_synthesis(stats, j);
        let sh = psd_sqrt(stats.tap_covariance());
        let b = &sh * g.adjoint() * &g * &sh;
        let (vals, vecs) = hermitian_eigen(&b);
        let l = stats.n_taps();
        let mut inner = CMatrix::zeros(l, l);
        for (k, &v) in vals.iter().enumerate() {
            let w = 1.0 / (1.0 + rho * v.max(0.0));
            let col = vecs.column(k);
            inner += (col * col.adjoint()).scale(w);
        }
        let err_h = &sh * inner * &sh;
        let t = stats.dft().matrix();
        let gain_h = (&err_h * g.adjoint()).scale(rho.sqrt());
        let gain = &t * gain_h;
        let err_cov = &t * &err_h * t.adjoint();
        let mean_err = trace_re(&err_h).max(0.0);
        Ok(Self {
            n,
            j,
            rho,
            gain,
            err_cov,
            mean_err,
        })
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n
    }

    pub fn n_samples(&self) -> usize {
        self.j
    }

    /// Subcarrier spacing `N' = N/J` between fed-back samples.
    pub fn spacing(&self) -> usize {
        self.n / self.j
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn gain(&self) -> &CMatrix {
        &self.gain
    }

    pub fn error_covariance(&self) -> &CMatrix {
        &self.err_cov
    }

    /// Average error variance `σ_e² = tr(Σ_e)/N`.
    pub fn mean_error(&self) -> f64 {
        self.mean_err
    }

    /// Per-subcarrier error variances `[Σ_e]_{n,n}`.
    pub fn error_profile(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.err_cov[(i, i)].re.max(0.0))
            .collect()
    }

    /// Noiseless observation `√ρ S H`.
    pub fn observe_clean(&self, h: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(h.len(), self.n);
        let s = self.rho.sqrt();
        (0..self.j).map(|i| h[i * self.spacing()] * s).collect()
    }

    /// Noisy observation `√ρ S H + w`.
    pub fn observe<R: Rng + ?Sized>(&self, h: &[Complex64], rng: &mut R) -> Vec<Complex64> {
        let mut g = self.observe_clean(h);
        for x in &mut g {
            *x += complex_normal(rng, 1.0);
        }
        g
    }

    /// Feedback observations of every (user, antenna) pair, user-major.
    pub fn simulate_feedback<R: Rng + ?Sized>(
        &self,
        real: &ChannelRealization,
        rng: &mut R,
    ) -> Vec<Vec<Complex64>> {
        let f = real.freq();
        let mut out = Vec::with_capacity(f.users() * f.antennas());
        for k in 0..f.users() {
            for m in 0..f.antennas() {
                out.push(self.observe(f.response(k, m), rng));
            }
        }
        out
    }

    /// MMSE estimate `Ĥ = gain · g`.
    pub fn estimate(&self, g: &[Complex64]) -> Result<Vec<Complex64>> {
        if g.len() != self.j {
            return Err(Error::Dimension(format!(
                "expected {} observations, got {}",
                self.j,
                g.len()
            )));
        }
        let gv = DVector::from_column_slice(g);
        Ok((&self.gain * gv).iter().copied().collect())
    }
}

/// `(1/N) tr Σ_e` evaluated directly on the N×N frequency covariance,
/// `Σ_e = Σ_H − ρ Σ_H S^H (I + ρ S Σ_H S^H)^{-1} S Σ_H`, with a Cholesky
/// solve for the J×J system. Used as an independent cross-check of the
/// tap-domain computation.
pub fn mean_error_full(stats: &ChannelStats, j: usize, rho: f64) -> Result<f64> {
    check_grid(stats, j)?;
    let n = stats.n_subcarriers();
    let spacing = n / j;
    let cov = stats.freq_covariance();
    let s_cov = CMatrix::from_fn(j, n, |i, c| cov[(i * spacing, c)]);
    let s_cov_s = CMatrix::from_fn(j, j, |a, b| s_cov[(a, b * spacing)]);
    let a = CMatrix::identity(j, j) + s_cov_s.scale(rho);
    let chol = Cholesky::new(a).ok_or_else(|| Error::InvalidStats("I + ρSΣS^H not PD".into()))?;
    let x = chol.solve(&s_cov);
    let reduction = s_cov.adjoint() * x;
    Ok((trace_re(&cov) - rho * trace_re(&reduction)) / n as f64)
}
