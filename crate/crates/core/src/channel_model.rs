//! Second-order channel descriptions and fading-block sampling.
//!
//! Two models are supported. The discrete model draws L independent taps
//! from a delay intensity profile. The physical model draws P independent
//! path gains and maps them onto L correlated taps through sampled pulse
//! shapes, `h = Ψ c`.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix, RootTable, TapDft};
use crate::rng::complex_normal;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

/// Tolerance on negative eigenvalues of Σ_h, relative to σ_H².
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Maximum fraction of a path's pulse energy that may fall outside the
/// `L` retained taps.
pub const MAX_TAIL_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    DiscreteDip,
    PhysicalWssus,
}

/// Combined transmit/receive front-end pulse `ψ(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Pulse {
    /// Triangle with peak 1 at `t = 0` and the given base width (seconds).
    Triangular { base_width: f64 },
    /// Raised cosine with symbol period `period` (seconds), roll-off in
    /// `[0, 1]`, truncated to `span` periods in total.
    RaisedCosine {
        rolloff: f64,
        period: f64,
        span: f64,
    },
    /// Samples `values[i]` at `t = start + i·step` (seconds), linearly
    /// interpolated and zero outside the table.
    Tabulated {
        start: f64,
        step: f64,
        values: Vec<f64>,
    },
    /// `ψ(t) = 1` at `t = 0` and zero elsewhere on the sampling grid.
    UnitSample,
}

impl Pulse {
    /// Triangle obtained by convolving two sample-and-hold rectangles of
    /// width `1/W`.
    pub fn sample_hold_triangle(sample_rate: f64) -> Self {
        Pulse::Triangular {
            base_width: 2.0 / sample_rate,
        }
    }

    /// Value at offset `x` measured in samples of a grid of rate `w`.
    pub fn value_at(&self, x: f64, w: f64) -> f64 {
        match self {
            Pulse::Triangular { base_width } => {
                let half = 0.5 * base_width * w;
                (1.0 - x.abs() / half).max(0.0)
            }
            Pulse::RaisedCosine {
                rolloff,
                period,
                span,
            } => {
                let u = x / (w * period);
                if u.abs() > 0.5 * span {
                    return 0.0;
                }
                let sinc = if u == 0.0 {
                    1.0
                } else {
                    (PI * u).sin() / (PI * u)
                };
                let den = 1.0 - (2.0 * rolloff * u).powi(2);
                if den.abs() < 1e-12 {
                    // Removable singularity at |u| = 1/(2β).
                    PI / 4.0 * sinc_at(1.0 / (2.0 * rolloff))
                } else {
                    sinc * (PI * rolloff * u).cos() / den
                }
            }
            Pulse::Tabulated {
                start,
                step,
                values,
            } => {
                let pos = (x / w - start) / step;
                if pos < 0.0 || values.is_empty() {
                    return 0.0;
                }
                let i = pos.floor() as usize;
                if i + 1 >= values.len() {
                    return if i + 1 == values.len() && pos == i as f64 {
                        values[i]
                    } else {
                        0.0
                    };
                }
                let f = pos - i as f64;
                values[i] * (1.0 - f) + values[i + 1] * f
            }
            Pulse::UnitSample => {
                if x.abs() < 1e-9 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Closed interval (in samples at rate `w`) outside which the pulse is 0.
    pub fn support(&self, w: f64) -> (f64, f64) {
        match self {
            Pulse::Triangular { base_width } => {
                let h = 0.5 * base_width * w;
                (-h, h)
            }
            Pulse::RaisedCosine { period, span, .. } => {
                let h = 0.5 * span * period * w;
                (-h, h)
            }
            Pulse::Tabulated {
                start,
                step,
                values,
            } => {
                let end = start + step * values.len().saturating_sub(1) as f64;
                (start * w, end * w)
            }
            Pulse::UnitSample => (0.0, 0.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Pulse::Triangular { base_width } => *base_width > 0.0,
            Pulse::RaisedCosine {
                rolloff,
                period,
                span,
            } => (0.0..=1.0).contains(rolloff) && *period > 0.0 && *span > 0.0,
            Pulse::Tabulated { step, values, .. } => *step > 0.0 && !values.is_empty(),
            Pulse::UnitSample => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidStats(format!("malformed pulse {self:?}")))
        }
    }
}

fn sinc_at(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        (PI * u).sin() / (PI * u)
    }
}

/// Physical multipath description retained by [`ChannelStats`].
#[derive(Debug, Clone)]
pub struct PhysicalPaths {
    pub delays: Vec<f64>,
    pub vars: Vec<f64>,
    pub pulse: Pulse,
    pub sample_rate: f64,
    /// L×P masking matrix, `Ψ[l,p] = ψ((l − τ_p W)/W)`.
    pub psi: CMatrix,
}

impl PhysicalPaths {
    pub fn n_paths(&self) -> usize {
        self.vars.len()
    }

    /// Diagonal of `Ψ^H Ψ`.
    pub fn column_energies(&self) -> Vec<f64> {
        (0..self.psi.ncols())
            .map(|p| self.psi.column(p).norm_squared())
            .collect()
    }
}

/// Immutable second-order description of the channel of one antenna/user
/// pair. Shared read-only by all Monte Carlo workers.
#[derive(Debug, Clone)]
pub struct ChannelStats {
    kind: ModelKind,
    n_subcarriers: usize,
    n_taps: usize,
    /// Per-tap variances, i.e. the diagonal of Σ_h.
    dip: Vec<f64>,
    physical: Option<PhysicalPaths>,
    sigma_h: CMatrix,
    sigma_h_total: f64,
    dft: TapDft,
}

impl ChannelStats {
    /// Discrete channel with independent taps `h[l] ~ CN(0, dip[l])`.
    pub fn from_dip(dip: &[f64], n_subcarriers: usize) -> Result<Self> {
        let l = dip.len();
        if l == 0 {
            return Err(Error::InvalidStats("empty delay intensity profile".into()));
        }
        if l > n_subcarriers {
            return Err(Error::InvalidStats(format!(
                "{l} taps exceed {n_subcarriers} subcarriers"
            )));
        }
        if dip.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidStats(
                "negative or non-finite tap variance".into(),
            ));
        }
        if dip.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidStats(
                "all-zero delay intensity profile".into(),
            ));
        }
        let sigma_h = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            l,
            dip.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        Ok(Self {
            kind: ModelKind::DiscreteDip,
            n_subcarriers,
            n_taps: l,
            dip: dip.to_vec(),
            physical: None,
            sigma_h,
            sigma_h_total: dip.iter().sum(),
            dft: TapDft::new(n_subcarriers, l),
        })
    }

    /// Physical WSSUS channel: path gains `c_p ~ CN(0, vars[p])` at
    /// delays `delays[p]` (seconds), observed through `pulse` at sample rate
    /// `sample_rate`. When `n_taps` is `None`, the smallest L holding every
    /// nonzero pulse sample is used.
    pub fn from_paths(
        delays: &[f64],
        vars: &[f64],
        pulse: Pulse,
        sample_rate: f64,
        n_taps: Option<usize>,
        n_subcarriers: usize,
    ) -> Result<Self> {
        let p_count = delays.len();
        if p_count == 0 || vars.len() != p_count {
            return Err(Error::InvalidStats(format!(
                "need matching nonempty delays/vars, got {} and {}",
                p_count,
                vars.len()
            )));
        }
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::InvalidStats("sample rate must be positive".into()));
        }
        if delays.iter().any(|d| !(d.is_finite() && *d >= 0.0))
            || delays.windows(2).any(|w| w[1] < w[0])
        {
            return Err(Error::InvalidStats(
                "delays must be nonnegative and nondecreasing".into(),
            ));
        }
        if vars.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidStats(
                "path variances must be positive".into(),
            ));
        }
        pulse.validate()?;

        let (lo, hi) = pulse.support(sample_rate);
        // Integer sample range touched by each path, and the last nonzero tap.
        let mut ranges = Vec::with_capacity(p_count);
        let mut needed = 0usize;
        for &tau in delays {
            let centre = tau * sample_rate;
            let first = (centre + lo).ceil() as i64;
            let last = (centre + hi).floor() as i64;
            let mut energy = 0.0;
            let mut last_nonzero = None;
            for l in first..=last {
                let v = pulse.value_at(l as f64 - centre, sample_rate);
                energy += v * v;
                if v != 0.0 {
                    last_nonzero = Some(l);
                }
            }
            if energy <= 0.0 {
                return Err(Error::InvalidStats(format!(
                    "pulse has no energy on the sampling grid for delay {tau}"
                )));
            }
            if let Some(l) = last_nonzero {
                needed = needed.max((l + 1).max(0) as usize);
            }
            ranges.push((first, last, centre, energy));
        }
        let l_taps = n_taps.unwrap_or(needed).max(1);
        if l_taps > n_subcarriers {
            return Err(Error::InvalidStats(format!(
                "{l_taps} taps exceed {n_subcarriers} subcarriers"
            )));
        }
        for (p, &(first, last, centre, energy)) in ranges.iter().enumerate() {
            let captured: f64 = (first.max(0)..=last.min(l_taps as i64 - 1))
                .map(|l| pulse.value_at(l as f64 - centre, sample_rate).powi(2))
                .sum();
            let tail = 1.0 - captured / energy;
            if tail > MAX_TAIL_FRACTION {
                return Err(Error::InvalidStats(format!(
                    "path {p} loses {tail:.3e} of its pulse energy outside {l_taps} taps"
                )));
            }
        }

        let psi = CMatrix::from_fn(l_taps, p_count, |l, p| {
            let x = l as f64 - delays[p] * sample_rate;
            Complex64::new(pulse.value_at(x, sample_rate), 0.0)
        });
        let sigma_c = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            p_count,
            vars.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        let sigma_h = &psi * sigma_c * psi.adjoint();
        let dip: Vec<f64> = (0..l_taps).map(|l| sigma_h[(l, l)].re).collect();
        let sigma_h_total = dip.iter().sum();

        let stats = Self {
            kind: ModelKind::PhysicalWssus,
            n_subcarriers,
            n_taps: l_taps,
            dip,
            physical: Some(PhysicalPaths {
                delays: delays.to_vec(),
                vars: vars.to_vec(),
                pulse,
                sample_rate,
                psi,
            }),
            sigma_h,
            sigma_h_total,
            dft: TapDft::new(n_subcarriers, l_taps),
        };
        stats.check_psd()?;
        Ok(stats)
    }

    fn check_psd(&self) -> Result<()> {
        let (vals, _) = hermitian_eigen(&self.sigma_h);
        let min = vals.last().copied().unwrap_or(0.0);
        if min < -PSD_TOLERANCE * self.sigma_h_total {
            return Err(Error::InvalidStats(format!(
                "tap covariance is not PSD (min eigenvalue {min:.3e})"
            )));
        }
        Ok(())
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn n_taps(&self) -> usize {
        self.n_taps
    }

    /// Per-tap variances (the diagonal of Σ_h).
    pub fn tap_variances(&self) -> &[f64] {
        &self.dip
    }

    pub fn physical(&self) -> Option<&PhysicalPaths> {
        self.physical.as_ref()
    }

    /// L×L tap covariance Σ_h.
    pub fn tap_covariance(&self) -> &CMatrix {
        &self.sigma_h
    }

    /// σ_H² = trace(Σ_h), the mean per-subcarrier channel power.
    pub fn sigma_h_total(&self) -> f64 {
        self.sigma_h_total
    }

    pub fn dft(&self) -> &TapDft {
        &self.dft
    }

    /// Eigenvalues of Σ_h in decreasing order, negative roundoff clamped.
    pub fn tap_eigenvalues(&self) -> Vec<f64> {
        match self.kind {
            ModelKind::DiscreteDip => {
                let mut v = self.dip.clone();
                v.sort_by(|a, b| b.total_cmp(a));
                v
            }
            ModelKind::PhysicalWssus => hermitian_eigen(&self.sigma_h)
                .0
                .into_iter()
                .map(|v| v.max(0.0))
                .collect(),
        }
    }

    /// N×N frequency-domain covariance `Σ_H = F [NΣ_h 0; 0 0] F^H`.
    pub fn freq_covariance(&self) -> CMatrix {
        let a = self.dft.matrix();
        &a * &self.sigma_h * a.adjoint()
    }

    /// Normalized frequency correlation `c(δ)` at lag `delta` (mod N).
    ///
    /// This is the circular average of `[Σ_H]_{n+δ,n}` over `n`, divided by
    /// σ_H², which reduces to `Σ_l [Σ_h]_{l,l} e^{-j2πlδ/N} / σ_H²`. For the
    /// discrete model Σ_H is circulant and this is exactly `[Σ_H]_{δ,0}/σ_H²`.
    pub fn freq_correlation(&self, delta: i64) -> Complex64 {
        let table = RootTable::new(self.n_subcarriers);
        let num: Complex64 = self
            .dip
            .iter()
            .enumerate()
            .map(|(l, &v)| table.root(l as i64 * delta) * v)
            .sum();
        num / self.sigma_h_total
    }

    /// Draws one fading block for `users` users with `antennas` antennas.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        antennas: usize,
        users: usize,
        rng: &mut R,
    ) -> ChannelRealization {
        let l = self.n_taps;
        let pairs = users * antennas;
        let mut taps = vec![Complex64::new(0.0, 0.0); pairs * l];
        let phys_coeffs = match &self.physical {
            None => {
                let sd: Vec<f64> = self.dip.clone();
                for chunk in taps.chunks_exact_mut(l) {
                    for (h, &v) in chunk.iter_mut().zip(&sd) {
                        *h = complex_normal(rng, v);
                    }
                }
                None
            }
            Some(phys) => {
                let p = phys.n_paths();
                let mut coeffs = vec![Complex64::new(0.0, 0.0); pairs * p];
                for (chunk, hchunk) in coeffs.chunks_exact_mut(p).zip(taps.chunks_exact_mut(l)) {
                    for (c, &v) in chunk.iter_mut().zip(&phys.vars) {
                        *c = complex_normal(rng, v);
                    }
                    for (li, h) in hchunk.iter_mut().enumerate() {
                        *h = (0..p).map(|pi| phys.psi[(li, pi)] * chunk[pi]).sum();
                    }
                }
                Some(coeffs)
            }
        };
        let mut freq = FreqResponse::zeros(users, antennas, self.n_subcarriers);
        for (pair, h) in taps.chunks_exact(l).enumerate() {
            self.dft.synthesize(h, freq.row_mut_flat(pair));
        }
        ChannelRealization {
            users,
            antennas,
            n_taps: l,
            taps,
            freq,
            phys_coeffs,
        }
    }
}

/// Frequency responses of all (user, antenna) pairs on all subcarriers,
/// stored user-major, then antenna, then subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqResponse {
    users: usize,
    antennas: usize,
    subcarriers: usize,
    data: Vec<Complex64>,
}

impl FreqResponse {
    pub fn zeros(users: usize, antennas: usize, subcarriers: usize) -> Self {
        Self {
            users,
            antennas,
            subcarriers,
            data: vec![Complex64::new(0.0, 0.0); users * antennas * subcarriers],
        }
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    /// `H_{k,m}[·]` over all subcarriers.
    pub fn response(&self, k: usize, m: usize) -> &[Complex64] {
        let i = (k * self.antennas + m) * self.subcarriers;
        &self.data[i..i + self.subcarriers]
    }

    pub fn response_mut(&mut self, k: usize, m: usize) -> &mut [Complex64] {
        let i = (k * self.antennas + m) * self.subcarriers;
        &mut self.data[i..i + self.subcarriers]
    }

    fn row_mut_flat(&mut self, pair: usize) -> &mut [Complex64] {
        let i = pair * self.subcarriers;
        &mut self.data[i..i + self.subcarriers]
    }

    /// The M-vector `H_k[n]`.
    pub fn vector(&self, k: usize, n: usize) -> Vec<Complex64> {
        (0..self.antennas).map(|m| self.response(k, m)[n]).collect()
    }

    pub fn set_vector(&mut self, k: usize, n: usize, v: &[Complex64]) {
        assert_eq!(v.len(), self.antennas);
        for (m, &x) in v.iter().enumerate() {
            self.response_mut(k, m)[n] = x;
        }
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }
}

/// One fading block for all users and antennas.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    users: usize,
    antennas: usize,
    n_taps: usize,
    taps: Vec<Complex64>,
    freq: FreqResponse,
    phys_coeffs: Option<Vec<Complex64>>,
}

impl ChannelRealization {
    pub fn users(&self) -> usize {
        self.users
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn subcarriers(&self) -> usize {
        self.freq.subcarriers
    }

    /// Time-domain taps `h_{k,m}[·]`.
    pub fn taps(&self, k: usize, m: usize) -> &[Complex64] {
        let i = (k * self.antennas + m) * self.n_taps;
        &self.taps[i..i + self.n_taps]
    }

    /// Physical path gains `c_{k,m}[·]` (physical model only).
    pub fn path_gains(&self, k: usize, m: usize) -> Option<&[Complex64]> {
        self.phys_coeffs.as_ref().map(|c| {
            let p = c.len() / (self.users * self.antennas);
            let i = (k * self.antennas + m) * p;
            &c[i..i + p]
        })
    }

    pub fn freq(&self) -> &FreqResponse {
        &self.freq
    }
}

/// Real matrix view helper used by tests and diagnostics.
pub fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}
