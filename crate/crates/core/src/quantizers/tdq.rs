//! Per-coefficient quantization of a channel realization in the tap,
//! K-L or physical-path domain.

use super::kl::KlBasis;
use super::suq::suq_quantize;
use super::BitAllocation;
use crate::channel_model::{ChannelRealization, ChannelStats, FreqResponse};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, TapDft};
use crate::rng::complex_normal;
use num_complex::Complex64;
use rand::Rng;

/// Coefficients that get quantized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Discrete-time taps `h[l]`.
    TimeTaps,
    /// K-L coefficients `U^H H` of the frequency response.
    KlCoeffs,
    /// Physical path gains `c_p` (physical model only).
    PhysPaths,
}

#[derive(Debug, Clone)]
enum Transform {
    Taps(TapDft),
    Kl(KlBasis),
    Paths { psi: CMatrix, dft: TapDft },
}

/// Variances and distortion weights of the coefficients of `domain`.
///
/// Weights convert per-coefficient distortion into mean per-subcarrier
/// frequency-domain error: `E|H - Ĥ|²/N = Σ w_l D_l`.
pub fn coefficient_stats(stats: &ChannelStats, domain: Domain) -> Result<(Vec<f64>, Vec<f64>)> {
    match domain {
        Domain::TimeTaps => {
            let v = stats.tap_variances().to_vec();
            let w = vec![1.0; v.len()];
            Ok((v, w))
        }
        Domain::KlCoeffs => {
            let kl = KlBasis::new(stats);
            let w = vec![1.0 / stats.n_subcarriers() as f64; kl.rank()];
            Ok((kl.eigenvalues().to_vec(), w))
        }
        Domain::PhysPaths => {
            let phys = stats.physical().ok_or_else(|| {
                Error::Unsupported("path-domain quantization needs the physical model".into())
            })?;
            Ok((phys.vars.clone(), phys.column_energies()))
        }
    }
}

/// Quantizes every (user, antenna) response coefficient-by-coefficient.
///
/// Allocations with step sizes use the scalar uniform quantizer. Without
/// steps the rate-distortion test channel `ĉ = a c + n`, with
/// `a = 1 - D/σ²` and `n ~ CN(0, aD)`, reproduces each coefficient at
/// exactly its allotted distortion.
#[derive(Debug, Clone)]
pub struct TdqQuantizer {
    domain: Domain,
    n: usize,
    transform: Transform,
    alloc: BitAllocation,
}

impl TdqQuantizer {
    pub fn new(stats: &ChannelStats, domain: Domain, alloc: BitAllocation) -> Result<Self> {
        let transform = match domain {
            Domain::TimeTaps => Transform::Taps(stats.dft().clone()),
            Domain::KlCoeffs => Transform::Kl(KlBasis::new(stats)),
            Domain::PhysPaths => {
                let phys = stats.physical().ok_or_else(|| {
                    Error::Unsupported("path-domain quantization needs the physical model".into())
                })?;
                Transform::Paths {
                    psi: phys.psi.clone(),
                    dft: stats.dft().clone(),
                }
            }
        };
        let count = match &transform {
            Transform::Taps(d) => d.taps(),
            Transform::Kl(kl) => kl.rank(),
            Transform::Paths { psi, .. } => psi.ncols(),
        };
        if alloc.len() != count {
            return Err(Error::Dimension(format!(
                "allocation for {} coefficients, domain has {count}",
                alloc.len()
            )));
        }
        Ok(Self {
            domain,
            n: stats.n_subcarriers(),
            transform,
            alloc,
        })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn allocation(&self) -> &BitAllocation {
        &self.alloc
    }

    fn code<R: Rng + ?Sized>(&self, coeffs: &mut [Complex64], rng: &mut R) {
        match (&self.alloc.steps, &self.alloc.levels) {
            (Some(steps), Some(levels)) => {
                for ((c, &s), &q) in coeffs.iter_mut().zip(steps).zip(levels) {
                    *c = suq_quantize(*c, s, q);
                }
            }
            _ => {
                for ((c, &v), &d) in coeffs
                    .iter_mut()
                    .zip(&self.alloc.variances)
                    .zip(&self.alloc.distortions)
                {
                    if v <= 0.0 || d >= v {
                        *c = Complex64::new(0.0, 0.0);
                    } else {
                        let a = 1.0 - d / v;
                        *c = *c * a + complex_normal(rng, a * d);
                    }
                }
            }
        }
    }

    /// Quantized frequency responses for all users and antennas.
    pub fn quantize<R: Rng + ?Sized>(
        &self,
        real: &ChannelRealization,
        rng: &mut R,
    ) -> Result<FreqResponse> {
        let mut out = FreqResponse::zeros(real.users(), real.antennas(), self.n);
        for k in 0..real.users() {
            for m in 0..real.antennas() {
                let row = out.response_mut(k, m);
                match &self.transform {
                    Transform::Taps(dft) => {
                        let mut c = real.taps(k, m).to_vec();
                        self.code(&mut c, rng);
                        dft.synthesize(&c, row);
                    }
                    Transform::Kl(kl) => {
                        let mut c = kl.analyze(real.freq().response(k, m));
                        self.code(&mut c, rng);
                        kl.synthesize(&c, row);
                    }
                    Transform::Paths { psi, dft } => {
                        let mut c = real
                            .path_gains(k, m)
                            .ok_or_else(|| {
                                Error::Unsupported("realization has no path gains".into())
                            })?
                            .to_vec();
                        self.code(&mut c, rng);
                        let taps: Vec<Complex64> = (0..psi.nrows())
                            .map(|l| (0..c.len()).map(|p| psi[(l, p)] * c[p]).sum())
                            .collect();
                        dft.synthesize(&taps, row);
                    }
                }
            }
        }
        Ok(out)
    }
}
