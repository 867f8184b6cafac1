//! CSIT generators for each feedback scheme.

use crate::analog_feedback::MmseInterpolator;
use crate::channel_model::{ChannelRealization, FreqResponse};
use crate::error::Result;
use crate::quantizers::rvq::{cluster_span, quantize_with_fresh_codebook};
use crate::quantizers::TdqQuantizer;
use crate::rng::SimRng;
use crate::zfbf_rates::CsitSource;

/// The transmitter knows the channel exactly.
#[derive(Debug, Clone, Copy, Default)]
pub struct PerfectCsit;

impl CsitSource for PerfectCsit {
    fn csit(&self, real: &ChannelRealization, _rng: &mut SimRng) -> Result<FreqResponse> {
        Ok(real.freq().clone())
    }
}

/// Analog feedback followed by MMSE interpolation.
#[derive(Debug, Clone)]
pub struct AnalogCsit {
    pub interp: MmseInterpolator,
}

impl CsitSource for AnalogCsit {
    fn csit(&self, real: &ChannelRealization, rng: &mut SimRng) -> Result<FreqResponse> {
        let f = real.freq();
        let mut out = FreqResponse::zeros(f.users(), f.antennas(), f.subcarriers());
        for k in 0..f.users() {
            for m in 0..f.antennas() {
                let g = self.interp.observe(f.response(k, m), rng);
                let est = self.interp.estimate(&g)?;
                out.response_mut(k, m).copy_from_slice(&est);
            }
        }
        Ok(out)
    }
}

/// Random vector quantization of the channel direction on `J` subcarriers,
/// each quantized direction reused across its cluster. Every user draws a
/// fresh codebook per fading block.
#[derive(Debug, Clone, Copy)]
pub struct RvqCsit {
    pub j: usize,
    pub bits: u32,
    pub cap: u32,
}

impl CsitSource for RvqCsit {
    fn csit(&self, real: &ChannelRealization, rng: &mut SimRng) -> Result<FreqResponse> {
        let f = real.freq();
        let (n, m) = (f.subcarriers(), f.antennas());
        let spacing = n / self.j;
        let (a, b) = cluster_span(spacing);
        let mut out = FreqResponse::zeros(f.users(), m, n);
        for k in 0..f.users() {
            let targets: Vec<Vec<_>> = (0..self.j).map(|i| f.vector(k, i * spacing)).collect();
            let refs: Vec<&[_]> = targets.iter().map(|t| t.as_slice()).collect();
            let chosen = quantize_with_fresh_codebook(m, self.bits, self.cap, &refs, rng)?;
            for (i, (_, word)) in chosen.iter().enumerate() {
                let centre = i * spacing;
                for off in -(a as i64)..=(b as i64) {
                    let sc = (centre as i64 + off).rem_euclid(n as i64) as usize;
                    out.set_vector(k, sc, word);
                }
            }
        }
        Ok(out)
    }
}

/// Per-coefficient quantization of taps, K-L coefficients or path gains.
#[derive(Debug, Clone)]
pub struct TdqCsit {
    pub quantizer: TdqQuantizer,
}

impl CsitSource for TdqCsit {
    fn csit(&self, real: &ChannelRealization, rng: &mut SimRng) -> Result<FreqResponse> {
        self.quantizer.quantize(real, rng)
    }
}
