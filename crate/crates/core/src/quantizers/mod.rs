//! Digital CSIT quantizers: random vector quantization of channel
//! directions, reverse waterfilling, scalar uniform quantization with
//! greedy or waterfilling bit allocation, and per-coefficient quantization
//! of taps, K-L coefficients or physical path gains.

pub mod greedy;
pub mod kl;
pub mod rvq;
pub mod rwf;
pub mod suq;
pub mod tdq;

pub use greedy::greedy_bit_alloc;
pub use kl::KlBasis;
pub use rvq::RvqCodebook;
pub use rwf::{rwf_by_distortion, rwf_by_rate, weighted_rwf_by_rate};
pub use suq::{design_suq, suq_quantize, SuqDesign};
pub use tdq::{Domain, TdqQuantizer};

use std::fmt::Write;

/// Per-coefficient bits, distortions and (for scalar quantization) step
/// sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct BitAllocation {
    /// Coefficient variances the allocation was designed for.
    pub variances: Vec<f64>,
    /// Distortion weights.
    pub weights: Vec<f64>,
    /// Bits per coefficient. Real-valued at the rate-distortion limit,
    /// integral for scalar quantization.
    pub bits: Vec<f64>,
    /// Water level, for waterfilling allocations.
    pub waterlevel: Option<f64>,
    /// Scalar quantizer step sizes (`None` at the rate-distortion limit;
    /// entries with zero bits have step 0).
    pub steps: Option<Vec<f64>>,
    /// Reconstruction levels per real dimension for scalar quantization.
    pub levels: Option<Vec<u64>>,
    /// Per-coefficient mean-square error `D_l`.
    pub distortions: Vec<f64>,
}

impl BitAllocation {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn total_bits(&self) -> f64 {
        self.bits.iter().sum()
    }

    /// `Σ w_l D_l`.
    pub fn total_distortion(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.distortions)
            .map(|(w, d)| w * d)
            .sum()
    }

    pub fn is_scalar(&self) -> bool {
        self.steps.is_some()
    }

    /// Diagnostic table, one row per coefficient.
    pub fn table(&self) -> String {
        let mut out = String::from("idx  variance      weight        bits     step          D\n");
        for i in 0..self.len() {
            let step = self.steps.as_ref().map_or(f64::NAN, |s| s[i]);
            let _ = writeln!(
                out,
                "{:<4} {:<13.6e} {:<13.6e} {:<8.3} {:<13.6e} {:.6e}",
                i, self.variances[i], self.weights[i], self.bits[i], step, self.distortions[i]
            );
        }
        out
    }
}
