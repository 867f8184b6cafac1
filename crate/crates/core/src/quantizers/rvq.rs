//! Random vector quantization of channel directions.

use crate::error::{Error, Result};
use crate::rng::complex_normal;
use num_complex::Complex64;
use rand::Rng;

/// Default limit on codebook bits. Storage and search grow as `2^B`.
pub const DEFAULT_MAX_BITS: u32 = 22;

/// `2^B` unit-norm codewords drawn isotropically on the complex sphere.
#[derive(Debug, Clone)]
pub struct RvqCodebook {
    m: usize,
    bits: u32,
    // Codeword i occupies [i*m, (i+1)*m).
    words: Vec<Complex64>,
}

impl RvqCodebook {
    pub fn random<R: Rng + ?Sized>(m: usize, bits: u32, rng: &mut R) -> Result<Self> {
        Self::random_capped(m, bits, DEFAULT_MAX_BITS, rng)
    }

    pub fn random_capped<R: Rng + ?Sized>(
        m: usize,
        bits: u32,
        cap: u32,
        rng: &mut R,
    ) -> Result<Self> {
        if bits > cap {
            return Err(Error::ResourceCap {
                what: "RVQ codebook bits",
                requested: bits as u64,
                cap: cap as u64,
            });
        }
        if m == 0 {
            return Err(Error::OutOfRange(
                "codeword dimension must be positive".into(),
            ));
        }
        let count = 1usize << bits;
        let mut words = Vec::with_capacity(count * m);
        for _ in 0..count {
            let start = words.len();
            loop {
                words.extend((0..m).map(|_| complex_normal(rng, 1.0)));
                let norm = words[start..]
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                if norm > 0.0 {
                    for z in &mut words[start..] {
                        *z /= norm;
                    }
                    break;
                }
                words.truncate(start);
            }
        }
        Ok(Self { m, bits, words })
    }

    pub fn len(&self) -> usize {
        self.words.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn dimension(&self) -> usize {
        self.m
    }

    pub fn codeword(&self, i: usize) -> &[Complex64] {
        &self.words[i * self.m..(i + 1) * self.m]
    }

    /// Index and codeword maximizing `|h^H c|²`; ties go to the lowest index.
    pub fn quantize(&self, h: &[Complex64]) -> Result<(usize, &[Complex64])> {
        if h.len() != self.m {
            return Err(Error::Dimension(format!(
                "vector of length {} for {}-dimensional codebook",
                h.len(),
                self.m
            )));
        }
        if h.iter().all(|z| z.norm_sqr() == 0.0) {
            return Err(Error::ZeroVector);
        }
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, c) in self.words.chunks_exact(self.m).enumerate() {
            let ip: Complex64 = h.iter().zip(c).map(|(a, b)| a.conj() * b).sum();
            let v = ip.norm_sqr();
            if v > best_val {
                best_val = v;
                best = i;
            }
        }
        Ok((best, self.codeword(best)))
    }
}

/// Draws a fresh codebook exactly as [`RvqCodebook::random_capped`] would
/// and quantizes every target with it, without storing the codebook.
/// Returns the index and codeword chosen for each target.
pub fn quantize_with_fresh_codebook<R: Rng + ?Sized>(
    m: usize,
    bits: u32,
    cap: u32,
    targets: &[&[Complex64]],
    rng: &mut R,
) -> Result<Vec<(usize, Vec<Complex64>)>> {
    if bits > cap {
        return Err(Error::ResourceCap {
            what: "RVQ codebook bits",
            requested: bits as u64,
            cap: cap as u64,
        });
    }
    if m == 0 {
        return Err(Error::OutOfRange(
            "codeword dimension must be positive".into(),
        ));
    }
    for h in targets {
        if h.len() != m {
            return Err(Error::Dimension(format!(
                "vector of length {} for {m}-dimensional codebook",
                h.len()
            )));
        }
        if h.iter().all(|z| z.norm_sqr() == 0.0) {
            return Err(Error::ZeroVector);
        }
    }
    let mut best: Vec<(usize, f64, Vec<Complex64>)> =
        vec![(0, f64::NEG_INFINITY, vec![Complex64::default(); m]); targets.len()];
    let mut c = vec![Complex64::default(); m];
    for i in 0..1usize << bits {
        loop {
            for z in c.iter_mut() {
                *z = complex_normal(rng, 1.0);
            }
            let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                for z in c.iter_mut() {
                    *z /= norm;
                }
                break;
            }
        }
        for (h, b) in targets.iter().zip(best.iter_mut()) {
            let ip: Complex64 = h.iter().zip(&c).map(|(a, b)| a.conj() * b).sum();
            let v = ip.norm_sqr();
            if v > b.1 {
                b.0 = i;
                b.1 = v;
                b.2.copy_from_slice(&c);
            }
        }
    }
    Ok(best.into_iter().map(|(i, _, w)| (i, w)).collect())
}

/// `sin²` of the angle between `h` and the unit vector `c`.
pub fn sin2_angle(h: &[Complex64], c: &[Complex64]) -> f64 {
    let ip: Complex64 = h.iter().zip(c).map(|(a, b)| a.conj() * b).sum();
    let nh: f64 = h.iter().map(|z| z.norm_sqr()).sum();
    (1.0 - ip.norm_sqr() / nh).max(0.0)
}

/// Subcarrier offsets `(a, b)` covered by one fed-back sample of a cluster
/// of `spacing` subcarriers: the sample serves `n' - a ..= n' + b`.
pub fn cluster_span(spacing: usize) -> (usize, usize) {
    if spacing.is_multiple_of(2) {
        (spacing / 2 - 1, spacing / 2)
    } else {
        (spacing / 2, spacing / 2)
    }
}
