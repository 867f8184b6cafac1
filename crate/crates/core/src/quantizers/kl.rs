//! Karhunen-Loève basis of the frequency-domain channel covariance.

use crate::channel_model::ChannelStats;
use crate::linalg::{hermitian_eigen, CMatrix};
use num_complex::Complex64;

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// Orthonormal eigenvectors of `Σ_H` for its nonzero eigenvalues.
#[derive(Debug, Clone)]
pub struct KlBasis {
    /// N×P, columns orthonormal.
    u: CMatrix,
    eigvals: Vec<f64>,
}

impl KlBasis {
    pub fn new(stats: &ChannelStats) -> Self {
        Self::from_covariance(&stats.freq_covariance())
    }

    pub fn from_covariance(cov: &CMatrix) -> Self {
        let (vals, vecs) = hermitian_eigen(cov);
        let max = vals.first().copied().unwrap_or(0.0);
        let p = vals.iter().filter(|&&v| v > RANK_TOLERANCE * max).count();
        Self {
            u: vecs.columns(0, p).into_owned(),
            eigvals: vals[..p].to_vec(),
        }
    }

    /// Number of retained coefficients P.
    pub fn rank(&self) -> usize {
        self.eigvals.len()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.u
    }

    /// Coefficient variances `φ_p²`, decreasing.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigvals
    }

    /// `U^H h`.
    pub fn analyze(&self, h: &[Complex64]) -> Vec<Complex64> {
        (0..self.rank())
            .map(|p| {
                self.u
                    .column(p)
                    .iter()
                    .zip(h)
                    .map(|(a, b)| a.conj() * b)
                    .sum()
            })
            .collect()
    }

    /// `out = U c`.
    pub fn synthesize(&self, c: &[Complex64], out: &mut [Complex64]) {
        for (n, o) in out.iter_mut().enumerate() {
            *o = (0..self.rank()).map(|p| self.u[(n, p)] * c[p]).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_model::Pulse;

    #[test]
    fn flat_channel_rank_one() {
        let s = ChannelStats::from_dip(&[1.0], 16).unwrap();
        let kl = KlBasis::new(&s);
        assert_eq!(kl.rank(), 1);
        assert!((kl.eigenvalues()[0] - 16.0).abs() < 1e-12);
        let u0 = kl.basis()[(0, 0)];
        for n in 0..16 {
            assert!((kl.basis()[(n, 0)] - u0).norm() < 1e-12);
            assert!((kl.basis()[(n, 0)].norm() - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn circulant_eigenvalues_are_scaled_taps() {
        let dip = [0.5, 0.24, 0.17, 0.06, 0.03];
        let kl = KlBasis::new(&ChannelStats::from_dip(&dip, 64).unwrap());
        assert_eq!(kl.rank(), 5);
        for (e, v) in kl.eigenvalues().iter().zip(dip) {
            assert!((e - 64.0 * v).abs() < 1e-10);
        }
        let gram = kl.basis().adjoint() * kl.basis();
        assert!((gram - CMatrix::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn sui4_rank_and_trace() {
        let s = ChannelStats::from_paths(
            &[0.0, 1.5e-6, 4e-6],
            &[1.0, 0.3162, 0.1585],
            Pulse::sample_hold_triangle(1e6),
            1e6,
            None,
            64,
        )
        .unwrap();
        let kl = KlBasis::new(&s);
        assert_eq!(kl.rank(), 3);
        let total: f64 = kl.eigenvalues().iter().sum();
        assert!((total - 64.0 * s.sigma_h_total()).abs() < 1e-9 * total);
    }
}
