//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::f64::consts::PI;

pub type CMatrix = DMatrix<Complex64>;

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted in
/// decreasing order with eigenvectors permuted to match.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    assert!(m.is_square());
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    // Symmetrize to remove roundoff asymmetry before factorizing.
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Number of eigenvalues above `rel_tol` times the largest one.
pub fn numerical_rank(eigenvalues: &[f64], rel_tol: f64) -> usize {
    let max = eigenvalues.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return 0;
    }
    eigenvalues.iter().filter(|&&v| v > rel_tol * max).count()
}

/// Principal square root of a PSD Hermitian matrix. Eigenvalues slightly
/// below zero from roundoff are clamped.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &v) in vals.iter().enumerate() {
        let s = v.max(0.0).sqrt();
        if s == 0.0 {
            continue;
        }
        let col = vecs.column(k);
        out += (col * col.adjoint()).scale(s);
    }
    out
}

/// Trace of a square complex matrix, real part.
pub fn trace_re(m: &CMatrix) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

/// Table of the N-th roots of unity `e^{-j2πk/N}`, conjugate-symmetric by
/// construction (`root(N-k) == conj(root(k))` bitwise).
#[derive(Debug, Clone)]
pub struct RootTable {
    roots: Vec<Complex64>,
}

impl RootTable {
    pub fn new(n: usize) -> Self {
        assert!(n > 0);
        let mut roots = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..=n / 2 {
            let ang = -2.0 * PI * k as f64 / n as f64;
            roots[k] = Complex64::new(ang.cos(), ang.sin());
        }
        for k in n / 2 + 1..n {
            roots[k] = roots[n - k].conj();
        }
        roots[0] = Complex64::new(1.0, 0.0);
        if n.is_multiple_of(2) {
            roots[n / 2] = Complex64::new(-1.0, 0.0);
        }
        if n.is_multiple_of(4) {
            roots[n / 4] = Complex64::new(0.0, -1.0);
            roots[3 * n / 4] = Complex64::new(0.0, 1.0);
        }
        Self { roots }
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// `e^{-j2π e/N}` for any integer exponent.
    #[inline]
    pub fn root(&self, e: i64) -> Complex64 {
        self.roots[e.rem_euclid(self.roots.len() as i64) as usize]
    }
}

/// Maps an L-tap impulse response onto N subcarriers,
/// `H[n] = Σ_l h[l] e^{-j2πln/N}`, which is `√N F [h; 0]` for the unitary
/// DFT `F`.
#[derive(Debug, Clone)]
pub struct TapDft {
    n: usize,
    taps: usize,
    // Row-major N×L twiddles.
    twiddle: Vec<Complex64>,
}

impl TapDft {
    pub fn new(n: usize, taps: usize) -> Self {
        let table = RootTable::new(n);
        let mut twiddle = Vec::with_capacity(n * taps);
        for k in 0..n {
            for l in 0..taps {
                twiddle.push(table.root((k * l) as i64));
            }
        }
        Self { n, taps, twiddle }
    }

    pub fn subcarriers(&self) -> usize {
        self.n
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    pub fn synthesize(&self, h: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(h.len(), self.taps);
        assert_eq!(out.len(), self.n);
        for (k, o) in out.iter_mut().enumerate() {
            let row = &self.twiddle[k * self.taps..(k + 1) * self.taps];
            *o = row.iter().zip(h).map(|(w, x)| w * x).sum();
        }
    }

    /// The N×L synthesis matrix (leftmost L columns of `√N F`).
    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_row_slice(self.n, self.taps, &self.twiddle)
    }
}
