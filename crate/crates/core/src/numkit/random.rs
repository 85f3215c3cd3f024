//! Random matrices for the randomized suites. All draws come from a caller
//! supplied generator, so a suite is reproducible from its seed and stream.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{CMatrix, ZERO};
use super::spectral::operator_norm;
use crate::error::Result;

/// Entries with independent standard normal real and imaginary parts.
pub fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Haar-ish unitary: Gram–Schmidt on the columns of a Gaussian matrix.
pub fn unitary(n: usize, rng: &mut impl Rng) -> CMatrix {
    loop {
        let g = gaussian(n, n, rng);
        let mut q = CMatrix::zeros(n, n);
        let mut ok = true;
        for j in 0..n {
            let mut v: Vec<Complex64> = (0..n).map(|i| g[(i, j)]).collect();
            // Two passes keep the columns orthonormal to machine precision.
            for _ in 0..2 {
                for k in 0..j {
                    let dot: Complex64 = (0..n).map(|i| q[(i, k)].conj() * v[i]).sum();
                    for (i, vi) in v.iter_mut().enumerate() {
                        *vi -= dot * q[(i, k)];
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for (i, vi) in v.iter().enumerate() {
                q[(i, j)] = vi / norm;
            }
        }
        if ok {
            return q;
        }
    }
}

/// Hermitian matrix (G + G*)/2.
pub fn hermitian(n: usize, rng: &mut impl Rng) -> CMatrix {
    let g = gaussian(n, n, rng);
    CMatrix::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5)
}

/// G·G* with G of size n × rank.
pub fn psd(n: usize, rank: usize, rng: &mut impl Rng) -> CMatrix {
    let g = gaussian(n, rank, rng);
    g.try_matmul(&g.adjoint()).expect("square product")
}

/// Positive contractions a ≤ b: b = a + cc*, both scaled by ‖a + cc*‖.
pub fn ordered_pair(n: usize, rng: &mut impl Rng) -> Result<(CMatrix, CMatrix)> {
    let rank_a = rng.random_range(1..=n);
    let rank_c = rng.random_range(1..=n);
    let a = psd(n, rank_a, rng);
    let b = a.try_add(&psd(n, rank_c, rng))?;
    let s = operator_norm(&b)?;
    if s == 0.0 {
        return Ok((CMatrix::zeros(n, n), CMatrix::zeros(n, n)));
    }
    Ok((a.scale_real(1.0 / s), b.scale_real(1.0 / s)))
}

/// Unit vector with Gaussian direction.
pub fn unit_vector(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// |v⟩⟨v|.
pub fn rank_one(v: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
}

/// Zero-padded copy of `m` in the top-left corner of an n × n matrix.
pub fn pad(m: &CMatrix, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| if i < m.rows() && j < m.cols() { m[(i, j)] } else { ZERO })
}
