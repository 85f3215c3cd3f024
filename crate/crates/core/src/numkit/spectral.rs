//! Hermitian spectral calculus and operator norms.
//!
//! Every routine first splits the matrix into the connected components of its
//! nonzero pattern and works block by block. The split is an exact permutation
//! similarity, so results are unchanged; it only keeps block-diagonal inputs
//! (diagonal multiplication operators, lifted Fock operators) cheap.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{CMatrix, ZERO};
use crate::error::{Error, Result};

/// Default spectral cutoff for support projections and pseudo-inverses.
pub const DEFAULT_CUTOFF: f64 = 1e-8;

/// Relative tolerance for the "is Hermitian" precondition of the calculus.
pub const HERMITIAN_RTOL: f64 = 1e-9;

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Groups `0..n` by root, ordered by smallest member.
    fn groups(&mut self, n: usize) -> Vec<Vec<usize>> {
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = self.find(i);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(i);
        }
        out
    }
}

/// Index groups of a square matrix such that entries between different groups vanish.
pub fn symmetric_components(n: usize, nonzeros: impl Iterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(n);
    for (i, j) in nonzeros {
        uf.union(i, j);
    }
    uf.groups(n)
}

/// (row set, column set) pairs of the bipartite nonzero pattern; rows or
/// columns touching no nonzero are omitted.
pub fn bipartite_components(
    rows: usize,
    cols: usize,
    nonzeros: impl Iterator<Item = (usize, usize)>,
) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut uf = UnionFind::new(rows + cols);
    let mut touched = vec![false; rows + cols];
    for (i, j) in nonzeros {
        uf.union(i, rows + j);
        touched[i] = true;
        touched[rows + j] = true;
    }
    uf.groups(rows + cols)
        .into_iter()
        .filter(|g| touched[g[0]])
        .map(|g| {
            let (r, c): (Vec<usize>, Vec<usize>) = g.into_iter().partition(|&x| x < rows);
            (r, c.into_iter().map(|x| x - rows).collect())
        })
        .collect()
}

fn dense_nonzeros(m: &CMatrix) -> impl Iterator<Item = (usize, usize)> + '_ {
    let cols = m.cols();
    m.as_slice()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.re != 0.0 || z.im != 0.0)
        .map(move |(idx, _)| (idx / cols, idx % cols))
}

fn to_nalgebra(m: &CMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(m.rows(), m.cols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// Eigenvalues of a Hermitian block, ascending.
fn block_eigenvalues(block: &CMatrix) -> Vec<f64> {
    if block.rows() == 1 {
        return vec![block[(0, 0)].re];
    }
    let mut ev: Vec<f64> = to_nalgebra(block).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Largest singular value of a dense block.
fn block_norm(block: &CMatrix) -> f64 {
    if block.rows() == 1 && block.cols() == 1 {
        return block[(0, 0)].norm();
    }
    if block.rows() == 1 || block.cols() == 1 {
        return block.frobenius();
    }
    let gram = if block.rows() <= block.cols() {
        block.try_matmul(&block.adjoint())
    } else {
        block.adjoint().try_matmul(block)
    }
    .expect("gram shapes agree");
    let top = block_eigenvalues(&hermitian_part(&gram))
        .last()
        .copied()
        .unwrap_or(0.0);
    top.max(0.0).sqrt()
}

/// Operator norm ‖M‖ (largest singular value).
pub fn operator_norm(m: &CMatrix) -> Result<f64> {
    m.check_finite()?;
    let comps = bipartite_components(m.rows(), m.cols(), dense_nonzeros(m));
    Ok(comps
        .iter()
        .map(|(r, c)| block_norm(&m.submatrix(r, c)))
        .fold(0.0, f64::max))
}

fn check_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    m.check_finite()?;
    match m.hermitian_deviation() {
        None => Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        ))),
        Some(dev) if dev > tol => Err(Error::NotHermitian { deviation: dev, tol }),
        Some(_) => Ok(()),
    }
}

fn default_hermitian_tol(m: &CMatrix) -> f64 {
    HERMITIAN_RTOL * m.max_abs().max(1.0)
}

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(m, default_hermitian_tol(m))?;
    let h = hermitian_part(m);
    let comps = symmetric_components(h.rows(), dense_nonzeros(&h));
    let mut ev: Vec<f64> = comps
        .iter()
        .flat_map(|c| block_eigenvalues(&h.submatrix(c, c)))
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    Ok(ev)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

/// Positive-semidefiniteness test: `is_psd` iff the smallest eigenvalue is ≥ −tol.
pub fn psd_check(m: &CMatrix, tol: f64) -> Result<PsdReport> {
    check_hermitian(m, tol.max(default_hermitian_tol(m)))?;
    let h = hermitian_part(m);
    let comps = symmetric_components(h.rows(), dense_nonzeros(&h));
    let min_eigenvalue = comps
        .iter()
        .map(|c| block_eigenvalues(&h.submatrix(c, c))[0])
        .fold(f64::INFINITY, f64::min);
    let min_eigenvalue = if min_eigenvalue.is_finite() { min_eigenvalue } else { 0.0 };
    Ok(PsdReport {
        is_psd: min_eigenvalue >= -tol,
        min_eigenvalue,
    })
}

/// U f(D) U* for the eigendecomposition M = U D U*.
pub fn hermitian_funcalc(m: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    check_hermitian(m, default_hermitian_tol(m))?;
    let h = hermitian_part(m);
    let n = h.rows();
    let comps = symmetric_components(n, dense_nonzeros(&h));
    let mut out = CMatrix::zeros(n, n);
    for c in comps {
        let block = h.submatrix(&c, &c);
        let fb = block_funcalc(&block, &f);
        out.set_submatrix(&c, &c, &fb);
    }
    Ok(out)
}

fn block_funcalc(block: &CMatrix, f: &impl Fn(f64) -> f64) -> CMatrix {
    let n = block.rows();
    if n == 1 {
        return CMatrix::from_real_diag(&[f(block[(0, 0)].re)]);
    }
    let eig = SymmetricEigen::new(to_nalgebra(block));
    let u = &eig.eigenvectors;
    let fd: Vec<f64> = eig.eigenvalues.iter().map(|&l| f(l)).collect();
    CMatrix::from_fn(n, n, |i, j| {
        let mut acc = ZERO;
        for (k, &fk) in fd.iter().enumerate() {
            if fk != 0.0 {
                acc += u[(i, k)] * u[(j, k)].conj() * fk;
            }
        }
        acc
    })
}

/// Half-open step g_θ: t ≥ θ ↦ 1, t < θ ↦ 0.
pub fn step(theta: f64) -> impl Fn(f64) -> f64 {
    move |t| if t >= theta { 1.0 } else { 0.0 }
}

fn check_positive_spectrum(m: &CMatrix, cutoff: f64) -> Result<()> {
    let ev = hermitian_eigenvalues(m)?;
    if let Some(&lo) = ev.first() {
        if lo < -cutoff {
            return Err(Error::NotPositive {
                min_eigenvalue: lo,
                cutoff,
            });
        }
    }
    Ok(())
}

/// Support inverse square root: λ ≥ cutoff ↦ λ^{-1/2}, λ < cutoff ↦ 0.
pub fn pseudo_inverse_sqrt(m: &CMatrix, cutoff: f64) -> Result<CMatrix> {
    check_positive_spectrum(m, cutoff)?;
    hermitian_funcalc(m, |l| if l >= cutoff { l.powf(-0.5) } else { 0.0 })
}

/// Square root of a positive semidefinite matrix (negative noise clipped).
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    check_positive_spectrum(m, DEFAULT_CUTOFF)?;
    hermitian_funcalc(m, |l| l.max(0.0).sqrt())
}
