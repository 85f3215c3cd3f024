use std::collections::HashMap;

use num_complex::Complex64;

use super::matrix::{CMatrix, ZERO};
use super::spectral;
use crate::error::{dim_err, Error, Result};

/// Sparse complex matrix as a coordinate list sorted by (row, col).
///
/// Every operation costs O(nnz) (times a log factor), independent of the
/// ambient dimension; that is what makes streaming thousands of matrix-unit
/// images through the order-zero checks affordable on lifted Fock operators.
#[derive(Debug, Clone, PartialEq)]
pub struct SpMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

fn is_zero(z: Complex64) -> bool {
    z.re == 0.0 && z.im == 0.0
}

impl SpMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SpMatrix {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag((0..n).map(|i| (i, super::matrix::ONE)), n)
    }

    /// Diagonal matrix from `(index, value)` pairs.
    pub fn from_diag(diag: impl IntoIterator<Item = (usize, Complex64)>, n: usize) -> Self {
        Self::from_triplets(n, n, diag.into_iter().map(|(i, v)| (i, i, v)))
    }

    /// Builds from triplets; duplicates are summed and exact zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut entries: Vec<_> = triplets.into_iter().collect();
        for &(i, j, _) in &entries {
            assert!(i < rows && j < cols, "entry ({i}, {j}) outside {rows}x{cols}");
        }
        normalize(&mut entries);
        SpMatrix { rows, cols, entries }
    }

    pub fn from_dense(m: &CMatrix) -> Self {
        let cols = m.cols();
        let entries = m
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, z)| !is_zero(**z))
            .map(|(idx, z)| (idx / cols, idx % cols, *z))
            .collect();
        SpMatrix {
            rows: m.rows(),
            cols,
            entries,
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for &(i, j, v) in &self.entries {
            out[(i, j)] = v;
        }
        out
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Entries of row `i`.
    pub fn row(&self, i: usize) -> &[(usize, usize, Complex64)] {
        let lo = self.entries.partition_point(|e| e.0 < i);
        let hi = self.entries.partition_point(|e| e.0 <= i);
        &self.entries[lo..hi]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self.entries.binary_search_by(|e| (e.0, e.1).cmp(&(i, j))) {
            Ok(pos) => self.entries[pos].2,
            Err(_) => ZERO,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.iter().map(|(i, j, v)| (j, i, v.conj())))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_triplets(self.rows, self.cols, self.iter().map(|(i, j, v)| (i, j, v * c)))
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Keeps only entries for which `keep(i, j)` holds.
    pub fn filter(&self, keep: impl Fn(usize, usize) -> bool) -> Self {
        SpMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.iter().filter(|(i, j, _)| keep(*i, *j)).collect(),
        }
    }

    /// Entrywise product with a scalar profile given as a function of the index pair.
    pub fn schur(&self, profile: impl Fn(usize, usize) -> f64) -> Self {
        Self::from_triplets(
            self.rows,
            self.cols,
            self.iter().map(|(i, j, v)| (i, j, v * profile(i, j))),
        )
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(dim_err(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self::from_triplets(self.rows, self.cols, self.iter().chain(other.iter())))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self::from_triplets(
            self.rows,
            self.cols,
            self.iter().chain(other.iter().map(|(i, j, v)| (i, j, -v))),
        ))
    }

    /// Row-driven product: cost is nnz(self) row lookups into `other`.
    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(dim_err(
                format!("inner dimension {}", self.cols),
                format!("{}", other.rows),
            ));
        }
        let mut out = Vec::new();
        for &(i, k, a) in &self.entries {
            for &(_, j, b) in other.row(k) {
                out.push((i, j, a * b));
            }
        }
        normalize(&mut out);
        Ok(SpMatrix {
            rows: self.rows,
            cols: other.cols,
            entries: out,
        })
    }

    /// `g · self` for Hermitian `g`, driven by the entries of `self`: column k
    /// of `g` is the conjugate of row k, so a large `g` costs nothing extra.
    pub fn hermitian_left_mul(&self, g: &Self) -> Result<Self> {
        if g.cols != self.rows || g.rows != g.cols {
            return Err(dim_err(format!("square {}", self.rows), format!("{}x{}", g.rows, g.cols)));
        }
        let mut out = Vec::new();
        for &(k, j, x) in &self.entries {
            for &(_, i, v) in g.row(k) {
                out.push((i, j, v.conj() * x));
            }
        }
        normalize(&mut out);
        Ok(SpMatrix {
            rows: g.rows,
            cols: self.cols,
            entries: out,
        })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.try_matmul(other)?.try_sub(&other.try_matmul(self)?)
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0_f64, |m, (_, _, v)| m.max(v.norm()))
    }

    pub fn check_finite(&self) -> Result<()> {
        for (i, j, v) in self.iter() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
        Ok(())
    }

    /// Operator norm, computed per connected component of the nonzero pattern.
    pub fn operator_norm(&self) -> Result<f64> {
        self.check_finite()?;
        let mut best = 0.0_f64;
        for (r, c) in self.components(false) {
            let block = self.dense_block(&r, &c);
            best = best.max(spectral::operator_norm(&block)?);
        }
        Ok(best)
    }

    /// Hermitian functional calculus per component of the pattern. Indices
    /// outside every component correspond to the eigenvalue 0, so `f(0)` must
    /// vanish unless the matrix has a nonzero diagonal everywhere it matters;
    /// a nonzero `f(0)` is applied to every untouched diagonal index.
    pub fn hermitian_funcalc(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        if self.rows != self.cols {
            return Err(dim_err("square matrix", format!("{}x{}", self.rows, self.cols)));
        }
        let n = self.rows;
        let mut trip = Vec::new();
        let mut touched = vec![false; if f(0.0) != 0.0 { n } else { 0 }];
        for (c, _) in self.components(true) {
            let block = self.dense_block(&c, &c);
            let fb = spectral::hermitian_funcalc(&block, &f)?;
            for (a, &i) in c.iter().enumerate() {
                if !touched.is_empty() {
                    touched[i] = true;
                }
                for (b, &j) in c.iter().enumerate() {
                    trip.push((i, j, fb[(a, b)]));
                }
            }
        }
        let f0 = Complex64::new(f(0.0), 0.0);
        for (i, t) in touched.iter().enumerate() {
            if !t {
                trip.push((i, i, f0));
            }
        }
        Ok(Self::from_triplets(n, n, trip))
    }

    /// Connected components of the nonzero pattern over touched indices only.
    /// With `symmetric`, rows and columns share one index set and each
    /// component is returned as (indices, indices).
    fn components(&self, symmetric: bool) -> Vec<(Vec<usize>, Vec<usize>)> {
        // Compact ids: rows first, then columns (or shared when symmetric).
        let mut ids: HashMap<(bool, usize), usize> = HashMap::new();
        let mut keys: Vec<(bool, usize)> = Vec::new();
        let mut id_of = |key: (bool, usize), keys: &mut Vec<(bool, usize)>| -> usize {
            *ids.entry(key).or_insert_with(|| {
                keys.push(key);
                keys.len() - 1
            })
        };
        let mut edges = Vec::with_capacity(self.entries.len());
        for &(i, j, _) in &self.entries {
            let a = id_of((false, i), &mut keys);
            let b = id_of((!symmetric, j), &mut keys);
            edges.push((a, b));
        }
        let groups = spectral::symmetric_components(keys.len(), edges.into_iter());
        groups
            .into_iter()
            .map(|g| {
                let mut r: Vec<usize> = Vec::new();
                let mut c: Vec<usize> = Vec::new();
                for id in g {
                    let (is_col, idx) = keys[id];
                    if is_col {
                        c.push(idx);
                    } else {
                        r.push(idx);
                    }
                }
                r.sort_unstable();
                c.sort_unstable();
                if symmetric {
                    c = r.clone();
                }
                (r, c)
            })
            .collect()
    }

    fn dense_block(&self, rows: &[usize], cols: &[usize]) -> CMatrix {
        let col_pos: HashMap<usize, usize> = cols.iter().enumerate().map(|(b, &j)| (j, b)).collect();
        let mut block = CMatrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for &(_, j, v) in self.row(i) {
                if let Some(&b) = col_pos.get(&j) {
                    block[(a, b)] = v;
                }
            }
        }
        block
    }
}

fn normalize(entries: &mut Vec<(usize, usize, Complex64)>) {
    entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut out: Vec<(usize, usize, Complex64)> = Vec::with_capacity(entries.len());
    for &(i, j, v) in entries.iter() {
        match out.last_mut() {
            Some(last) if last.0 == i && last.1 == j => last.2 += v,
            _ => out.push((i, j, v)),
        }
    }
    out.retain(|e| !is_zero(e.2));
    *entries = out;
}
