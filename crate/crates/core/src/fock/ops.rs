use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numkit::{SpMatrix, ONE};

use super::words::{TruncatedFock, Word};

/// Operator on a truncated Fock basis, stored sparse in the word basis.
#[derive(Debug, Clone)]
pub struct LevelOperator {
    fock: Arc<TruncatedFock>,
    matrix: SpMatrix,
}

impl LevelOperator {
    pub fn new(fock: Arc<TruncatedFock>, matrix: SpMatrix) -> Result<Self> {
        if matrix.rows() != fock.dim() || matrix.cols() != fock.dim() {
            return Err(crate::error::dim_err(
                format!("{0}x{0}", fock.dim()),
                format!("{}x{}", matrix.rows(), matrix.cols()),
            ));
        }
        Ok(LevelOperator { fock, matrix })
    }

    pub fn zero(fock: &Arc<TruncatedFock>) -> Self {
        let d = fock.dim();
        LevelOperator {
            fock: fock.clone(),
            matrix: SpMatrix::zeros(d, d),
        }
    }

    pub fn identity(fock: &Arc<TruncatedFock>) -> Self {
        LevelOperator {
            fock: fock.clone(),
            matrix: SpMatrix::identity(fock.dim()),
        }
    }

    /// Projection onto the levels [lo, hi).
    pub fn level_projection(fock: &Arc<TruncatedFock>, lo: usize, hi: usize) -> Self {
        let d = fock.dim();
        LevelOperator {
            fock: fock.clone(),
            matrix: SpMatrix::from_diag(fock.levels_range(lo, hi).map(|i| (i, ONE)), d),
        }
    }

    pub fn fock(&self) -> &Arc<TruncatedFock> {
        &self.fock
    }

    pub fn matrix(&self) -> &SpMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> SpMatrix {
        self.matrix
    }

    /// max |level(x) − level(y)| over nonzero entries.
    pub fn level_band(&self) -> usize {
        self.matrix
            .iter()
            .map(|(i, j, _)| self.fock.level(i).abs_diff(self.fock.level(j)))
            .max()
            .unwrap_or(0)
    }

    /// Smallest and largest level touched by a nonzero entry.
    pub fn level_support(&self) -> Option<(usize, usize)> {
        self.matrix
            .iter()
            .flat_map(|(i, j, _)| [self.fock.level(i), self.fock.level(j)])
            .fold(None, |acc, l| match acc {
                None => Some((l, l)),
                Some((lo, hi)) => Some((lo.min(l), hi.max(l))),
            })
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.fock, &other.fock) && *self.fock != *other.fock {
            return Err(Error::InvalidInput("operators live on different truncations".into()));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.with(self.matrix.try_matmul(&other.matrix)?))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.with(self.matrix.try_add(&other.matrix)?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.with(self.matrix.try_sub(&other.matrix)?))
    }

    pub fn adjoint(&self) -> Self {
        self.with(self.matrix.adjoint())
    }

    pub fn norm(&self) -> Result<f64> {
        self.matrix.operator_norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.max_abs()
    }

    /// P a P with P the projection onto levels [lo, hi).
    pub fn compress_levels(&self, lo: usize, hi: usize) -> Self {
        let f = &self.fock;
        self.with(self.matrix.filter(|i, j| {
            let (a, b) = (f.level(i), f.level(j));
            (lo..hi).contains(&a) && (lo..hi).contains(&b)
        }))
    }

    /// Entrywise product with a profile of the two levels.
    pub fn schur_levels(&self, profile: impl Fn(usize, usize) -> f64) -> Self {
        let f = &self.fock;
        self.with(self.matrix.schur(|i, j| profile(f.level(i), f.level(j))))
    }

    fn with(&self, matrix: SpMatrix) -> Self {
        LevelOperator {
            fock: self.fock.clone(),
            matrix,
        }
    }
}

/// T_i (1-based letter): w ↦ iw, zero where iw leaves the basis (the top
/// level, or the sector).
pub fn creation(fock: &Arc<TruncatedFock>, i: usize) -> Result<LevelOperator> {
    if i == 0 || i > fock.n() {
        return Err(Error::InvalidInput(format!("letter {i} outside 1..={}", fock.n())));
    }
    let letter = Word(vec![(i - 1) as u8]);
    let d = fock.dim();
    let triplets = fock
        .words()
        .iter()
        .enumerate()
        .filter_map(|(c, w)| fock.index_of(&letter.concat(w.letters())).map(|r| (r, c, ONE)));
    LevelOperator::new(fock.clone(), SpMatrix::from_triplets(d, d, triplets))
}

/// T_μ T_ν*: entry (μw, νw) = 1 for every suffix w keeping both words in the
/// basis.
pub fn word_op(fock: &Arc<TruncatedFock>, mu: &Word, nu: &Word) -> Result<LevelOperator> {
    for w in [mu, nu] {
        if w.len() > fock.depth() {
            return Err(Error::InvalidInput(format!("word {w} longer than depth {}", fock.depth())));
        }
        if w.max_letter().is_some_and(|c| c > fock.n()) {
            return Err(Error::InvalidInput(format!("word {w} uses letters outside 1..={}", fock.n())));
        }
    }
    let d = fock.dim();
    let mut triplets = Vec::new();
    for t in 0..=fock.depth() - mu.len().max(nu.len()) {
        for w in fock.common_extensions(mu, nu, t)? {
            if let (Some(r), Some(c)) = (fock.index_of(&mu.concat(&w)), fock.index_of(&nu.concat(&w))) {
                triplets.push((r, c, ONE));
            }
        }
    }
    LevelOperator::new(fock.clone(), SpMatrix::from_triplets(d, d, triplets))
}

/// e_{μ,ν} = |μ⟩⟨ν|.
pub fn matrix_unit(fock: &Arc<TruncatedFock>, mu: &Word, nu: &Word) -> Result<LevelOperator> {
    let (r, c) = match (fock.index_of(mu), fock.index_of(nu)) {
        (Some(r), Some(c)) => (r, c),
        _ => return Err(Error::InvalidInput(format!("e_({mu},{nu}) leaves the basis"))),
    };
    let d = fock.dim();
    LevelOperator::new(fock.clone(), SpMatrix::from_triplets(d, d, [(r, c, ONE)]))
}
