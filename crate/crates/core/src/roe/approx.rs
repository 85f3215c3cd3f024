use std::sync::Arc;

use serde::Serialize;

use super::cover::{shipped_cover, DiscreteCover};
use super::hfamily::{commutator_report, diag_commutator, HFamily};
use super::space::{BandMatrix, CoarseSpace};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::numkit::{CMatrix, SpMatrix};

/// An element of A^(i) = ∏_U M_{|B_{r−1}(U)|}: one dense block per set of the
/// family, each acting on the ascending index list of its neighbourhood.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyBlocks {
    dim: usize,
    supports: Arc<Vec<Vec<usize>>>,
    blocks: Vec<CMatrix>,
}

impl FamilyBlocks {
    /// Supports must be pairwise disjoint and inside 0..dim.
    pub fn new(dim: usize, supports: Arc<Vec<Vec<usize>>>, blocks: Vec<CMatrix>) -> Result<Self> {
        if supports.len() != blocks.len() {
            return Err(crate::error::dim_err(format!("{} blocks", supports.len()), blocks.len()));
        }
        let mut seen = vec![false; dim];
        for (s, b) in supports.iter().zip(&blocks) {
            if b.rows() != s.len() || b.cols() != s.len() {
                return Err(crate::error::dim_err(
                    format!("{0}x{0} block", s.len()),
                    format!("{}x{}", b.rows(), b.cols()),
                ));
            }
            for &x in s {
                if x >= dim || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::InvalidInput(format!("block supports overlap or leave the space at {x}")));
                }
            }
        }
        Ok(FamilyBlocks { dim, supports, blocks })
    }

    /// P_U a P_U for every support U.
    pub fn compress(a: &SpMatrix, supports: Arc<Vec<Vec<usize>>>) -> Result<Self> {
        let dense = a.to_dense();
        let blocks = supports.iter().map(|s| dense.submatrix(s, s)).collect();
        Self::new(a.rows(), supports, blocks)
    }

    pub fn supports(&self) -> &[Vec<usize>] {
        &self.supports
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    /// Block-diagonal embedding into the operators on ℓ²(X).
    pub fn embed(&self) -> SpMatrix {
        let trip = self.supports.iter().zip(&self.blocks).flat_map(|(s, b)| {
            s.iter().enumerate().flat_map(move |(p, &x)| s.iter().enumerate().map(move |(q, &y)| (x, y, b[(p, q)])))
        });
        SpMatrix::from_triplets(self.dim, self.dim, trip)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.try_matmul(b)).collect::<Result<_>>()?;
        Ok(FamilyBlocks {
            dim: self.dim,
            supports: self.supports.clone(),
            blocks,
        })
    }

    pub fn adjoint(&self) -> Self {
        FamilyBlocks {
            dim: self.dim,
            supports: self.supports.clone(),
            blocks: self.blocks.iter().map(CMatrix::adjoint).collect(),
        }
    }

    /// max over blocks of the block norm, i.e. the norm in the product algebra.
    pub fn norm(&self) -> Result<f64> {
        self.blocks
            .iter()
            .map(crate::numkit::operator_norm)
            .try_fold(0.0_f64, |m, v| v.map(|v| m.max(v)))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.supports != other.supports {
            return Err(Error::InvalidInput("elements of different block algebras".into()));
        }
        Ok(())
    }
}

/// The data of Ψ_r and Φ_r for one cover and scale.
#[derive(Debug, Clone)]
pub struct RoeApprox {
    hf: HFamily,
    supports: Vec<Arc<Vec<Vec<usize>>>>,
}

impl RoeApprox {
    pub fn new(space: &CoarseSpace, cover: &DiscreteCover, r: usize) -> Result<Self> {
        let hf = HFamily::new(space, cover, r)?;
        let supports = cover
            .families()
            .iter()
            .map(|fam| Arc::new(fam.iter().map(|u| space.neighborhood(u, r as u64 - 1)).collect()))
            .collect();
        Ok(RoeApprox { hf, supports })
    }

    pub fn h_family(&self) -> &HFamily {
        &self.hf
    }

    /// B_{r−1}(U) for every U of family i.
    pub fn supports(&self, i: usize) -> &[Vec<usize>] {
        &self.supports[i]
    }

    /// h_i a h_i, uncompressed.
    pub fn sandwich(&self, i: usize, a: &SpMatrix) -> SpMatrix {
        let h = &self.hf.h_norm()[i];
        a.schur(|x, y| h[x] * h[y])
    }

    /// Ψ_r(a): per family, h_i a h_i compressed to ∏_U M_{|B_{r−1}(U)|}, with
    /// the norm of the discarded off-block part.
    pub fn psi(&self, a: &SpMatrix) -> Result<PsiOutput> {
        let mut families = Vec::with_capacity(self.supports.len());
        let mut residuals = Vec::with_capacity(self.supports.len());
        for (i, supports) in self.supports.iter().enumerate() {
            let s = self.sandwich(i, a);
            let fb = FamilyBlocks::compress(&s, supports.clone())?;
            residuals.push(s.try_sub(&fb.embed())?.operator_norm()?);
            families.push(fb);
        }
        Ok(PsiOutput { families, residuals })
    }

    /// Φ_r(a_0 ⊕ … ⊕ a_n) = a_0 + … + a_n.
    pub fn phi(&self, parts: &[FamilyBlocks]) -> Result<SpMatrix> {
        let dim = self.hf.h_total().len();
        parts.iter().try_fold(SpMatrix::zeros(dim, dim), |acc, p| acc.try_add(&p.embed()))
    }
}

#[derive(Debug, Clone)]
pub struct PsiOutput {
    pub families: Vec<FamilyBlocks>,
    /// ‖h_i a h_i − compression‖ per family.
    pub residuals: Vec<f64>,
}

impl PsiOutput {
    pub fn residual(&self) -> f64 {
        self.residuals.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiPsiReport {
    /// ‖Φ_rΨ_r(a) − a‖.
    pub defect: f64,
    /// Σ_i ‖[a, h_i]‖.
    pub commutator_sum: f64,
    /// Σ_i off-block residual of Ψ_r(a).
    pub residual: f64,
    /// ‖Φ_rΨ_r(1) − 1‖.
    pub unital_defect: f64,
    pub holds: bool,
}

pub fn phi_psi_defect(a: &BandMatrix, approx: &RoeApprox) -> Result<PhiPsiReport> {
    let m = a.matrix();
    let psi = approx.psi(m)?;
    let defect = approx.phi(&psi.families)?.try_sub(m)?.operator_norm()?;
    let commutator_sum = approx
        .h_family()
        .h_norm()
        .iter()
        .map(|h| diag_commutator(h, m).operator_norm())
        .sum::<Result<f64>>()?;
    let id = SpMatrix::identity(m.rows());
    let unital_defect = approx.phi(&approx.psi(&id)?.families)?.try_sub(&id)?.max_abs();
    let residual = psi.residual();
    Ok(PhiPsiReport {
        defect,
        commutator_sum,
        residual,
        unital_defect,
        holds: defect <= commutator_sum + residual + 1e-9,
    })
}

/// One row of the convergence table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub r: usize,
    pub defect: f64,
    pub commutator_sum: f64,
    /// (n+1)/r·w(a)·b(a)·‖a‖.
    pub paper_bound: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// ‖[h, a]‖ per r, against `paper_bound`.
    pub commutator_total: Vec<f64>,
    pub unital_defect: Vec<f64>,
    /// Least-squares C in defect ≈ C/r.
    pub fitted_c: f64,
    pub strictly_decreasing: bool,
    pub bound_holds: bool,
    pub defect_holds: bool,
}

impl ConvergenceReport {
    pub fn max_unital_defect(&self) -> f64 {
        self.unital_defect.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

/// Runs Ψ_r/Φ_r at each scale with the shipped cover at R = r (so every
/// family is 2r-discrete). Scales are independent; rows come back in r order.
pub fn convergence(a: &BandMatrix, rs: &[usize], exec: Exec) -> Result<ConvergenceReport> {
    let space = a.space().clone();
    let per_r = exec.map_slice(rs, |&r| -> Result<(ConvergenceRow, f64, f64, bool, bool)> {
        let cover = shipped_cover(&space, r)?;
        let approx = RoeApprox::new(&space, &cover, r)?;
        let comm = commutator_report(a, approx.h_family())?;
        let d = phi_psi_defect(a, &approx)?;
        Ok((
            ConvergenceRow {
                r,
                defect: d.defect,
                commutator_sum: d.commutator_sum,
                paper_bound: comm.paper_bound,
                residual: d.residual,
            },
            comm.total,
            d.unital_defect,
            comm.holds,
            d.holds,
        ))
    });
    let mut rows = Vec::with_capacity(rs.len());
    let mut commutator_total = Vec::new();
    let mut unital_defect = Vec::new();
    let (mut bound_holds, mut defect_holds) = (true, true);
    for item in per_r {
        let (row, total, unital, b, d) = item?;
        rows.push(row);
        commutator_total.push(total);
        unital_defect.push(unital);
        bound_holds &= b;
        defect_holds &= d;
    }
    let strictly_decreasing = rows.windows(2).all(|w| w[1].defect < w[0].defect);
    let (num, den) = rows.iter().fold((0.0, 0.0), |(n, d), row| {
        let inv = 1.0 / row.r as f64;
        (n + row.defect * inv, d + inv * inv)
    });
    Ok(ConvergenceReport {
        rows,
        commutator_total,
        unital_defect,
        fitted_c: if den > 0.0 { num / den } else { 0.0 },
        strictly_decreasing,
        bound_holds,
        defect_holds,
    })
}
