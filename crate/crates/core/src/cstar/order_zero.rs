//! Order-zero structure: φ = h·π_φ with h = φ(1) and π_φ a *-homomorphism
//! commuting with h.
//!
//! On a finite-dimensional domain, π_φ is realized on the support of h as
//! π(x) = h^{-1/2} φ(x) h^{-1/2} (pseudo-inverse with a spectral cutoff). The
//! residual measures how far that candidate is from the structure theorem,
//! using only the matrix-unit relations, so the work is O(Σ r_j²) products
//! instead of O(dim⁴):
//!
//! * π(e_ab) = π(e_a0)π(e_0b) and π(e_0a)π(e_b0) = δ_ab π(e_00) in each block,
//! * φ(e_ab)* = φ(e_ba),
//! * Σ_j π(1_j) is idempotent (block units are orthogonal projections),
//! * φ(e_ab) = π(e_ab)·h and [h, π(e_ab)] = 0.
//!
//! Together these hold exactly iff π is a *-homomorphism with φ = π·h.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::algebra::{FdAlgebra, FdElement};
use super::cpmap::CpMap;
use crate::error::{Error, Result};
use crate::exec::{max_f64, Exec};
use crate::numkit::{psd_check, psd_sqrt, CMatrix, Operator, DEFAULT_CUTOFF, ONE, ZERO};

/// A linear map out of a finite-dimensional C*-algebra, known through the
/// images of its matrix units.
pub trait BlockMap: Sync {
    type Op: Operator;
    fn domain(&self) -> &FdAlgebra;
    fn unit_image(&self, block: usize, a: usize, b: usize) -> Self::Op;
}

impl BlockMap for CpMap {
    type Op = CMatrix;
    fn domain(&self) -> &FdAlgebra {
        CpMap::domain(self)
    }
    fn unit_image(&self, block: usize, a: usize, b: usize) -> CMatrix {
        CpMap::unit_image(self, block, a, b).to_matrix()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ResidualBreakdown {
    pub multiplicativity: f64,
    pub adjoint: f64,
    pub block_orthogonality: f64,
    pub reconstruction: f64,
    pub commutation: f64,
}

impl ResidualBreakdown {
    pub fn max(&self) -> f64 {
        max_f64([
            self.multiplicativity,
            self.adjoint,
            self.block_orthogonality,
            self.reconstruction,
            self.commutation,
        ])
    }
}

#[derive(Debug, Clone)]
pub struct OrderZeroDecomposition<Op> {
    /// φ(1) on the chosen blocks.
    pub h: Op,
    /// h^{-1/2} on the support of h, 0 elsewhere.
    pub h_pinv_sqrt: Op,
    pub residual: f64,
    pub breakdown: ResidualBreakdown,
}

impl<Op: Operator> OrderZeroDecomposition<Op> {
    /// π(x) from φ(x).
    pub fn pi_of(&self, phi_x: &Op) -> Op {
        phi_x.hermitian_left_mul(&self.h_pinv_sqrt).mul(&self.h_pinv_sqrt)
    }
}

fn unit_sum<M: BlockMap>(map: &M, blocks: &[usize]) -> Option<M::Op> {
    let mut acc: Option<M::Op> = None;
    for &j in blocks {
        for a in 0..map.domain().block_size(j) {
            let img = map.unit_image(j, a, a);
            acc = Some(match acc {
                None => img,
                Some(s) => s.add(&img),
            });
        }
    }
    acc
}

/// Decomposes the restriction of `map` to `blocks` (typically one color).
/// An empty block list gives a zero decomposition with residual 0.
pub fn order_zero_decompose<M: BlockMap>(
    map: &M,
    blocks: &[usize],
    cutoff: f64,
    exec: Exec,
) -> Result<OrderZeroDecomposition<M::Op>> {
    let Some(h) = unit_sum(map, blocks) else {
        return Err(Error::InvalidInput("no blocks to decompose".into()));
    };
    let g = h.funcalc(&|t| if t >= cutoff { t.powf(-0.5) } else { 0.0 })?;
    let pi = |x: &M::Op| x.hermitian_left_mul(&g).mul(&g);

    // Per block: π(e_a0), π(e_0b), π(1_j).
    struct Edges<Op> {
        col0: Vec<Op>,
        row0: Vec<Op>,
    }
    let edges: Vec<Edges<M::Op>> = exec.map_slice(blocks, |&j| {
        let r = map.domain().block_size(j);
        Edges {
            col0: (0..r).map(|a| pi(&map.unit_image(j, a, 0))).collect(),
            row0: (0..r).map(|b| pi(&map.unit_image(j, 0, b))).collect(),
        }
    });

    let unit_pi: Vec<M::Op> = blocks
        .iter()
        .map(|&j| {
            let r = map.domain().block_size(j);
            let mut acc = pi(&map.unit_image(j, 0, 0));
            for a in 1..r {
                acc = acc.add(&pi(&map.unit_image(j, a, a)));
            }
            acc
        })
        .collect();
    let p = unit_pi[1..].iter().fold(unit_pi[0].clone(), |s, x| s.add(x));
    let block_orthogonality = p.mul(&p).sub(&p).norm();

    let rows: Vec<(usize, usize)> = blocks
        .iter()
        .enumerate()
        .flat_map(|(bi, &j)| (0..map.domain().block_size(j)).map(move |a| (bi, a)))
        .collect();
    let per_row: Vec<[f64; 4]> = exec.map_slice(&rows, |&(bi, a)| {
        let j = blocks[bi];
        let r = map.domain().block_size(j);
        let e = &edges[bi];
        let mut mult = 0.0_f64;
        let mut adj = 0.0_f64;
        let mut recon = 0.0_f64;
        let mut comm = 0.0_f64;
        for b in 0..r {
            let phi_ab = map.unit_image(j, a, b);
            let pi_ab = pi(&phi_ab);
            mult = max_f64([mult, pi_ab.sub(&e.col0[a].mul(&e.row0[b])).norm()]);
            let e2 = e.row0[a].mul(&e.col0[b]);
            let e2 = if a == b { e2.sub(&e.col0[0]) } else { e2 };
            mult = max_f64([mult, e2.norm()]);
            if a <= b {
                adj = max_f64([adj, phi_ab.adjoint().sub(&map.unit_image(j, b, a)).norm()]);
            }
            let pih = pi_ab.mul(&h);
            recon = max_f64([recon, phi_ab.sub(&pih).norm()]);
            comm = max_f64([comm, pi_ab.hermitian_left_mul(&h).sub(&pih).norm()]);
        }
        [mult, adj, recon, comm]
    });
    let col = |i: usize| max_f64(per_row.iter().map(|v| v[i]));
    let breakdown = ResidualBreakdown {
        multiplicativity: col(0),
        adjoint: col(1),
        block_orthogonality,
        reconstruction: col(2),
        commutation: col(3),
    };
    Ok(OrderZeroDecomposition {
        h,
        h_pinv_sqrt: g,
        residual: breakdown.max(),
        breakdown,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderZeroReport {
    pub residual: f64,
    /// max ‖φ(p)φ(q)‖ over distinct diagonal matrix units p ⊥ q.
    pub orthogonality: f64,
    pub is_order_zero: bool,
}

/// Decomposition residual plus the direct orthogonality test on diagonal units.
pub fn order_zero_report<M: BlockMap>(map: &M, blocks: &[usize], tol: f64, exec: Exec) -> Result<OrderZeroReport> {
    let dec = order_zero_decompose(map, blocks, DEFAULT_CUTOFF, exec)?;
    let diag: Vec<M::Op> = blocks
        .iter()
        .flat_map(|&j| (0..map.domain().block_size(j)).map(move |a| (j, a)))
        .collect::<Vec<_>>()
        .into_iter()
        .map(|(j, a)| map.unit_image(j, a, a))
        .collect();
    let per: Vec<f64> = exec.map_range(diag.len(), |p| {
        max_f64((p + 1..diag.len()).map(|q| diag[p].mul(&diag[q]).norm()))
    });
    let orthogonality = max_f64(per);
    Ok(OrderZeroReport {
        residual: dec.residual,
        orthogonality,
        is_order_zero: dec.residual <= tol && orthogonality <= tol,
    })
}

pub fn is_order_zero<M: BlockMap>(map: &M, blocks: &[usize], tol: f64) -> Result<bool> {
    Ok(order_zero_report(map, blocks, tol, Exec::default())?.is_order_zero)
}

/// max over matrix-unit pairs x, y of |τφ(xy) − τφ(yx)|, from t_ab = τφ(e_ab):
/// within a block this is max(max_{a≠d} |t_ad|, max_{a,b} |t_aa − t_bb|);
/// units from different blocks multiply to zero both ways.
pub fn trace_pullback_defect<M: BlockMap>(map: &M, blocks: &[usize], tau: impl Fn(&M::Op) -> Complex64) -> f64 {
    let mut best = 0.0_f64;
    for &j in blocks {
        let r = map.domain().block_size(j);
        let t: Vec<Vec<Complex64>> = (0..r)
            .map(|a| (0..r).map(|b| tau(&map.unit_image(j, a, b))).collect())
            .collect();
        for a in 0..r {
            for d in 0..r {
                if a != d {
                    best = max_f64([best, t[a][d].norm()]);
                }
                best = max_f64([best, (t[a][a] - t[d][d]).norm()]);
            }
        }
    }
    best
}

/// τ(y) = tr(ρ y) for a density-like matrix ρ.
pub fn trace_functional(rho: &CMatrix) -> impl Fn(&CMatrix) -> Complex64 + '_ {
    move |y: &CMatrix| {
        let mut acc = ZERO;
        for i in 0..rho.rows() {
            for k in 0..rho.cols() {
                acc += rho[(i, k)] * y[(k, i)];
            }
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakStabilityReport {
    pub defect_before: f64,
    pub defect_after: f64,
    /// max ‖[d, φ(e_ab)]‖ over matrix units.
    pub commutator: f64,
}

/// Order-zero residual of x ↦ d^{1/2}φ(x)d^{1/2} next to that of φ, for a
/// positive contraction d (given on the codomain's representation space)
/// almost commuting with the image of φ.
pub fn weak_stability_check(phi: &CpMap, d: &CMatrix, delta: f64) -> Result<WeakStabilityReport> {
    let n = phi.codomain().matrix_dim();
    if d.rows() != n || d.cols() != n {
        return Err(crate::error::dim_err(format!("{n}x{n}"), format!("{}x{}", d.rows(), d.cols())));
    }
    let tol = 1e-10;
    let pos = psd_check(d, tol)?;
    let below_one = psd_check(&CMatrix::identity(n).try_sub(d)?, tol)?;
    if !pos.is_psd || !below_one.is_psd {
        return Err(Error::Precondition("d must be a positive contraction".into()));
    }
    let dom = phi.domain();
    let mut commutator = 0.0_f64;
    for j in 0..dom.num_blocks() {
        let r = dom.block_size(j);
        for a in 0..r {
            for b in 0..r {
                let img = phi.unit_image(j, a, b).to_matrix();
                commutator = max_f64([commutator, crate::numkit::operator_norm(&d.commutator(&img)?)?]);
            }
        }
    }
    if commutator > delta + 1e-12 {
        return Err(Error::Precondition(format!(
            "‖[d, φ(e_ab)]‖ = {commutator:.3e} exceeds delta = {delta:.3e}"
        )));
    }
    let s = FdElement::from_matrix(phi.codomain(), &psd_sqrt(d)?)?;
    let cut = phi.postcompose_conjugation(&s)?;
    let all: Vec<usize> = (0..dom.num_blocks()).collect();
    let before = order_zero_decompose(phi, &all, DEFAULT_CUTOFF, Exec::default())?.residual;
    let after = order_zero_decompose(&cut, &all, DEFAULT_CUTOFF, Exec::default())?.residual;
    Ok(WeakStabilityReport {
        defect_before: before,
        defect_after: after,
        commutator,
    })
}

/// Normalized trace on M_n as a density matrix.
pub fn normalized_trace(n: usize) -> CMatrix {
    CMatrix::identity(n).scale(ONE / n as f64)
}
