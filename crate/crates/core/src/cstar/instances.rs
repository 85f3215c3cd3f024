//! Randomized instances for the order-zero round trip, pruning and
//! permanence suites.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::Serialize;

use super::algebra::FdAlgebra;
use super::cpmap::CpMap;
use super::order_zero::{order_zero_decompose, trace_functional, trace_pullback_defect, normalized_trace};
use super::triple::ApproxTriple;
use crate::error::{Error, Result};
use crate::exec::{max_f64, Exec};
use crate::numkit::random::{unit_vector, unitary};
use crate::numkit::{operator_norm, CMatrix, DEFAULT_CUTOFF, ONE};

/// φ = h·π with π(x) = U(⊕_j x_j ⊗ 1_{m_j} ⊕ 0)U* and
/// h = U(⊕_j 1_{r_j} ⊗ D_j ⊕ 0)U*, D_j positive diagonal, so h commutes with
/// the image of π.
#[derive(Debug, Clone)]
pub struct OrderZeroInstance {
    pub map: CpMap,
    pub h: CMatrix,
    /// π(e_ab) of block j at index a·r_j + b.
    pub pi_units: Vec<Vec<CMatrix>>,
}

/// Blocks of size 1..=3 (1..=3 of them), multiplicities 1..=3, padding so
/// the codomain dimension stays ≤ `max_dim`; entries of D_j in [0.1, 1].
pub fn random_order_zero(max_dim: usize, rng: &mut impl Rng) -> Result<OrderZeroInstance> {
    if max_dim < 1 {
        return Err(Error::InvalidInput("max_dim must be positive".into()));
    }
    let mut sizes = Vec::new();
    let mut mults = Vec::new();
    let mut used = 0;
    for _ in 0..rng.random_range(1..=3) {
        let r = rng.random_range(1..=3usize);
        let m = rng.random_range(1..=3usize);
        if used + r * m > max_dim {
            break;
        }
        sizes.push(r);
        mults.push(m);
        used += r * m;
    }
    if sizes.is_empty() {
        sizes.push(1);
        mults.push(1);
        used = 1;
    }
    let pad = rng.random_range(0..=(max_dim - used).min(4));
    let dim = used + pad;
    let u = unitary(dim, rng);
    let ud = u.adjoint();
    let conj = |m: &CMatrix| u.try_matmul(m).and_then(|x| x.try_matmul(&ud)).expect("square");

    // Slot of (block j, row a, copy t) in the unrotated basis.
    let mut offsets = Vec::new();
    let mut acc = 0;
    for (r, m) in sizes.iter().zip(&mults) {
        offsets.push(acc);
        acc += r * m;
    }
    let slot = |j: usize, a: usize, t: usize| offsets[j] + a * mults[j] + t;
    let weights: Vec<Vec<f64>> = mults.iter().map(|&m| (0..m).map(|_| rng.random_range(0.1..=1.0)).collect()).collect();

    let mut h0 = CMatrix::zeros(dim, dim);
    let mut pi_units = Vec::new();
    for (j, &r) in sizes.iter().enumerate() {
        let mut units = Vec::new();
        for a in 0..r {
            for t in 0..mults[j] {
                h0[(slot(j, a, t), slot(j, a, t))] = ONE * weights[j][t];
            }
            for b in 0..r {
                let mut e = CMatrix::zeros(dim, dim);
                for t in 0..mults[j] {
                    e[(slot(j, a, t), slot(j, b, t))] = ONE;
                }
                units.push(conj(&e));
            }
        }
        pi_units.push(units);
    }
    // Kraus operators K_{j,t}: column a of block j ↦ √w_{jt}·U e_{slot(j,a,t)}.
    let domain = FdAlgebra::new(sizes.clone(), vec![0; sizes.len()])?;
    let dom_offsets = domain.offsets();
    let mut kraus = Vec::new();
    for (j, &r) in sizes.iter().enumerate() {
        for t in 0..mults[j] {
            let mut k = CMatrix::zeros(dim, domain.matrix_dim());
            for a in 0..r {
                for i in 0..dim {
                    k[(i, dom_offsets[j] + a)] = u[(i, slot(j, a, t))] * weights[j][t].sqrt();
                }
            }
            kraus.push(k);
        }
    }
    let map = CpMap::from_kraus(domain, FdAlgebra::full(dim), &kraus)?;
    Ok(OrderZeroInstance {
        map,
        h: conj(&h0),
        pi_units,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundTripReport {
    pub dim: usize,
    pub residual: f64,
    /// ‖h − h_rec‖.
    pub h_error: f64,
    /// max ‖π(e_ab) − π_rec(e_ab)‖.
    pub pi_error: f64,
    /// Against the normalized trace of the codomain.
    pub trace_defect: f64,
}

pub fn round_trip(inst: &OrderZeroInstance) -> Result<RoundTripReport> {
    let dom = inst.map.domain();
    let blocks: Vec<usize> = (0..dom.num_blocks()).collect();
    let dec = order_zero_decompose(&inst.map, &blocks, DEFAULT_CUTOFF, Exec::Sequential)?;
    let h_error = operator_norm(&dec.h.try_sub(&inst.h)?)?;
    let mut pi_error = 0.0_f64;
    for (j, units) in inst.pi_units.iter().enumerate() {
        let r = dom.block_size(j);
        for a in 0..r {
            for b in 0..r {
                let rec = dec.pi_of(&inst.map.unit_image(j, a, b).to_matrix());
                pi_error = pi_error.max(operator_norm(&rec.try_sub(&units[a * r + b])?)?);
            }
        }
    }
    let dim = inst.h.rows();
    let rho = normalized_trace(dim);
    let trace_defect = trace_pullback_defect(&inst.map, &blocks, trace_functional(&rho));
    Ok(RoundTripReport {
        dim,
        residual: dec.residual,
        h_error,
        pi_error,
        trace_defect,
    })
}

/// A diagonal triple on M_d that is exact on diagonal matrices, plus a few
/// synthetic rank-one blocks: ψ_j(a) = ⟨v_j, a v_j⟩ and φ_j(1) = δ_j e_{y_j}
/// with δ_j ≪ ε, so the approximation error stays below ε while ψ_j sends
/// orthogonal test elements to overlapping states.
#[derive(Debug, Clone)]
pub struct PruneInstance {
    pub triple: ApproxTriple,
    pub testset: Vec<CMatrix>,
    pub synthetic_blocks: Vec<usize>,
}

/// n ∈ {1, 2}: n + 1 colors on d ∈ 3..=8 points; at most one synthetic block
/// per color, with weight δ ∈ [ε², ε^{3/2}] and y_j of another color.
pub fn random_prune_instance(n: usize, eps: f64, rng: &mut impl Rng) -> Result<PruneInstance> {
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidInput(format!("n must be 1 or 2, got {n}")));
    }
    let colors_n = n + 1;
    let d = rng.random_range(3.max(colors_n)..=8usize);
    // Every color appears among the point blocks.
    let mut point_colors: Vec<usize> = (0..d).map(|x| x % colors_n).collect();
    point_colors.shuffle(rng);

    let mut synth: Vec<(usize, Vec<num_complex::Complex64>, usize, f64)> = Vec::new();
    let mut taken = vec![false; d];
    for c in 0..colors_n {
        if !rng.random_bool(0.7) {
            continue;
        }
        let cand: Vec<usize> = (0..d).filter(|&y| point_colors[y] != c && !taken[y]).collect();
        let Some(&y) = cand.choose(rng) else { continue };
        taken[y] = true;
        let delta = eps.powf(rng.random_range(1.5..=2.0));
        synth.push((c, unit_vector(d, rng), y, delta));
    }
    let m = d + synth.len();
    let mut colors = point_colors.clone();
    colors.extend(synth.iter().map(|s| s.0));
    let f = FdAlgebra::new(vec![1; m], colors)?;
    let amb = FdAlgebra::full(d);

    let mut kpsi = CMatrix::zeros(m, d);
    let mut kphi = CMatrix::zeros(d, m);
    for x in 0..d {
        kpsi[(x, x)] = ONE;
        kphi[(x, x)] = ONE;
    }
    for (j, (_, v, y, delta)) in synth.iter().enumerate() {
        for x in 0..d {
            kpsi[(d + j, x)] = v[x].conj();
        }
        kphi[(*y, d + j)] = ONE * delta.sqrt();
    }
    let psi = CpMap::from_kraus(amb.clone(), f.clone(), &[kpsi])?;
    let phi = CpMap::from_kraus(f, amb, &[kphi])?;
    let triple = ApproxTriple::new(psi, phi)?;

    // Test set: diagonal projections onto random nonempty subsets, including
    // complementary pairs so orthogonal pairs always occur.
    let mut testset = Vec::new();
    for _ in 0..rng.random_range(2..=4) {
        let mask: Vec<bool> = loop {
            let m: Vec<bool> = (0..d).map(|_| rng.random_bool(0.5)).collect();
            if m.iter().any(|&b| b) && m.iter().any(|&b| !b) {
                break m;
            }
        };
        let p: Vec<f64> = mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let q: Vec<f64> = mask.iter().map(|&b| if b { 0.0 } else { 1.0 }).collect();
        testset.push(CMatrix::from_real_diag(&p));
        testset.push(CMatrix::from_real_diag(&q));
    }
    Ok(PruneInstance {
        triple,
        testset,
        synthetic_blocks: (d..m).collect(),
    })
}

/// 2-color diagonal triple on M_d: exact on diagonal matrices, every color's
/// φ a *-homomorphism (zero order-zero residual).
pub fn diagonal_triple(d: usize) -> Result<ApproxTriple> {
    if d < 2 {
        return Err(Error::InvalidInput("need d ≥ 2 for two colors".into()));
    }
    let f = FdAlgebra::diagonal((0..d).map(|i| i % 2).collect())?;
    let amb = FdAlgebra::full(d);
    let psi = CpMap::from_kraus(amb.clone(), f.clone(), &[CMatrix::identity(d)])?;
    let phi = CpMap::from_kraus(f, amb, &[CMatrix::identity(d)])?;
    ApproxTriple::new(psi, phi)
}

/// Diagonal samples in M_d with entries in [0, 1].
pub fn diagonal_samples(d: usize, count: usize, rng: &mut impl Rng) -> Vec<CMatrix> {
    (0..count)
        .map(|_| CMatrix::from_real_diag(&(0..d).map(|_| rng.random_range(0.0..=1.0)).collect::<Vec<_>>()))
        .collect()
}

/// Largest order-zero residual over the suite.
pub fn max_residual(reports: &[RoundTripReport]) -> f64 {
    max_f64(reports.iter().map(|r| r.residual))
}
