use serde::{Deserialize, Serialize};

use super::algebra::{FdAlgebra, FdElement};
use super::cpmap::CpMap;
use super::triple::ApproxTriple;
use crate::error::{Error, Result};
use crate::exec::{max_f64, Exec};
use crate::numkit::{hermitian_funcalc, operator_norm, psd_check, step, CMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneCertificate {
    pub eps: f64,
    pub dropped_mass: f64,
    /// (n+1)·ε^{1/8}
    pub mass_bound: f64,
    pub post_error: f64,
    /// ε^{1/16}, strict
    pub error_bound: f64,
    /// max ‖ψ(c)ψ(c′)‖ over surviving pairs with ‖cc′‖ < ε (0 if none).
    pub max_pair_product: f64,
    /// ε^{1/16}, strict
    pub pair_bound: f64,
    pub near_orthogonal_pairs: usize,
    pub mass_ok: bool,
    pub error_ok: bool,
    pub pairs_ok: bool,
}

impl PruneCertificate {
    pub fn holds(&self) -> bool {
        self.mass_ok && self.error_ok && self.pairs_ok
    }
}

#[derive(Debug, Clone)]
pub struct PruneOutcome {
    pub pruned: ApproxTriple,
    pub dropped_blocks: Vec<usize>,
    pub dropped_mass: f64,
    pub certificate: PruneCertificate,
}

/// Removes every block j of F for which some pair c, c′ of the test set with
/// ‖cc′‖ < ε has ‖ψ_j(c)ψ_j(c′)‖ ≥ ε^{-1/8}·‖φψ(c)φψ(c′)‖^{1/4} (ties drop;
/// a vanishing left side never marks a block), and certifies the three
/// resulting estimates.
pub fn prune_to_order_zero(t: &ApproxTriple, testset: &[CMatrix], eps: f64, exec: Exec) -> Result<PruneOutcome> {
    let n1 = t.colors() as f64;
    let upper = (n1 + 1.0).powi(-4);
    if !(eps > 0.0 && eps < upper) {
        return Err(Error::Precondition(format!("eps must lie in (0, {upper:.3e}), got {eps:.3e}")));
    }
    let images: Vec<Result<(FdElement, CMatrix)>> = exec.map_slice(testset, |c| {
        let p = t.psi_of(c)?;
        let r = t.phi_of(&p)?;
        Ok((p, r))
    });
    let images: Vec<(FdElement, CMatrix)> = images.into_iter().collect::<Result<_>>()?;
    let pre_error = max_f64(
        testset
            .iter()
            .zip(&images)
            .map(|(c, (_, r))| operator_norm(&r.try_sub(c)?))
            .collect::<Result<Vec<_>>>()?,
    );
    if !(pre_error < eps) {
        return Err(Error::Precondition(format!(
            "approximation error {pre_error:.3e} on the test set is not below eps = {eps:.3e}"
        )));
    }

    let m = testset.len();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..m).map(move |k| (i, k)))
        .filter(|&(i, k)| operator_norm(&testset[i].try_matmul(&testset[k]).expect("square")).expect("finite") < eps)
        .collect();

    let nblocks = t.algebra().num_blocks();
    let bad_per_pair: Vec<Result<Vec<bool>>> = exec.map_slice(&pairs, |&(i, k)| {
        let rhs = eps.powf(-0.125) * operator_norm(&images[i].1.try_matmul(&images[k].1)?)?.powf(0.25);
        (0..nblocks)
            .map(|j| {
                let lhs = operator_norm(&images[i].0.block(j).try_matmul(images[k].0.block(j))?)?;
                // A zero product carries no information: the mass estimate divides
                // by it, so only nonzero products can mark a block.
                Ok(lhs > 0.0 && lhs >= rhs)
            })
            .collect()
    });
    let mut bad = vec![false; nblocks];
    for flags in bad_per_pair {
        for (b, f) in bad.iter_mut().zip(flags?) {
            *b |= f;
        }
    }
    let dropped_blocks: Vec<usize> = (0..nblocks).filter(|&j| bad[j]).collect();
    let kept: Vec<usize> = (0..nblocks).filter(|&j| !bad[j]).collect();

    let dropped_mass = if dropped_blocks.is_empty() {
        0.0
    } else {
        t.phi().restrict_domain(&dropped_blocks).norm()?
    };

    let alg = t.algebra().restrict(&kept);
    let pruned = ApproxTriple::new(
        t.psi().restrict_codomain(&kept).with_algebras(t.psi().domain().clone(), alg.clone())?,
        t.phi().restrict_domain(&kept).with_algebras(alg, t.phi().codomain().clone())?,
    )?;

    let post: Vec<Result<(FdElement, f64)>> = exec.map_slice(testset, |c| {
        let p = pruned.psi_of(c)?;
        let e = operator_norm(&pruned.phi_of(&p)?.try_sub(c)?)?;
        Ok((p, e))
    });
    let post: Vec<(FdElement, f64)> = post.into_iter().collect::<Result<_>>()?;
    let post_error = max_f64(post.iter().map(|p| p.1));
    let max_pair_product = max_f64(
        pairs
            .iter()
            .map(|&(i, k)| post[i].0.mul(&post[k].0)?.norm())
            .collect::<Result<Vec<_>>>()?,
    );

    let mass_bound = n1 * eps.powf(0.125);
    let error_bound = eps.powf(1.0 / 16.0);
    let certificate = PruneCertificate {
        eps,
        dropped_mass,
        mass_bound,
        post_error,
        error_bound,
        max_pair_product,
        pair_bound: error_bound,
        near_orthogonal_pairs: pairs.len(),
        mass_ok: dropped_mass <= mass_bound,
        error_ok: post_error < error_bound,
        pairs_ok: max_pair_product < error_bound,
    };
    Ok(PruneOutcome {
        pruned,
        dropped_blocks,
        dropped_mass,
        certificate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutDownReport {
    pub eta: f64,
    /// ‖φ^{(i)}(p^{(i)})(1 − h₀)‖ per color.
    pub color_lhs: Vec<f64>,
    /// η^{1/4}
    pub color_bound: f64,
    /// ‖φ((1 − p)ψ(b))‖ per supplied b.
    pub b_lhs: Vec<f64>,
    /// (n+1)·η^{1/4}
    pub b_bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct CutDown {
    pub p: FdElement,
    pub psi_hat: CpMap,
    pub report: CutDownReport,
}

/// p = g_{η^{1/2}}(ψ(h₁)) and ψ̂(b) = pψ(b)p, with the two estimates of the
/// hereditary cut-down checked on the given elements b.
pub fn cut_down_psi(t: &ApproxTriple, h0: &CMatrix, h1: &CMatrix, eta: f64, bs: &[CMatrix]) -> Result<CutDown> {
    if !(eta > 0.0 && eta <= 2f64.powi(-16)) {
        return Err(Error::Precondition(format!("eta must lie in (0, 2^-16], got {eta:.3e}")));
    }
    let d = t.ambient_dim();
    for (name, h) in [("h0", h0), ("h1", h1)] {
        if h.rows() != d || h.cols() != d {
            return Err(crate::error::dim_err(format!("{d}x{d} {name}"), format!("{}x{}", h.rows(), h.cols())));
        }
        let pos = psd_check(h, 1e-10)?;
        let contr = psd_check(&CMatrix::identity(d).try_sub(h)?, 1e-10)?;
        if !pos.is_psd || !contr.is_psd {
            return Err(Error::Precondition(format!("{name} must be a positive contraction")));
        }
    }
    let defect = operator_norm(&h0.try_matmul(h1)?.try_sub(h1)?)?;
    if defect > 1e-10 {
        return Err(Error::Precondition(format!("‖h0·h1 − h1‖ = {defect:.3e} exceeds 1e-10")));
    }
    let alg = t.algebra();
    let p = t.psi_of(h1)?.map_blocks(|b| hermitian_funcalc(b, step(eta.sqrt())))?;
    let psi_hat = t.psi().postcompose_conjugation(&p)?;

    let one_minus_h0 = CMatrix::identity(d).try_sub(h0)?;
    let mut color_lhs = Vec::new();
    for c in 0..alg.color_count() {
        let pc = p.mul(&FdElement::color_unit(alg, c))?;
        color_lhs.push(operator_norm(&t.phi_of(&pc)?.try_matmul(&one_minus_h0)?)?);
    }
    let one_minus_p = FdElement::unit(alg).sub(&p)?;
    let mut b_lhs = Vec::new();
    for b in bs {
        let x = one_minus_p.mul(&t.psi_of(b)?)?;
        b_lhs.push(operator_norm(&t.phi_of(&x)?)?);
    }
    let color_bound = eta.powf(0.25);
    let b_bound = alg.color_count() as f64 * color_bound;
    let holds = color_lhs.iter().all(|&v| v <= color_bound) && b_lhs.iter().all(|&v| v <= b_bound);
    Ok(CutDown {
        p,
        psi_hat,
        report: CutDownReport {
            eta,
            color_lhs,
            color_bound,
            b_lhs,
            b_bound,
            holds,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    /// ‖aa′‖²
    pub lhs: f64,
    /// ‖bb′‖
    pub rhs: f64,
    pub holds: bool,
}

/// ‖aa′‖² ≤ ‖bb′‖ for positive contractions a ≤ b, a′ ≤ b′.
pub fn product_domination_check(a: &CMatrix, a2: &CMatrix, b: &CMatrix, b2: &CMatrix) -> Result<DominationReport> {
    let tol = 1e-10;
    let n = a.rows();
    let id = CMatrix::identity(n);
    for (name, m) in [("a", a), ("a'", a2), ("b", b), ("b'", b2)] {
        if !psd_check(m, tol)?.is_psd || !psd_check(&id.try_sub(m)?, tol)?.is_psd {
            return Err(Error::Precondition(format!("{name} must be a positive contraction")));
        }
    }
    if !psd_check(&b.try_sub(a)?, tol)?.is_psd || !psd_check(&b2.try_sub(a2)?, tol)?.is_psd {
        return Err(Error::Precondition("ordering a ≤ b, a′ ≤ b′ violated".into()));
    }
    let lhs = operator_norm(&a.try_matmul(a2)?)?.powi(2);
    let rhs = operator_norm(&b.try_matmul(b2)?)?;
    Ok(DominationReport {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-9,
    })
}

/// Diagonal algebra helper used by callers assembling synthetic test triples.
pub fn singleton_blocks(colors: &[usize], color_count: usize) -> Result<FdAlgebra> {
    FdAlgebra::with_color_count(vec![1; colors.len()], colors.to_vec(), color_count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::ONE;

    #[test]
    fn domination_examples() {
        let p = CMatrix::from_real_diag(&[1.0, 0.0]);
        let q = CMatrix::from_real_diag(&[0.0, 1.0]);
        let r = product_domination_check(&p, &q, &p, &q).unwrap();
        assert_eq!((r.lhs, r.rhs, r.holds), (0.0, 0.0, true));
        let one = CMatrix::identity(2);
        let r = product_domination_check(&one, &one, &one, &one).unwrap();
        assert_eq!((r.lhs, r.rhs, r.holds), (1.0, 1.0, true));
        assert!(product_domination_check(&one, &one, &p, &one).is_err());
    }

    #[test]
    fn eta_guard() {
        let t = ApproxTriple::identity(2);
        let one = CMatrix::identity(2);
        let r = cut_down_psi(&t, &one, &one, 2f64.powi(-15), &[]);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn unit_cut_down_is_support_of_psi_one() {
        let t = ApproxTriple::identity(2);
        let one = CMatrix::identity(2);
        let cd = cut_down_psi(&t, &one, &one, 2f64.powi(-20), &[one.clone()]).unwrap();
        assert_eq!(cd.p.to_matrix(), one);
        assert!(cd.report.holds);
        let x = CMatrix::from_fn(2, 2, |i, j| ONE * (i * 2 + j) as f64);
        assert_eq!(cd.psi_hat.apply_matrix(&x).unwrap(), x);
    }

    #[test]
    fn clean_triple_prunes_nothing() {
        let t = ApproxTriple::identity(2);
        let c = CMatrix::from_real_diag(&[1.0, 0.0]);
        let c2 = CMatrix::from_real_diag(&[0.0, 1.0]);
        let out = prune_to_order_zero(&t, &[c, c2], 1e-6, Exec::default()).unwrap();
        assert!(out.dropped_blocks.is_empty());
        assert_eq!(out.pruned.algebra(), t.algebra());
        assert!(out.certificate.holds());
    }

    #[test]
    fn eps_range_is_enforced() {
        let t = ApproxTriple::identity(2);
        // one color (n = 0): eps must be below 2^{-4}
        assert!(prune_to_order_zero(&t, &[], 0.07, Exec::default()).is_err());
        assert!(prune_to_order_zero(&t, &[], 0.06, Exec::default()).is_ok());
        assert!(prune_to_order_zero(&t, &[], 0.0, Exec::default()).is_err());
    }
}
