use serde::{Deserialize, Serialize};

use super::cover::ColoredCover;
use super::space::FinSpace;
use crate::cstar::{ApproxTriple, CpMap, FdAlgebra, FdElement};
use crate::error::{Error, Result};
use crate::numkit::{operator_norm, pseudo_inverse_sqrt, psd_sqrt, CMatrix, DEFAULT_CUTOFF};

/// Partition of unity subordinate to a cover, with one anchor point per set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionOfUnity {
    /// theta[u][x]
    pub theta: Vec<Vec<f64>>,
    pub anchors: Vec<usize>,
}

impl PartitionOfUnity {
    /// Points where theta_u is positive.
    pub fn support(&self, u: usize) -> Vec<usize> {
        (0..self.theta[u].len()).filter(|&x| self.theta[u][x] > 0.0).collect()
    }

    /// max_x |Σ_u theta_u(x) − 1|.
    pub fn sum_defect(&self) -> f64 {
        let n = self.theta.first().map_or(0, Vec::len);
        (0..n)
            .map(|x| (self.theta.iter().map(|t| t[x]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Tent functions normalized to sum 1. The core of U is its center (least
/// eccentricity e within U); tent_U(x) = 1 − d(x, core)/(e + 1) on U and 0
/// off U, so every point of U carries positive weight and the support is U.
pub fn build_pou(cover: &ColoredCover, space: &FinSpace) -> Result<PartitionOfUnity> {
    let n = space.len();
    let mut theta = Vec::with_capacity(cover.len());
    let mut anchors = Vec::with_capacity(cover.len());
    for set in cover.sets() {
        let (a, ecc) = space.center(set);
        let radius = (ecc + 1) as f64;
        let mut t = vec![0.0; n];
        for &x in set {
            t[x] = 1.0 - space.d(x, a) as f64 / radius;
        }
        theta.push(t);
        anchors.push(a);
    }
    for x in 0..n {
        let total: f64 = theta.iter().map(|t| t[x]).sum();
        if total <= 0.0 {
            return Err(Error::InvalidInput(format!("point {x} is covered by no set")));
        }
        for t in theta.iter_mut() {
            t[x] /= total;
        }
    }
    Ok(PartitionOfUnity { theta, anchors })
}

/// max f − min f over a set of points.
pub fn oscillation(f: &[f64], set: &[usize]) -> f64 {
    let (lo, hi) = set
        .iter()
        .map(|&x| f[x])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if set.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// max_U osc(f, supp theta_U): the error bound of the cover triple.
pub fn oscillation_bound(pou: &PartitionOfUnity, f: &[f64]) -> f64 {
    (0..pou.theta.len())
        .map(|u| oscillation(f, &pou.support(u)))
        .fold(0.0, f64::max)
}

/// Diagonal matrix of a function on the points.
pub fn function_matrix(f: &[f64]) -> CMatrix {
    CMatrix::from_real_diag(f)
}

/// F = C^{|cover|} colored by the cover; ψ(f)_U = f(x_U) (compression to the
/// anchor), φ(e_U) = multiplication by theta_U.
pub fn build_commutative_triple(
    space: &FinSpace,
    cover: &ColoredCover,
    pou: &PartitionOfUnity,
) -> Result<ApproxTriple> {
    let n = space.len();
    if pou.theta.len() != cover.len() || pou.anchors.len() != cover.len() {
        return Err(crate::error::dim_err(format!("{} partition functions", cover.len()), pou.theta.len()));
    }
    for (u, (&a, set)) in pou.anchors.iter().zip(cover.sets()).enumerate() {
        if set.binary_search(&a).is_err() {
            return Err(Error::InvalidInput(format!("anchor {a} lies outside set {u}")));
        }
    }
    for (u, t) in pou.theta.iter().enumerate() {
        if t.len() != n || t.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput(format!("theta_{u} is not a nonnegative function on the points")));
        }
        if let Some(x) = (0..n).find(|&x| t[x] > 0.0 && cover.sets()[u].binary_search(&x).is_err()) {
            return Err(Error::InvalidInput(format!("theta_{u} is positive at {x} outside its set")));
        }
    }
    let f_alg = FdAlgebra::with_color_count(vec![1; cover.len()], cover.colors().to_vec(), cover.color_count())?;
    let ambient = FdAlgebra::full(n);
    let anchors = pou.anchors.clone();
    let fa = f_alg.clone();
    let psi = CpMap::build(
        ambient.clone(),
        f_alg.clone(),
        move |_, a, b| {
            let blocks = anchors
                .iter()
                .map(|&x| {
                    let v = if a == x && b == x { 1.0 } else { 0.0 };
                    CMatrix::from_real_diag(&[v])
                })
                .collect();
            FdElement::new(&fa, blocks)
        },
        true,
    )?;
    let theta = pou.theta.clone();
    let phi = CpMap::build(
        f_alg,
        ambient.clone(),
        move |u, _, _| FdElement::new(&ambient, vec![CMatrix::from_real_diag(&theta[u])]),
        true,
    )?;
    ApproxTriple::new(psi, phi)
}

/// Output of [`contractify`].
#[derive(Debug, Clone)]
pub struct Contractified {
    pub triple: ApproxTriple,
    /// Blocks of the original F kept by the support cut.
    pub kept_blocks: Vec<usize>,
    /// ‖φ̂(1_F)‖.
    pub unit_image_norm: f64,
}

/// Turns a piecewise-contractive commutative triple into a contractive one:
/// cut F to the support of ψ(h), then
/// ψ̂(f) = ψ(h)^{-1/2} ψ(h^{1/2} f h^{1/2}) ψ(h)^{-1/2} and
/// φ̂(x) = (1 − ε/2) φ(ψ(h)^{1/2} x ψ(h)^{1/2}).
/// For functions f commuting with h the inner term is ψ(hf).
pub fn contractify(t: &ApproxTriple, h: &[f64], eps: f64) -> Result<Contractified> {
    let n = t.ambient_dim();
    if h.len() != n {
        return Err(crate::error::dim_err(n, h.len()));
    }
    if h.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidInput("h must be a nonnegative function".into()));
    }
    if !(eps > 0.0 && eps < 2.0) {
        return Err(Error::InvalidInput(format!("eps must lie in (0, 2), got {eps}")));
    }
    let psi_h = t.psi_of(&function_matrix(h))?;
    let kept_blocks: Vec<usize> = (0..t.algebra().num_blocks())
        .filter(|&j| operator_norm(psi_h.block(j)).is_ok_and(|v| v > DEFAULT_CUTOFF))
        .collect();
    if kept_blocks.is_empty() {
        return Err(Error::Degenerate("ψ(h) has trivial support".into()));
    }
    let v = psi_h.restrict(&kept_blocks);
    let v_isqrt = v.map_blocks(|b| pseudo_inverse_sqrt(b, DEFAULT_CUTOFF))?;
    let v_sqrt = v.map_blocks(psd_sqrt)?;
    let sqrt_h: Vec<f64> = h.iter().map(|x| x.sqrt()).collect();
    let psi_hat = t
        .psi()
        .precompose_conjugation(&function_matrix(&sqrt_h))?
        .restrict_codomain(&kept_blocks)
        .postcompose_conjugation(&v_isqrt)?;
    let phi_hat = t
        .phi()
        .restrict_domain(&kept_blocks)
        .precompose_element_conjugation(&v_sqrt)?
        .scale(1.0 - eps / 2.0);
    let triple = ApproxTriple::new(psi_hat, phi_hat)?;
    let unit_image_norm = operator_norm(&triple.phi_of(&FdElement::unit(triple.algebra()))?)?;
    Ok(Contractified {
        triple,
        kept_blocks,
        unit_image_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commdim::cover::{greedy_color, interval_sets, stride_for_mesh};
    use crate::cstar::validate_triple;
    use crate::Exec;

    fn interval_setup(n: usize, mesh: f64) -> (FinSpace, ColoredCover, PartitionOfUnity) {
        let space = FinSpace::unit_interval(n).unwrap();
        let cover = greedy_color(&space, interval_sets(n, stride_for_mesh(n, mesh).unwrap()).unwrap()).unwrap();
        let pou = build_pou(&cover, &space).unwrap();
        (space, cover, pou)
    }

    fn diag_error(t: &ApproxTriple, f: &[f64]) -> f64 {
        let fm = function_matrix(f);
        operator_norm(&t.round_trip(&fm).unwrap().try_sub(&fm).unwrap()).unwrap()
    }

    #[test]
    fn single_set_gives_constant_theta() {
        let p = FinSpace::path(5);
        let c = greedy_color(&p, vec![(0..5).collect()]).unwrap();
        let pou = build_pou(&c, &p).unwrap();
        assert!(pou.theta[0].iter().all(|&v| v == 1.0));
    }

    #[test]
    fn half_overlapping_intervals_sum_to_one() {
        let p = FinSpace::path(8);
        let c = greedy_color(&p, interval_sets(8, 4).unwrap()).unwrap();
        let pou = build_pou(&c, &p).unwrap();
        assert!(pou.sum_defect() <= 1e-12);
        assert!(pou.theta.iter().flatten().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn four_intervals_on_sixteen_points() {
        let p = FinSpace::path(16);
        let c = greedy_color(&p, vec![(0..5).collect(), (4..9).collect(), (8..13).collect(), (12..16).collect()])
            .unwrap();
        let pou = build_pou(&c, &p).unwrap();
        assert!(pou.sum_defect() <= 1e-12);
        for u in 0..4 {
            assert_eq!(pou.support(u), c.sets()[u]);
        }
    }

    #[test]
    fn constants_are_reproduced() {
        let (space, cover, pou) = interval_setup(16, 0.25);
        let t = build_commutative_triple(&space, &cover, &pou).unwrap();
        assert!(diag_error(&t, &[2.5; 16]) <= 1e-12);
    }

    #[test]
    fn coordinate_error_on_32_points() {
        let (space, cover, pou) = interval_setup(32, 0.125);
        let t = build_commutative_triple(&space, &cover, &pou).unwrap();
        let f: Vec<f64> = (0..32).map(|i| i as f64 / 31.0).collect();
        let err = diag_error(&t, &f);
        // Test-side bound: every set has at most 2s = 4 points, so
        // osc ≤ 3/31 for the coordinate.
        assert!(err <= 3.0 / 31.0 + 1e-12);
        assert!(err <= oscillation_bound(&pou, &f) + 1e-12);
        assert!(err <= 0.125);
    }

    #[test]
    fn interval_triple_validates_with_two_colors() {
        let (space, cover, pou) = interval_setup(16, 0.25);
        let t = build_commutative_triple(&space, &cover, &pou).unwrap();
        assert_eq!(t.colors(), 2);
        let samples: Vec<CMatrix> = [1.0, 2.0]
            .iter()
            .map(|w| function_matrix(&(0..16).map(|i| (w * i as f64 / 15.0).sin()).collect::<Vec<_>>()))
            .collect();
        let r = validate_triple(&t, &samples, 0.5, Exec::Sequential).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.max_order_zero_residual() <= 1e-12);
        assert!((r.psi_norm - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn anchor_outside_set_is_rejected() {
        let (space, cover, mut pou) = interval_setup(16, 0.25);
        pou.anchors[0] = 15;
        assert!(build_commutative_triple(&space, &cover, &pou).is_err());
    }

    #[test]
    fn contractify_with_unit_h() {
        let (space, cover, pou) = interval_setup(16, 0.25);
        let t = build_commutative_triple(&space, &cover, &pou).unwrap();
        let c = contractify(&t, &[1.0; 16], 0.1).unwrap();
        assert_eq!(c.kept_blocks.len(), cover.len());
        // ψ(1) = 1_F, so φ̂ = 0.95 φ and ψ̂ = ψ.
        let expect = t.phi().scale(0.95);
        for u in 0..cover.len() {
            let a = c.triple.phi().unit_image(u, 0, 0).to_matrix();
            let b = expect.unit_image(u, 0, 0).to_matrix();
            assert!(operator_norm(&a.try_sub(&b).unwrap()).unwrap() <= 1e-12);
        }
        assert!((c.unit_image_norm - 0.95).abs() <= 1e-12);
    }

    #[test]
    fn contractify_with_boundary_bump() {
        let n = 64;
        let (space, cover, pou) = interval_setup(n, 0.125);
        let t = build_commutative_triple(&space, &cover, &pou).unwrap();
        // h = 1 in the middle, 0 near both ends.
        let h: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                ((x.min(1.0 - x) - 0.1) / 0.15).clamp(0.0, 1.0)
            })
            .collect();
        let eps = 0.1;
        let c = contractify(&t, &h, eps).unwrap();
        assert!(c.kept_blocks.len() < cover.len());
        assert!(c.unit_image_norm <= 1.0 + 1e-10);
        // f supported where h = 1, so hf = f.
        let f: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                if (0.3..=0.7).contains(&x) {
                    (std::f64::consts::PI * (x - 0.3) / 0.4).sin()
                } else {
                    0.0
                }
            })
            .collect();
        assert!(h.iter().zip(&f).all(|(a, b)| a * b == *b));
        assert!(diag_error(&c.triple, &f) <= eps);
    }

    #[test]
    fn trivial_support_is_rejected() {
        let (space, cover, pou) = interval_setup(16, 0.25);
        let t = build_commutative_triple(&space, &cover, &pou).unwrap();
        assert!(contractify(&t, &[0.0; 16], 0.1).is_err());
    }
}
