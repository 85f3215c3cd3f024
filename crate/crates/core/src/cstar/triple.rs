use serde::{Deserialize, Serialize};

use super::algebra::{FdAlgebra, FdElement};
use super::cpmap::CpMap;
use super::order_zero::order_zero_decompose;
use crate::error::{dim_err, Error, Result};
use crate::exec::{max_f64, Exec};
use crate::numkit::{operator_norm, psd_check, psd_sqrt, CMatrix, DEFAULT_CUTOFF};

/// Default cap on the ambient dimension of a tensor product of triples.
pub const DEFAULT_TENSOR_CAP: usize = 256;

/// (F, ψ, φ): ψ: M_d → F and φ: F → M_d, with F colored into n+1 ideals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TripleRepr", into = "TripleRepr")]
pub struct ApproxTriple {
    algebra: FdAlgebra,
    ambient_dim: usize,
    psi: CpMap,
    phi: CpMap,
}

#[derive(Serialize, Deserialize)]
struct TripleRepr {
    ambient_dim: usize,
    colors: usize,
    algebra: FdAlgebra,
    psi: CpMap,
    phi: CpMap,
}

impl TryFrom<TripleRepr> for ApproxTriple {
    type Error = Error;
    fn try_from(r: TripleRepr) -> Result<Self> {
        if r.colors != r.algebra.color_count() {
            return Err(Error::InvalidInput(format!(
                "colors {} disagree with the algebra's {}",
                r.colors,
                r.algebra.color_count()
            )));
        }
        let t = ApproxTriple::new(r.psi, r.phi)?;
        if t.algebra != r.algebra || t.ambient_dim != r.ambient_dim {
            return Err(Error::InvalidInput("algebra or ambient dimension disagree with the maps".into()));
        }
        Ok(t)
    }
}

impl From<ApproxTriple> for TripleRepr {
    fn from(t: ApproxTriple) -> Self {
        TripleRepr {
            ambient_dim: t.ambient_dim,
            colors: t.algebra.color_count(),
            algebra: t.algebra,
            psi: t.psi,
            phi: t.phi,
        }
    }
}

impl ApproxTriple {
    /// Checks that ψ: M_d → F and φ: F → M_d share F and d.
    pub fn new(psi: CpMap, phi: CpMap) -> Result<Self> {
        if psi.domain().num_blocks() != 1 {
            return Err(Error::InvalidInput("ψ must act on a full matrix algebra".into()));
        }
        let d = psi.domain().block_size(0);
        if phi.codomain().block_sizes() != [d] {
            return Err(dim_err(format!("φ into M_{d}"), format!("{:?}", phi.codomain().block_sizes())));
        }
        if psi.codomain() != phi.domain() {
            return Err(Error::InvalidInput(
                "color partition of ψ's codomain and φ's domain disagree".into(),
            ));
        }
        Ok(ApproxTriple {
            algebra: phi.domain().clone(),
            ambient_dim: d,
            psi,
            phi,
        })
    }

    /// (M_d, id, id) with one color.
    pub fn identity(d: usize) -> Self {
        let a = FdAlgebra::full(d);
        ApproxTriple::new(CpMap::identity(&a), CpMap::identity(&a)).expect("identity triple")
    }

    pub fn algebra(&self) -> &FdAlgebra {
        &self.algebra
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn psi(&self) -> &CpMap {
        &self.psi
    }

    pub fn phi(&self) -> &CpMap {
        &self.phi
    }

    /// n + 1.
    pub fn colors(&self) -> usize {
        self.algebra.color_count()
    }

    pub fn psi_of(&self, a: &CMatrix) -> Result<FdElement> {
        self.psi.apply(&FdElement::from_matrix(self.psi.domain(), a)?)
    }

    pub fn phi_of(&self, x: &FdElement) -> Result<CMatrix> {
        Ok(self.phi.apply(x)?.to_matrix())
    }

    pub fn round_trip(&self, a: &CMatrix) -> Result<CMatrix> {
        self.phi_of(&self.psi_of(a)?)
    }

    /// φ restricted to one color.
    pub fn phi_color(&self, c: usize) -> CpMap {
        self.phi.restrict_domain(&self.algebra.blocks_of_color(c))
    }

    /// Replaces φ by c·φ on the blocks of one color.
    pub fn scale_color(&self, color: usize, c: f64) -> Result<Self> {
        let blocks = self.algebra.blocks_of_color(color);
        let alg = self.algebra.clone();
        let phi = CpMap::build(
            alg.clone(),
            self.phi.codomain().clone(),
            |j, a, b| {
                let img = self.phi.unit_image(j, a, b);
                Ok(if blocks.contains(&j) { img.scale_real(c) } else { img })
            },
            self.phi.is_certified() && c >= 0.0,
        )?;
        ApproxTriple::new(self.psi.clone(), phi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorReport {
    pub color: usize,
    pub blocks: usize,
    pub norm: f64,
    pub contraction_defect: f64,
    pub order_zero_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// max_j ‖φψ(a_j) − a_j‖; reported, not thresholded.
    pub approx_error: f64,
    pub psi_norm: f64,
    pub per_color: Vec<ColorReport>,
    pub tol: f64,
    pub pass: bool,
}

impl ValidationReport {
    pub fn max_order_zero_residual(&self) -> f64 {
        max_f64(self.per_color.iter().map(|c| c.order_zero_residual))
    }

    pub fn max_contraction_defect(&self) -> f64 {
        max_f64(self.per_color.iter().map(|c| c.contraction_defect))
    }
}

pub fn validate_triple(t: &ApproxTriple, samples: &[CMatrix], tol: f64, exec: Exec) -> Result<ValidationReport> {
    let d = t.ambient_dim;
    for s in samples {
        if s.rows() != d || s.cols() != d {
            return Err(dim_err(format!("{d}x{d} sample"), format!("{}x{}", s.rows(), s.cols())));
        }
    }
    let errors: Vec<Result<f64>> = exec.map_slice(samples, |a| operator_norm(&t.round_trip(a)?.try_sub(a)?));
    let approx_error = max_f64(errors.into_iter().collect::<Result<Vec<_>>>()?);
    let psi_norm = t.psi.norm()?;
    let mut per_color = Vec::new();
    for c in 0..t.colors() {
        let blocks = t.algebra.blocks_of_color(c);
        if blocks.is_empty() {
            per_color.push(ColorReport {
                color: c,
                blocks: 0,
                norm: 0.0,
                contraction_defect: 0.0,
                order_zero_residual: 0.0,
            });
            continue;
        }
        let phi_c = t.phi.restrict_domain(&blocks);
        let norm = phi_c.norm()?;
        let all: Vec<usize> = (0..blocks.len()).collect();
        let residual = order_zero_decompose(&phi_c, &all, DEFAULT_CUTOFF, exec)?.residual;
        per_color.push(ColorReport {
            color: c,
            blocks: blocks.len(),
            norm,
            contraction_defect: (norm - 1.0).max(0.0),
            order_zero_residual: residual,
        });
    }
    let pass = psi_norm <= 1.0 + tol
        && per_color
            .iter()
            .all(|c| c.contraction_defect <= tol && c.order_zero_residual <= tol);
    Ok(ValidationReport {
        approx_error,
        psi_norm,
        per_color,
        tol,
        pass,
    })
}

/// ψ′ = ψ(u^{1/2}·u^{1/2}), φ′ = ‖φψ(u)‖^{-1}·φ.
pub fn normalize_composition(t: &ApproxTriple, u: &CMatrix) -> Result<ApproxTriple> {
    let d = t.ambient_dim;
    if u.rows() != d || u.cols() != d {
        return Err(dim_err(format!("{d}x{d}"), format!("{}x{}", u.rows(), u.cols())));
    }
    let tol = 1e-10;
    if !psd_check(u, tol)?.is_psd || !psd_check(&CMatrix::identity(d).try_sub(u)?, tol)?.is_psd {
        return Err(Error::Precondition("u must be a positive contraction".into()));
    }
    let c = operator_norm(&t.round_trip(u)?)?;
    if c < DEFAULT_CUTOFF {
        return Err(Error::Degenerate(format!("‖φψ(u)‖ = {c:.3e} below cutoff")));
    }
    let psi = t.psi.precompose_conjugation(&psd_sqrt(u)?)?;
    ApproxTriple::new(psi, t.phi.scale(1.0 / c))
}

/// ψ: M_{d1+d2} → F₁ ⊕ F₂ compresses to the diagonal corners; φ = φ₁ ⊕ φ₂.
pub fn direct_sum_triples(t1: &ApproxTriple, t2: &ApproxTriple) -> Result<ApproxTriple> {
    let (d1, d2) = (t1.ambient_dim, t2.ambient_dim);
    let algebra = t1.algebra.direct_sum(&t2.algebra);
    let ambient = FdAlgebra::full(d1 + d2);
    let alg = algebra.clone();
    let psi = CpMap::build(
        ambient.clone(),
        algebra.clone(),
        |_, a, b| {
            let zero1 = FdElement::zero(&t1.algebra).into_blocks();
            let zero2 = FdElement::zero(&t2.algebra).into_blocks();
            let (p1, p2) = if a < d1 && b < d1 {
                (t1.psi.unit_image(0, a, b).into_blocks(), zero2)
            } else if a >= d1 && b >= d1 {
                (zero1, t2.psi.unit_image(0, a - d1, b - d1).into_blocks())
            } else {
                (zero1, zero2)
            };
            FdElement::new(&alg, [p1, p2].concat())
        },
        t1.psi.is_certified() && t2.psi.is_certified(),
    )?;
    let n1 = t1.algebra.num_blocks();
    let phi = CpMap::build(
        algebra,
        ambient.clone(),
        |j, a, b| {
            let img = if j < n1 {
                t1.phi.unit_image(j, a, b).to_matrix().direct_sum(&CMatrix::zeros(d2, d2))
            } else {
                CMatrix::zeros(d1, d1).direct_sum(&t2.phi.unit_image(j - n1, a, b).to_matrix())
            };
            FdElement::new(&ambient, vec![img])
        },
        t1.phi.is_certified() && t2.phi.is_certified(),
    )?;
    ApproxTriple::new(psi, phi)
}

/// F = F₁ ⊗ F₂, ψ = ψ₁ ⊗ ψ₂, φ = φ₁ ⊗ φ₂; block (j₁, j₂) gets color
/// c₁·(n₂+1) + c₂.
pub fn tensor_triples(t1: &ApproxTriple, t2: &ApproxTriple, cap: usize) -> Result<ApproxTriple> {
    let d = t1.ambient_dim * t2.ambient_dim;
    if d > cap {
        return Err(Error::SizeCap {
            what: "tensor ambient dimension".into(),
            size: d,
            cap,
        });
    }
    ApproxTriple::new(t1.psi.tensor(&t2.psi)?, t1.phi.tensor(&t2.phi)?)
}
