use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::algebra::{FdAlgebra, FdElement};
use crate::error::{dim_err, Error, Result};
use crate::numkit::{psd_check, CMatrix, PsdReport, ZERO};

/// Largest Choi block whose positivity is checked by eigensolve.
pub const CHOI_CHECK_CAP: usize = 1024;

/// Linear map between finite-dimensional C*-algebras, stored by Choi blocks.
///
/// `choi[j][k]` is the (r_j·s_k)² matrix whose (a, b) sub-block of size s_k is
/// the codomain-block-k part of the image of the matrix unit e^{(j)}_{ab}.
/// Complete positivity is equivalent to every Choi block being PSD.
///
/// Maps produced by composition, conjugation, restriction, direct sums and
/// tensor products of completely positive maps are marked `certified`; any
/// other map is checked before its norm is taken as ‖φ(1)‖.
#[derive(Debug, Clone, PartialEq)]
pub struct CpMap {
    domain: FdAlgebra,
    codomain: FdAlgebra,
    choi: Vec<Vec<CMatrix>>,
    certified: bool,
}

impl CpMap {
    /// Builds from the images of the matrix units; `f(j, a, b)` must return an
    /// element of the codomain.
    pub fn from_unit_images(
        domain: FdAlgebra,
        codomain: FdAlgebra,
        f: impl Fn(usize, usize, usize) -> Result<FdElement>,
    ) -> Result<Self> {
        Self::build(domain, codomain, f, false)
    }

    pub(crate) fn build(
        domain: FdAlgebra,
        codomain: FdAlgebra,
        f: impl Fn(usize, usize, usize) -> Result<FdElement>,
        certified: bool,
    ) -> Result<Self> {
        let mut choi: Vec<Vec<CMatrix>> = domain
            .block_sizes()
            .iter()
            .map(|&r| {
                codomain
                    .block_sizes()
                    .iter()
                    .map(|&s| CMatrix::zeros(r * s, r * s))
                    .collect()
            })
            .collect();
        for (j, row) in choi.iter_mut().enumerate() {
            let r = domain.block_size(j);
            for a in 0..r {
                for b in 0..r {
                    let img = f(j, a, b)?;
                    if img.blocks().len() != codomain.num_blocks() {
                        return Err(dim_err(format!("{} codomain blocks", codomain.num_blocks()), img.blocks().len()));
                    }
                    for (k, c) in row.iter_mut().enumerate() {
                        let s = codomain.block_size(k);
                        let blk = img.block(k);
                        if blk.rows() != s || blk.cols() != s {
                            return Err(dim_err(format!("{s}x{s}"), format!("{}x{}", blk.rows(), blk.cols())));
                        }
                        for p in 0..s {
                            for q in 0..s {
                                c[(a * s + p, b * s + q)] = blk[(p, q)];
                            }
                        }
                    }
                }
            }
        }
        Ok(CpMap {
            domain,
            codomain,
            choi,
            certified,
        })
    }

    pub fn identity(alg: &FdAlgebra) -> Self {
        Self::build(alg.clone(), alg.clone(), |j, a, b| Ok(FdElement::matrix_unit(alg, j, a, b)), true)
            .expect("identity images have the right shape")
    }

    pub fn zero(domain: FdAlgebra, codomain: FdAlgebra) -> Self {
        let cod = codomain.clone();
        Self::build(domain, codomain, |_, _, _| Ok(FdElement::zero(&cod)), true).expect("zero images")
    }

    /// x ↦ Σ_i K_i x K_i*, with x in block-diagonal form and the result
    /// compressed onto the codomain's diagonal blocks. Each K_i maps the
    /// domain's representation space (Σ r_j) into the codomain's (Σ s_k).
    pub fn from_kraus(domain: FdAlgebra, codomain: FdAlgebra, kraus: &[CMatrix]) -> Result<Self> {
        let (m, n) = (domain.matrix_dim(), codomain.matrix_dim());
        for k in kraus {
            if k.rows() != n || k.cols() != m {
                return Err(dim_err(format!("{n}x{m} Kraus operator"), format!("{}x{}", k.rows(), k.cols())));
            }
        }
        let offs = domain.offsets();
        let cod = codomain.clone();
        Self::build(
            domain,
            codomain,
            |j, a, b| {
                let (p, q) = (offs[j] + a, offs[j] + b);
                let mut acc = CMatrix::zeros(n, n);
                for k in kraus {
                    for i in 0..n {
                        let kip = k[(i, p)];
                        if kip == ZERO {
                            continue;
                        }
                        for l in 0..n {
                            acc[(i, l)] += kip * k[(l, q)].conj();
                        }
                    }
                }
                FdElement::from_matrix(&cod, &acc)
            },
            true,
        )
    }

    pub fn domain(&self) -> &FdAlgebra {
        &self.domain
    }

    pub fn codomain(&self) -> &FdAlgebra {
        &self.codomain
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn choi_block(&self, j: usize, k: usize) -> &CMatrix {
        &self.choi[j][k]
    }

    /// Image of e^{(j)}_{ab} in the codomain.
    pub fn unit_image(&self, j: usize, a: usize, b: usize) -> FdElement {
        let blocks = self.choi[j]
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let s = self.codomain.block_size(k);
                CMatrix::from_fn(s, s, |p, q| c[(a * s + p, b * s + q)])
            })
            .collect();
        FdElement::new(&self.codomain, blocks).expect("Choi blocks match the codomain")
    }

    pub fn apply(&self, x: &FdElement) -> Result<FdElement> {
        if x.blocks().len() != self.domain.num_blocks() {
            return Err(dim_err(format!("{} domain blocks", self.domain.num_blocks()), x.blocks().len()));
        }
        let mut out: Vec<CMatrix> = self
            .codomain
            .block_sizes()
            .iter()
            .map(|&s| CMatrix::zeros(s, s))
            .collect();
        for (j, xj) in x.blocks().iter().enumerate() {
            let r = self.domain.block_size(j);
            if xj.rows() != r || xj.cols() != r {
                return Err(dim_err(format!("{r}x{r}"), format!("{}x{}", xj.rows(), xj.cols())));
            }
            for (k, ok) in out.iter_mut().enumerate() {
                let s = self.codomain.block_size(k);
                let c = &self.choi[j][k];
                for a in 0..r {
                    for b in 0..r {
                        let w = xj[(a, b)];
                        if w == ZERO {
                            continue;
                        }
                        for p in 0..s {
                            for q in 0..s {
                                ok[(p, q)] += w * c[(a * s + p, b * s + q)];
                            }
                        }
                    }
                }
            }
        }
        FdElement::new(&self.codomain, out)
    }

    /// Applies to a matrix (domain given in block-diagonal form; off-block
    /// entries are ignored) and returns the block-diagonal matrix of the image.
    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        Ok(self.apply(&FdElement::from_matrix(&self.domain, x)?)?.to_matrix())
    }

    /// Smallest eigenvalue over all Choi blocks.
    pub fn complete_positivity(&self, tol: f64) -> Result<PsdReport> {
        let mut min_eigenvalue = f64::INFINITY;
        for row in &self.choi {
            for c in row {
                if c.rows() > CHOI_CHECK_CAP {
                    return Err(Error::SizeCap {
                        what: "Choi block".into(),
                        size: c.rows(),
                        cap: CHOI_CHECK_CAP,
                    });
                }
                if c.rows() == 0 {
                    continue;
                }
                min_eigenvalue = min_eigenvalue.min(psd_check(c, tol)?.min_eigenvalue);
            }
        }
        if !min_eigenvalue.is_finite() {
            min_eigenvalue = 0.0;
        }
        Ok(PsdReport {
            is_psd: min_eigenvalue >= -tol,
            min_eigenvalue,
        })
    }

    /// ‖φ‖ = ‖φ(1)‖, valid for completely positive maps. Uncertified maps are
    /// checked first (tolerance 1e-9).
    pub fn norm(&self) -> Result<f64> {
        if !self.certified {
            let r = self.complete_positivity(1e-9)?;
            if !r.is_psd {
                return Err(Error::NotPositive {
                    min_eigenvalue: r.min_eigenvalue,
                    cutoff: 1e-9,
                });
            }
        }
        self.apply(&FdElement::unit(&self.domain))?.norm()
    }

    /// c·φ; certified iff c ≥ 0 and φ was.
    pub fn scale(&self, c: f64) -> Self {
        CpMap {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            choi: self
                .choi
                .iter()
                .map(|row| row.iter().map(|m| m.scale_real(c)).collect())
                .collect(),
            certified: self.certified && c >= 0.0,
        }
    }

    /// `then ∘ self`.
    pub fn then(&self, then: &CpMap) -> Result<Self> {
        if then.domain != self.codomain {
            return Err(dim_err(format!("{:?}", self.codomain.block_sizes()), format!("{:?}", then.domain.block_sizes())));
        }
        Self::build(
            self.domain.clone(),
            then.codomain.clone(),
            |j, a, b| then.apply(&self.unit_image(j, a, b)),
            self.certified && then.certified,
        )
    }

    /// x ↦ φ(K x K*) for a full-matrix domain M_d and K ∈ M_d.
    pub fn precompose_conjugation(&self, k: &CMatrix) -> Result<Self> {
        if self.domain.num_blocks() != 1 {
            return Err(Error::InvalidInput("conjugation needs a full matrix domain".into()));
        }
        let d = self.domain.block_size(0);
        if k.rows() != d || k.cols() != d {
            return Err(dim_err(format!("{d}x{d}"), format!("{}x{}", k.rows(), k.cols())));
        }
        // K e_ab K* = Σ_{c,e} K_ca conj(K_eb) e_ce.
        let cols: Vec<Vec<(usize, Complex64)>> = (0..d)
            .map(|a| (0..d).filter(|&c| k[(c, a)] != ZERO).map(|c| (c, k[(c, a)])).collect())
            .collect();
        Self::build(
            self.domain.clone(),
            self.codomain.clone(),
            |_, a, b| {
                let mut acc = FdElement::zero(&self.codomain).into_blocks();
                for &(c, kc) in &cols[a] {
                    for &(e, ke) in &cols[b] {
                        let w = kc * ke.conj();
                        for (blk, ch) in acc.iter_mut().zip(&self.choi[0]) {
                            let s = blk.rows();
                            for p in 0..s {
                                for q in 0..s {
                                    blk[(p, q)] += w * ch[(c * s + p, e * s + q)];
                                }
                            }
                        }
                    }
                }
                FdElement::new(&self.codomain, acc)
            },
            self.certified,
        )
    }

    /// x ↦ s φ(x) s with s a codomain element (the image is compressed by s).
    pub fn postcompose_conjugation(&self, s: &FdElement) -> Result<Self> {
        Self::build(
            self.domain.clone(),
            self.codomain.clone(),
            |j, a, b| s.mul(&self.unit_image(j, a, b))?.mul(&s.adjoint()),
            self.certified,
        )
    }

    /// x ↦ φ(s x s*) for a domain element s.
    pub fn precompose_element_conjugation(&self, s: &FdElement) -> Result<Self> {
        let dom = self.domain.clone();
        Self::build(
            self.domain.clone(),
            self.codomain.clone(),
            |j, a, b| {
                let e = FdElement::matrix_unit(&dom, j, a, b);
                self.apply(&s.mul(&e)?.mul(&s.adjoint())?)
            },
            self.certified,
        )
    }

    /// Restriction to the listed domain blocks.
    pub fn restrict_domain(&self, blocks: &[usize]) -> Self {
        CpMap {
            domain: self.domain.restrict(blocks),
            codomain: self.codomain.clone(),
            choi: blocks.iter().map(|&j| self.choi[j].clone()).collect(),
            certified: self.certified,
        }
    }

    /// Keeps only the listed codomain blocks (compression onto them).
    pub fn restrict_codomain(&self, blocks: &[usize]) -> Self {
        CpMap {
            domain: self.domain.clone(),
            codomain: self.codomain.restrict(blocks),
            choi: self
                .choi
                .iter()
                .map(|row| blocks.iter().map(|&k| row[k].clone()).collect())
                .collect(),
            certified: self.certified,
        }
    }

    /// Same map with a recolored domain/codomain of identical block sizes.
    pub(crate) fn with_algebras(&self, domain: FdAlgebra, codomain: FdAlgebra) -> Result<Self> {
        if domain.block_sizes() != self.domain.block_sizes() || codomain.block_sizes() != self.codomain.block_sizes() {
            return Err(Error::InvalidInput("recoloring must keep block sizes".into()));
        }
        Ok(CpMap {
            domain,
            codomain,
            choi: self.choi.clone(),
            certified: self.certified,
        })
    }

    /// φ₁ ⊕ φ₂ : dom₁ ⊕ dom₂ → cod₁ ⊕ cod₂.
    pub fn direct_sum(&self, other: &CpMap) -> Self {
        let domain = self.domain.direct_sum(&other.domain);
        let codomain = self.codomain.direct_sum(&other.codomain);
        let (k1, k2) = (self.codomain.num_blocks(), other.codomain.num_blocks());
        let mut choi = Vec::new();
        for (j, row) in self.choi.iter().enumerate() {
            let r = self.domain.block_size(j);
            let mut out = row.clone();
            out.extend(other.codomain.block_sizes().iter().map(|&s| CMatrix::zeros(r * s, r * s)));
            choi.push(out);
        }
        for (j, row) in other.choi.iter().enumerate() {
            let r = other.domain.block_size(j);
            let mut out: Vec<CMatrix> = self
                .codomain
                .block_sizes()
                .iter()
                .map(|&s| CMatrix::zeros(r * s, r * s))
                .collect();
            out.extend(row.iter().cloned());
            debug_assert_eq!(out.len(), k1 + k2);
            choi.push(out);
        }
        CpMap {
            domain,
            codomain,
            choi,
            certified: self.certified && other.certified,
        }
    }

    /// φ₁ ⊗ φ₂ with blocks enumerated lexicographically and indices in
    /// Kronecker order.
    pub fn tensor(&self, other: &CpMap) -> Result<Self> {
        let domain = self.domain.tensor(&other.domain);
        let codomain = self.codomain.tensor(&other.codomain);
        let r2s = other.domain.block_sizes().to_vec();
        let n2 = other.domain.num_blocks();
        let cod = codomain.clone();
        Self::build(
            domain,
            codomain,
            |j, a, b| {
                let (j1, j2) = (j / n2, j % n2);
                let r2 = r2s[j2];
                let x = self.unit_image(j1, a / r2, b / r2);
                let y = other.unit_image(j2, a % r2, b % r2);
                let blocks = x
                    .blocks()
                    .iter()
                    .flat_map(|xb| y.blocks().iter().map(move |yb| xb.kron(yb)))
                    .collect();
                FdElement::new(&cod, blocks)
            },
            self.certified && other.certified,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct ChoiBlockRepr {
    domain_block: usize,
    codomain_block: usize,
    size: usize,
    entries: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct CpMapRepr {
    domain: FdAlgebra,
    codomain: FdAlgebra,
    choi: Vec<ChoiBlockRepr>,
}

impl Serialize for CpMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut choi = Vec::new();
        for (j, row) in self.choi.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                if c.nnz() == 0 {
                    continue;
                }
                choi.push(ChoiBlockRepr {
                    domain_block: j,
                    codomain_block: k,
                    size: c.rows(),
                    entries: c.as_slice().iter().map(|z| [z.re, z.im]).collect(),
                });
            }
        }
        CpMapRepr {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            choi,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CpMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = CpMapRepr::deserialize(d)?;
        let mut m = CpMap::zero(r.domain, r.codomain);
        for blk in r.choi {
            let (j, k) = (blk.domain_block, blk.codomain_block);
            if j >= m.domain.num_blocks() || k >= m.codomain.num_blocks() {
                return Err(D::Error::custom(format!("Choi block ({j}, {k}) out of range")));
            }
            let size = m.domain.block_size(j) * m.codomain.block_size(k);
            if blk.size != size || blk.entries.len() != size * size {
                return Err(D::Error::custom(format!("Choi block ({j}, {k}) must be {size}x{size}")));
            }
            let data = blk.entries.iter().map(|e| Complex64::new(e[0], e[1])).collect();
            m.choi[j][k] = CMatrix::from_vec(size, size, data).map_err(D::Error::custom)?;
        }
        m.certified = false;
        Ok(m)
    }
}
