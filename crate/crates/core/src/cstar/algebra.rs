use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::numkit::{operator_norm, CMatrix, ONE};

/// Finite-dimensional C*-algebra M_{r_1} ⊕ … ⊕ M_{r_s} with each block
/// assigned to one of `color_count` colors (the ideal decomposition
/// F = F^(0) ⊕ … ⊕ F^(n)).
///
/// The color count is stored explicitly so that a color may be empty, e.g.
/// after pruning removed all of its blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FdAlgebraRepr", into = "FdAlgebraRepr")]
pub struct FdAlgebra {
    block_sizes: Vec<usize>,
    colors: Vec<usize>,
    color_count: usize,
}

#[derive(Serialize, Deserialize)]
struct FdAlgebraRepr {
    block_sizes: Vec<usize>,
    colors: Vec<usize>,
    color_count: usize,
}

impl TryFrom<FdAlgebraRepr> for FdAlgebra {
    type Error = Error;
    fn try_from(r: FdAlgebraRepr) -> Result<Self> {
        FdAlgebra::with_color_count(r.block_sizes, r.colors, r.color_count)
    }
}

impl From<FdAlgebra> for FdAlgebraRepr {
    fn from(a: FdAlgebra) -> Self {
        FdAlgebraRepr {
            block_sizes: a.block_sizes,
            colors: a.colors,
            color_count: a.color_count,
        }
    }
}

impl FdAlgebra {
    /// Colors must form the contiguous range {0..n}.
    pub fn new(block_sizes: Vec<usize>, colors: Vec<usize>) -> Result<Self> {
        let count = colors.iter().max().map_or(1, |m| m + 1);
        let a = Self::with_color_count(block_sizes, colors, count)?;
        for c in 0..count {
            if a.blocks_of_color(c).is_empty() {
                return Err(Error::InvalidInput(format!("color {c} has no block")));
            }
        }
        Ok(a)
    }

    pub fn with_color_count(block_sizes: Vec<usize>, colors: Vec<usize>, color_count: usize) -> Result<Self> {
        if block_sizes.len() != colors.len() {
            return Err(dim_err(
                format!("{} colors", block_sizes.len()),
                format!("{}", colors.len()),
            ));
        }
        if let Some(&z) = block_sizes.iter().find(|&&r| r == 0) {
            return Err(Error::InvalidInput(format!("block size {z} is not positive")));
        }
        if let Some(&c) = colors.iter().find(|&&c| c >= color_count) {
            return Err(Error::InvalidInput(format!("color {c} outside 0..{color_count}")));
        }
        if color_count == 0 {
            return Err(Error::InvalidInput("color count must be positive".into()));
        }
        Ok(FdAlgebra {
            block_sizes,
            colors,
            color_count,
        })
    }

    /// Full matrix algebra M_d, one color.
    pub fn full(d: usize) -> Self {
        FdAlgebra {
            block_sizes: vec![d],
            colors: vec![0],
            color_count: 1,
        }
    }

    /// Diagonal algebra C^m with the given colors.
    pub fn diagonal(colors: Vec<usize>) -> Result<Self> {
        Self::new(vec![1; colors.len()], colors)
    }

    pub fn num_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn block_size(&self, j: usize) -> usize {
        self.block_sizes[j]
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn color_of(&self, j: usize) -> usize {
        self.colors[j]
    }

    /// n + 1.
    pub fn color_count(&self) -> usize {
        self.color_count
    }

    /// Vector-space dimension Σ r_j².
    pub fn total_dim(&self) -> usize {
        self.block_sizes.iter().map(|r| r * r).sum()
    }

    /// Size Σ r_j of the block-diagonal representation.
    pub fn matrix_dim(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// Start of each block in the block-diagonal representation.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.block_sizes
            .iter()
            .map(|r| {
                let o = acc;
                acc += r;
                o
            })
            .collect()
    }

    pub fn blocks_of_color(&self, c: usize) -> Vec<usize> {
        (0..self.num_blocks()).filter(|&j| self.colors[j] == c).collect()
    }

    /// Subalgebra on the listed blocks (order kept), colors unchanged.
    pub fn restrict(&self, blocks: &[usize]) -> Self {
        FdAlgebra {
            block_sizes: blocks.iter().map(|&j| self.block_sizes[j]).collect(),
            colors: blocks.iter().map(|&j| self.colors[j]).collect(),
            color_count: self.color_count,
        }
    }

    /// Blocks of `self` followed by blocks of `other`; color i of both stays color i.
    pub fn direct_sum(&self, other: &Self) -> Self {
        FdAlgebra {
            block_sizes: [self.block_sizes.clone(), other.block_sizes.clone()].concat(),
            colors: [self.colors.clone(), other.colors.clone()].concat(),
            color_count: self.color_count.max(other.color_count),
        }
    }

    /// Blocks (j1, j2) in lexicographic order, sizes multiplied, color
    /// c1·(n2+1) + c2.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut block_sizes = Vec::new();
        let mut colors = Vec::new();
        for (j1, &r1) in self.block_sizes.iter().enumerate() {
            for (j2, &r2) in other.block_sizes.iter().enumerate() {
                block_sizes.push(r1 * r2);
                colors.push(self.colors[j1] * other.color_count + other.colors[j2]);
            }
        }
        FdAlgebra {
            block_sizes,
            colors,
            color_count: self.color_count * other.color_count,
        }
    }
}

/// Element of an [`FdAlgebra`]: one square matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct FdElement {
    blocks: Vec<CMatrix>,
}

impl FdElement {
    pub fn new(alg: &FdAlgebra, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != alg.num_blocks() {
            return Err(dim_err(format!("{} blocks", alg.num_blocks()), blocks.len()));
        }
        for (j, b) in blocks.iter().enumerate() {
            let r = alg.block_size(j);
            if b.rows() != r || b.cols() != r {
                return Err(dim_err(format!("block {j} of size {r}x{r}"), format!("{}x{}", b.rows(), b.cols())));
            }
        }
        Ok(FdElement { blocks })
    }

    pub fn zero(alg: &FdAlgebra) -> Self {
        FdElement {
            blocks: alg.block_sizes().iter().map(|&r| CMatrix::zeros(r, r)).collect(),
        }
    }

    pub fn unit(alg: &FdAlgebra) -> Self {
        FdElement {
            blocks: alg.block_sizes().iter().map(|&r| CMatrix::identity(r)).collect(),
        }
    }

    /// Unit 1_{F^(c)} of one color.
    pub fn color_unit(alg: &FdAlgebra, c: usize) -> Self {
        FdElement {
            blocks: (0..alg.num_blocks())
                .map(|j| {
                    let r = alg.block_size(j);
                    if alg.color_of(j) == c {
                        CMatrix::identity(r)
                    } else {
                        CMatrix::zeros(r, r)
                    }
                })
                .collect(),
        }
    }

    /// Matrix unit e^{(j)}_{ab}.
    pub fn matrix_unit(alg: &FdAlgebra, j: usize, a: usize, b: usize) -> Self {
        let mut x = Self::zero(alg);
        x.blocks[j][(a, b)] = ONE;
        x
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &CMatrix {
        &self.blocks[j]
    }

    pub fn into_blocks(self) -> Vec<CMatrix> {
        self.blocks
    }

    /// Block-diagonal matrix of size Σ r_j.
    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::block_diag(&self.blocks)
    }

    /// Reads the diagonal blocks of a matrix; off-block entries are ignored.
    pub fn from_matrix(alg: &FdAlgebra, m: &CMatrix) -> Result<Self> {
        let d = alg.matrix_dim();
        if m.rows() != d || m.cols() != d {
            return Err(dim_err(format!("{d}x{d}"), format!("{}x{}", m.rows(), m.cols())));
        }
        let blocks = alg
            .offsets()
            .iter()
            .zip(alg.block_sizes())
            .map(|(&o, &r)| {
                let idx: Vec<usize> = (o..o + r).collect();
                m.submatrix(&idx, &idx)
            })
            .collect();
        Ok(FdElement { blocks })
    }

    pub fn map_blocks(&self, f: impl Fn(&CMatrix) -> Result<CMatrix>) -> Result<Self> {
        Ok(FdElement {
            blocks: self.blocks.iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(FdElement {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a.try_matmul(b))
                .collect::<Result<_>>()?,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(FdElement {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a.try_add(b))
                .collect::<Result<_>>()?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(FdElement {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a.try_sub(b))
                .collect::<Result<_>>()?,
        })
    }

    pub fn adjoint(&self) -> Self {
        FdElement {
            blocks: self.blocks.iter().map(CMatrix::adjoint).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        FdElement {
            blocks: self.blocks.iter().map(|b| b.scale_real(c)).collect(),
        }
    }

    /// max_j ‖x_j‖.
    pub fn norm(&self) -> Result<f64> {
        let mut best = 0.0_f64;
        for b in &self.blocks {
            best = best.max(operator_norm(b)?);
        }
        Ok(best)
    }

    /// Keeps the listed blocks, in order.
    pub fn restrict(&self, blocks: &[usize]) -> Self {
        FdElement {
            blocks: blocks.iter().map(|&j| self.blocks[j].clone()).collect(),
        }
    }
}
