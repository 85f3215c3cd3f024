use num_traits::{One, Zero};
use serde::Serialize;

use super::cover::DiscreteCover;
use super::space::{BandMatrix, CoarseSpace};
use crate::error::{Error, Result};
use crate::numkit::{rational, Rational, SpMatrix};

/// h^(i) = (1/r) Σ_{U ∈ 𝒰^(i)} Σ_{l=1}^r χ_{B(U,l−1)}, their sum h, and the
/// normalized h_i = (h^(i)/h)^{1/2}. The raw functions and the ratios are
/// exact rationals; only the final square root is a float.
#[derive(Debug, Clone)]
pub struct HFamily {
    r: usize,
    h_raw: Vec<Vec<Rational>>,
    h_total: Vec<Rational>,
    ratios: Vec<Vec<Rational>>,
    h_norm: Vec<Vec<f64>>,
}

impl HFamily {
    /// Requires every family to be 2r-discrete so that the (r−1)-neighbourhoods
    /// of distinct same-family sets are disjoint (and then h^(i) ≤ 1).
    pub fn new(space: &CoarseSpace, cover: &DiscreteCover, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidInput("r must be ≥ 1".into()));
        }
        if !cover.is_discrete(2 * r as u64) {
            return Err(Error::Precondition(format!(
                "families must be {}-discrete for r = {r}; least same-family distance is {}",
                2 * r,
                cover.separation().unwrap_or(u64::MAX)
            )));
        }
        let n = space.len();
        let denom = Rational::from_integer(r.into());
        let h_raw: Vec<Vec<Rational>> = cover
            .families()
            .iter()
            .map(|fam| {
                let mut count = vec![0u64; n];
                for set in fam {
                    for (x, c) in count.iter_mut().enumerate() {
                        // #{1 ≤ l ≤ r : d(x,U) ≤ l − 1} = r − d(x,U), floored at 0.
                        *c += (r as u64).saturating_sub(space.dist_to_set(x, set));
                    }
                }
                count.into_iter().map(|c| Rational::from_integer(c.into()) / &denom).collect()
            })
            .collect();
        let h_total: Vec<Rational> =
            (0..n).map(|x| h_raw.iter().fold(Rational::zero(), |acc, h| acc + &h[x])).collect();
        let upper = Rational::from_integer((cover.families().len() as u64).into());
        for (x, h) in h_total.iter().enumerate() {
            if *h < Rational::one() || *h > upper {
                return Err(Error::Degenerate(format!(
                    "h({x}) = {} outside [1, {}]",
                    rational::format(h),
                    cover.families().len()
                )));
            }
        }
        let ratios: Vec<Vec<Rational>> =
            h_raw.iter().map(|hi| hi.iter().zip(&h_total).map(|(a, h)| a / h).collect()).collect();
        let h_norm = ratios.iter().map(|q| q.iter().map(|v| rational::to_f64(v).sqrt()).collect()).collect();
        Ok(HFamily {
            r,
            h_raw,
            h_total,
            ratios,
            h_norm,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// n + 1.
    pub fn family_count(&self) -> usize {
        self.h_raw.len()
    }

    pub fn h_raw(&self) -> &[Vec<Rational>] {
        &self.h_raw
    }

    pub fn h_total(&self) -> &[Rational] {
        &self.h_total
    }

    /// h^(i)/h, exactly; these sum to 1 at every point.
    pub fn ratios(&self) -> &[Vec<Rational>] {
        &self.ratios
    }

    pub fn h_norm(&self) -> &[Vec<f64>] {
        &self.h_norm
    }

    /// max_x |Σ_i h_i(x)² − 1| in floating point.
    pub fn partition_defect(&self) -> f64 {
        (0..self.h_total.len())
            .map(|x| (self.h_norm.iter().map(|h| h[x] * h[x]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Exact Σ_i h^(i)/h = 1 at every point.
    pub fn ratios_sum_to_one(&self) -> bool {
        (0..self.h_total.len()).all(|x| self.ratios.iter().fold(Rational::zero(), |acc, q| acc + &q[x]).is_one())
    }

    /// Largest |h^(i)(x) − h^(i)(y)|·r − d(x,y) over all pairs and families,
    /// as an exact rational; ≤ 0 means every h^(i) is (1/r)-Lipschitz.
    pub fn lipschitz_excess(&self, space: &CoarseSpace) -> Rational {
        let rr = Rational::from_integer(self.r.into());
        let n = space.len();
        let mut worst: Option<Rational> = None;
        for h in &self.h_raw {
            for x in 0..n {
                for y in x + 1..n {
                    let e = rational::abs(&(&h[x] - &h[y])) * &rr - Rational::from_integer(space.d(x, y).into());
                    if worst.as_ref().is_none_or(|w| e > *w) {
                        worst = Some(e);
                    }
                }
            }
        }
        worst.unwrap_or_else(Rational::zero)
    }
}

/// [f, a] for the diagonal multiplication operator by f.
pub fn diag_commutator(f: &[f64], a: &SpMatrix) -> SpMatrix {
    a.schur(|x, y| f[x] - f[y])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorReport {
    /// ‖[h^(i), a]‖.
    pub per_i: Vec<f64>,
    /// (w(a)/r)·b(a)·‖a‖.
    pub per_i_bound: f64,
    /// ‖[h, a]‖.
    pub total: f64,
    /// (n+1)/r·w(a)·b(a)·‖a‖.
    pub paper_bound: f64,
    pub holds: bool,
}

pub fn commutator_report(a: &BandMatrix, hf: &HFamily) -> Result<CommutatorReport> {
    let to_f = |v: &[Rational]| v.iter().map(rational::to_f64).collect::<Vec<_>>();
    let per_i = hf
        .h_raw()
        .iter()
        .map(|h| diag_commutator(&to_f(h), a.matrix()).operator_norm())
        .collect::<Result<Vec<_>>>()?;
    let total = diag_commutator(&to_f(hf.h_total()), a.matrix()).operator_norm()?;
    let norm = a.norm()?;
    let per_i_bound = a.width() as f64 / hf.r() as f64 * a.b() as f64 * norm;
    let paper_bound = hf.family_count() as f64 * per_i_bound;
    let holds = total <= paper_bound + 1e-9 && per_i.iter().all(|&c| c <= per_i_bound + 1e-9);
    Ok(CommutatorReport {
        per_i,
        per_i_bound,
        total,
        paper_bound,
        holds,
    })
}
