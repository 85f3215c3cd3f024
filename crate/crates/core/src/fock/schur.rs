use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::rational::{self, rat, Rational};
use crate::numkit::CMatrix;

/// ⌈k/2⌉.
pub fn ceil_half(k: usize) -> usize {
    k.div_ceil(2)
}

/// κ_k(i, j) = min(i, j, k+1−i, k+1−j)/(l+1), 1-based, l = ⌈k/2⌉.
pub fn kappa_entry(k: usize, i: usize, j: usize) -> Rational {
    let m = i.min(j).min(k + 1 - i).min(k + 1 - j);
    rat(m as i64, (ceil_half(k) + 1) as i64)
}

/// κ_k as exact rationals.
pub fn kappa_matrix(k: usize) -> Result<Vec<Vec<Rational>>> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    Ok((1..=k).map(|i| (1..=k).map(|j| kappa_entry(k, i, j)).collect()).collect())
}

pub fn kappa_dense(k: usize) -> Result<CMatrix> {
    let kap = kappa_matrix(k)?;
    Ok(CMatrix::from_fn(k, k, |i, j| rational::to_f64(&kap[i][j]).into()))
}

/// Norm of Schur multiplication by κ_k: for a PSD profile it is the largest
/// diagonal entry, l/(l+1).
pub fn kappa_schur_norm(k: usize) -> Result<Rational> {
    let kap = kappa_matrix(k)?;
    Ok((0..k).map(|i| kap[i][i].clone()).max().expect("k ≥ 1"))
}

/// Entry of A_k = 0_k ⊕ κ_k ⊕ κ_k ⊕ … (1-based indices).
pub fn a_entry(k: usize, i: usize, j: usize) -> Rational {
    block_entry(k, k, i, j)
}

/// Entry of B_k = 0_k ⊕ 0_l ⊕ κ_k ⊕ κ_k ⊕ … (1-based indices).
pub fn b_entry(k: usize, i: usize, j: usize) -> Rational {
    block_entry(k, k + ceil_half(k), i, j)
}

fn block_entry(k: usize, zero: usize, i: usize, j: usize) -> Rational {
    if i <= zero || j <= zero {
        return Rational::zero();
    }
    let (bi, bj) = ((i - zero - 1) / k, (j - zero - 1) / k);
    if bi != bj {
        return Rational::zero();
    }
    kappa_entry(k, (i - zero - 1) % k + 1, (j - zero - 1) % k + 1)
}

/// σ_{i,j} of A_k + B_k, 1-based. Index i corresponds to Fock level i − 1.
pub fn sigma_entry(k: usize, i: usize, j: usize) -> Rational {
    a_entry(k, i, j) + b_entry(k, i, j)
}

/// Exact periodic description of σ: explicit rows up to index k + l, then
/// one period of k rows, each over offsets p = j − i ∈ (−k, k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurProfile {
    pub k: usize,
    pub l: usize,
    #[serde(with = "rat_matrix")]
    pub kappa: Vec<Vec<Rational>>,
    #[serde(with = "rat_matrix")]
    pub preamble: Vec<Vec<Rational>>,
    #[serde(with = "rat_matrix")]
    pub period: Vec<Vec<Rational>>,
}

pub fn sigma_profile(k: usize) -> Result<SchurProfile> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("σ profile needs k ≥ 2, got {k}")));
    }
    let l = ceil_half(k);
    let row = |i: usize| -> Vec<Rational> {
        (0..2 * k - 1)
            .map(|pi| {
                let j = i as i64 + pi as i64 - (k as i64 - 1);
                if j < 1 {
                    Rational::zero()
                } else {
                    sigma_entry(k, i, j as usize)
                }
            })
            .collect()
    };
    Ok(SchurProfile {
        k,
        l,
        kappa: kappa_matrix(k)?,
        preamble: (1..=k + l).map(row).collect(),
        period: (k + l + 1..=2 * k + l).map(row).collect(),
    })
}

impl SchurProfile {
    /// First index of the stable zone (σ is k-periodic from here on).
    pub fn stable_start(&self) -> usize {
        self.k + self.l + 1
    }

    /// σ_{i,j} from the tables (1-based).
    pub fn sigma(&self, i: usize, j: usize) -> Rational {
        if i == 0 || j == 0 {
            return Rational::zero();
        }
        let p = j as i64 - i as i64;
        if p.unsigned_abs() as usize >= self.k {
            return Rational::zero();
        }
        let pi = (p + self.k as i64 - 1) as usize;
        if i <= self.k + self.l {
            self.preamble[i - 1][pi].clone()
        } else {
            self.period[(i - self.stable_start()) % self.k][pi].clone()
        }
    }

    /// σ at Fock levels (0-based).
    pub fn sigma_levels(&self, li: usize, lj: usize) -> Rational {
        self.sigma(li + 1, lj + 1)
    }

    /// Checks σ_{i,i} = 1 and |σ_{i,i+p} − 1| ≤ (2+p)/(l+1), 0 < p < l, for
    /// i in (k+l, k+l+span].
    pub fn check_stable_claims(&self, span: usize) -> SigmaClaimReport {
        let start = self.stable_start();
        let one = Rational::one();
        let mut diag_failures = Vec::new();
        let mut offdiag_failures = Vec::new();
        let mut max_diag_defect = Rational::zero();
        let mut max_offdiag_excess = Rational::zero();
        for i in start..start + span {
            let d = (self.sigma(i, i) - &one).abs();
            if d > max_diag_defect {
                max_diag_defect = d.clone();
            }
            if !d.is_zero() {
                diag_failures.push(SigmaEntry {
                    i,
                    j: i,
                    sigma: self.sigma(i, i),
                });
            }
            for p in 1..self.l {
                let s = self.sigma(i, i + p);
                let bound = rat((2 + p) as i64, (self.l + 1) as i64);
                let excess = (&s - &one).abs() - &bound;
                if excess > max_offdiag_excess {
                    max_offdiag_excess = excess.clone();
                }
                if excess > Rational::zero() {
                    offdiag_failures.push(SigmaEntry { i, j: i + p, sigma: s });
                }
            }
        }
        SigmaClaimReport {
            k: self.k,
            l: self.l,
            range: (start, start + span - 1),
            pass: diag_failures.is_empty() && offdiag_failures.is_empty(),
            max_diag_defect,
            max_offdiag_excess,
            diag_failures,
            offdiag_failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaEntry {
    pub i: usize,
    pub j: usize,
    #[serde(with = "rational::serde_pq")]
    pub sigma: Rational,
}

/// Outcome of the stable-zone σ claims for one k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaClaimReport {
    pub k: usize,
    pub l: usize,
    /// Inclusive index range checked.
    pub range: (usize, usize),
    pub pass: bool,
    #[serde(with = "rational::serde_pq")]
    pub max_diag_defect: Rational,
    /// max (|σ_{i,i+p} − 1| − (2+p)/(l+1)), floored at 0.
    #[serde(with = "rational::serde_pq")]
    pub max_offdiag_excess: Rational,
    pub diag_failures: Vec<SigmaEntry>,
    pub offdiag_failures: Vec<SigmaEntry>,
}

/// d_k = 1 + n + … + n^{k−1}.
pub fn d_k(n: usize, k: usize) -> u128 {
    (0..k).map(|e| (n as u128).pow(e as u32)).sum()
}

/// d_k ≡ k (mod n − 1).
pub fn d_k_congruence_holds(n: usize, k: usize) -> bool {
    let m = (n - 1) as u128;
    d_k(n, k) % m == k as u128 % m
}

mod rat_matrix {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::numkit::rational::{self, Rational};

    pub fn serialize<S: Serializer>(m: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(rational::format).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
        let rows: Vec<Vec<String>> = Vec::deserialize(d)?;
        rows.iter()
            .map(|r| {
                r.iter()
                    .map(|x| rational::parse(x).map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect()
    }
}
