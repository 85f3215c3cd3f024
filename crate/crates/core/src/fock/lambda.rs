use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cstar::{order_zero_report, BlockMap, FdAlgebra, OrderZeroReport};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::numkit::rational::{self, rat, Rational};
use crate::numkit::SpMatrix;

use super::ops::{word_op, LevelOperator};
use super::schur::{ceil_half, kappa_entry, sigma_profile, SchurProfile};
use super::words::{complete_copies, Sector, TruncatedFock, Word};

/// Levels [r + km, r + k(m+1)) of the copies that fit below the depth: the
/// range on which Λ_k restricted to the window [r, r+k) is multiplicative.
pub fn safe_levels(depth: usize, r: usize, k: usize) -> (usize, usize) {
    (r, r + k * complete_copies(depth, r, k))
}

/// Λ_k(x) = Σ_m x ⊗ 1_{km} inside the truncation, for x on the levels
/// [r, r + k).
pub fn lambda_k(x: &LevelOperator, r: usize, k: usize) -> Result<LevelOperator> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    if let Some((lo, hi)) = x.level_support() {
        if lo < r || hi >= r + k {
            return Err(Error::InvalidInput(format!(
                "support on levels [{lo}, {hi}] exceeds the window [{r}, {})",
                r + k
            )));
        }
    }
    let fock = x.fock();
    let d = fock.dim();
    let mut triplets = Vec::new();
    for (i, j, v) in x.matrix().iter() {
        let (a, b) = (fock.word(i), fock.word(j));
        let top = a.len().max(b.len());
        let mut len = 0;
        while top + len <= fock.depth() {
            for w in fock.common_extensions(a, b, len)? {
                if let (Some(p), Some(q)) = (fock.index_of(&a.concat(&w)), fock.index_of(&b.concat(&w))) {
                    triplets.push((p, q, v));
                }
            }
            len += k;
        }
    }
    LevelOperator::new(fock.clone(), SpMatrix::from_triplets(d, d, triplets))
}

/// Windows of ψ_k: P_k on [k, 2k) and Q_k on [k+l, k+l+k).
pub fn windows(k: usize) -> [(usize, usize); 2] {
    let l = ceil_half(k);
    [(k, 2 * k), (k + l, 2 * k + l)]
}

/// Least depth for ψ_k: 2(⌈k/2⌉ + 2k).
pub fn min_depth(k: usize) -> usize {
    2 * (ceil_half(k) + 2 * k)
}

/// ψ_k(a) = κ_k * (P_k a P_k) ⊕ κ_k * (Q_k a Q_k).
#[derive(Debug, Clone)]
pub struct PsiPair {
    pub p: LevelOperator,
    pub q: LevelOperator,
}

pub fn psi_k(a: &LevelOperator, k: usize) -> Result<PsiPair> {
    if k < 1 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    let depth = a.fock().depth();
    if depth < min_depth(k) {
        return Err(Error::Precondition(format!(
            "depth {depth} is below 2(⌈k/2⌉ + 2k) = {}",
            min_depth(k)
        )));
    }
    let [(p0, p1), (q0, q1)] = windows(k);
    let kap = |r: usize| move |li: usize, lj: usize| rational::to_f64(&kappa_entry(k, li - r + 1, lj - r + 1));
    Ok(PsiPair {
        p: a.compress_levels(p0, p1).schur_levels(kap(p0)),
        q: a.compress_levels(q0, q1).schur_levels(kap(q0)),
    })
}

/// φ_k(x ⊕ y) = Λ_k(x) + Λ_k(y).
pub fn phi_k(pair: &PsiPair, k: usize) -> Result<LevelOperator> {
    let [(p0, _), (q0, _)] = windows(k);
    lambda_k(&pair.p, p0, k)?.add(&lambda_k(&pair.q, q0, k)?)
}

/// One summand of φ_k as a map out of B(window) = M_D, with images restricted
/// to the complete copies.
pub struct LambdaMap {
    fock: Arc<TruncatedFock>,
    k: usize,
    copies: usize,
    window: Vec<usize>,
    domain: FdAlgebra,
}

impl LambdaMap {
    pub fn new(fock: Arc<TruncatedFock>, r: usize, k: usize) -> Result<Self> {
        if let Sector::Lambda { r: sr, k: sk, .. } = fock.sector() {
            if (sr, sk) != (r, k) {
                return Err(Error::InvalidInput(format!("Λ sector is for window ({sr}, {sk}), not ({r}, {k})")));
            }
        }
        let copies = complete_copies(fock.depth(), r, k);
        if copies == 0 {
            return Err(Error::Precondition(format!("window [{r}, {}) exceeds depth {}", r + k, fock.depth())));
        }
        let window: Vec<usize> = fock.levels_range(r, r + k).collect();
        let expected: usize = (r..r + k).map(|l| fock.n().pow(l as u32)).sum();
        if window.len() != expected {
            return Err(Error::InvalidInput("the basis must contain the whole window".into()));
        }
        Ok(LambdaMap {
            domain: FdAlgebra::full(window.len()),
            fock,
            k,
            copies,
            window,
        })
    }

    pub fn fock(&self) -> &Arc<TruncatedFock> {
        &self.fock
    }

    pub fn window_dim(&self) -> usize {
        self.window.len()
    }
}

impl BlockMap for LambdaMap {
    type Op = SpMatrix;

    fn domain(&self) -> &FdAlgebra {
        &self.domain
    }

    fn unit_image(&self, _block: usize, a: usize, b: usize) -> SpMatrix {
        let (wa, wb) = (self.fock.word(self.window[a]), self.fock.word(self.window[b]));
        let d = self.fock.dim();
        let mut triplets = Vec::new();
        for m in 0..self.copies {
            // Window words and sectors admitted by `new` never need brute force.
            for w in self.fock.common_extensions(wa, wb, self.k * m).unwrap_or_default() {
                if let (Some(p), Some(q)) = (self.fock.index_of(&wa.concat(&w)), self.fock.index_of(&wb.concat(&w))) {
                    triplets.push((p, q, crate::numkit::ONE));
                }
            }
        }
        SpMatrix::from_triplets(d, d, triplets)
    }
}

/// Order-zero report for the summand of φ_k on the window starting at r,
/// computed on its reducing sector.
pub fn summand_order_zero(n: usize, depth: usize, r: usize, k: usize, tol: f64, exec: Exec) -> Result<OrderZeroReport> {
    let fock = Arc::new(TruncatedFock::lambda(n, depth, r, k)?);
    let map = LambdaMap::new(fock, r, k)?;
    order_zero_report(&map, &[0], tol, exec)
}

/// Norms and order-zero reports of the Fock triple (ψ_k, φ_k).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FockTripleReport {
    pub n: usize,
    pub k: usize,
    pub depth: usize,
    /// ‖ψ_k‖ = ‖ψ_k(1)‖ (completely positive).
    pub psi_norm: f64,
    /// ‖φ_k‖ = ‖φ_k(1 ⊕ 1)‖.
    pub phi_norm: f64,
    pub summands: [OrderZeroReport; 2],
}

/// ψ_k(1) and φ_k(1 ⊕ 1) are diagonal in the word basis with level-dependent
/// entries, so a tail sector holding both windows in full gives their norms.
pub fn fock_triple_report(n: usize, k: usize, depth: usize, tol: f64, exec: Exec) -> Result<FockTripleReport> {
    let [(_, _), (_, q1)] = windows(k);
    let fock = Arc::new(TruncatedFock::tail(n, depth, q1 - 1)?);
    let one = LevelOperator::identity(&fock);
    let pair = psi_k(&one, k)?;
    let psi_norm = pair.p.norm()?.max(pair.q.norm()?);
    let [(p0, p1), (q0, q1)] = windows(k);
    let unit = PsiPair {
        p: LevelOperator::level_projection(&fock, p0, p1),
        q: LevelOperator::level_projection(&fock, q0, q1),
    };
    let phi_norm = phi_k(&unit, k)?.norm()?;
    let summands = [
        summand_order_zero(n, depth, p0, k, tol, exec)?,
        summand_order_zero(n, depth, q0, k, tol, exec)?,
    ];
    Ok(FockTripleReport {
        n,
        k,
        depth,
        psi_norm,
        phi_norm,
        summands,
    })
}

/// max entrywise |φ_kψ_k(T_μT_ν*) − (A_k + B_k) * (T_μT_ν*)| on a basis.
pub fn composite_schur_gap(fock: &Arc<TruncatedFock>, mu: &Word, nu: &Word, k: usize) -> Result<f64> {
    let a = word_op(fock, mu, nu)?;
    let composite = phi_k(&psi_k(&a, k)?, k)?;
    let profile = sigma_profile(k)?;
    let schur = a.schur_levels(|li, lj| rational::to_f64(&profile.sigma_levels(li, lj)));
    Ok(composite.sub(&schur)?.max_abs())
}

/// Default truncation for the composite check: depth 6k, tail sector with the
/// longest prefix that keeps the basis within `cap` words.
pub fn composite_fock(n: usize, k: usize, cap: usize) -> Result<Arc<TruncatedFock>> {
    let depth = 6 * k;
    let prefix = TruncatedFock::tail_prefix_for_cap(n, depth, cap);
    Ok(Arc::new(TruncatedFock::tail(n, depth, prefix)?))
}

/// Exact Calkin-norm defect ‖s_μ s_ν* − q φ_kψ_k(T_μT_ν*)‖ and its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalkinDefect {
    pub mu_len: usize,
    pub nu_len: usize,
    pub k: usize,
    #[serde(with = "rational::serde_pq")]
    pub exact_sup: Rational,
    #[serde(with = "rational::serde_pq")]
    pub paper_bound: Rational,
    pub composite_matches_schur: Option<bool>,
}

impl CalkinDefect {
    pub fn within_bound(&self) -> bool {
        self.exact_sup <= self.paper_bound
    }
}

/// φ_kψ_k(T_μT_ν*) = Σ_t σ_{|μ|+t, |ν|+t} e_{μ,ν} ⊗ 1_t, a sum of partial
/// isometries with pairwise orthogonal ranges and domains, so the Calkin norm
/// of the difference is limsup_t |1 − σ|: the max over one period of the
/// stable zone. Depends on the words only through their lengths.
pub fn calkin_defect(mu_len: usize, nu_len: usize, k: usize) -> Result<CalkinDefect> {
    let profile = sigma_profile(k)?;
    calkin_defect_with(&profile, mu_len, nu_len)
}

pub fn calkin_defect_with(profile: &SchurProfile, mu_len: usize, nu_len: usize) -> Result<CalkinDefect> {
    let k = profile.k;
    if k <= 2 * mu_len.max(nu_len) {
        return Err(Error::Precondition(format!(
            "need k > 2·max(|μ|, |ν|) = {}, got k = {k}",
            2 * mu_len.max(nu_len)
        )));
    }
    let start = profile.stable_start();
    let one = Rational::one();
    let mut exact_sup = Rational::zero();
    for t in 0..k {
        let (i, j) = (start + mu_len + t, start + nu_len + t);
        let d = (&one - profile.sigma(i, j)).abs();
        if d > exact_sup {
            exact_sup = d;
        }
    }
    let p = mu_len.abs_diff(nu_len) as i64;
    Ok(CalkinDefect {
        mu_len,
        nu_len,
        k,
        exact_sup,
        paper_bound: rat(2 * (2 + p), k as i64),
        composite_matches_schur: None,
    })
}

/// One CSV row of the Calkin table.
#[derive(Debug, Clone, Serialize)]
pub struct CalkinRow {
    pub n: usize,
    pub k: usize,
    pub mu_len: usize,
    pub nu_len: usize,
    pub exact_sup: f64,
    pub exact_sup_rational: String,
    pub paper_bound: f64,
    pub paper_bound_rational: String,
    pub within_bound: bool,
}

impl CalkinRow {
    pub fn new(n: usize, d: &CalkinDefect) -> Self {
        CalkinRow {
            n,
            k: d.k,
            mu_len: d.mu_len,
            nu_len: d.nu_len,
            exact_sup: rational::to_f64(&d.exact_sup),
            exact_sup_rational: rational::format(&d.exact_sup),
            paper_bound: rational::to_f64(&d.paper_bound),
            paper_bound_rational: rational::format(&d.paper_bound),
            within_bound: d.within_bound(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::ops::{creation, matrix_unit};
    use crate::fock::words::words_up_to;
    use crate::numkit::Operator;

    fn full(n: usize, l: usize) -> Arc<TruncatedFock> {
        Arc::new(TruncatedFock::full(n, l).unwrap())
    }

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    /// Random-ish operator on the window levels, from a fixed pattern.
    fn window_op(f: &Arc<TruncatedFock>, r: usize, k: usize, salt: u64) -> LevelOperator {
        let idx: Vec<usize> = f.levels_range(r, r + k).collect();
        let mut state = salt.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 0.5
        };
        let trip: Vec<_> = idx
            .iter()
            .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
            .map(|(i, j)| (i, j, num_complex::Complex64::new(next(), next())))
            .collect();
        LevelOperator::new(f.clone(), SpMatrix::from_triplets(f.dim(), f.dim(), trip)).unwrap()
    }

    #[test]
    fn lambda_of_window_identity_is_projection() {
        let f = full(2, 6);
        let x = LevelOperator::level_projection(&f, 2, 4);
        let lx = lambda_k(&x, 2, 2).unwrap();
        assert_eq!(lx.sub(&LevelOperator::level_projection(&f, 2, 7)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn lambda_is_multiplicative_on_safe_levels() {
        let f = full(2, 7);
        let (r, k) = (2, 2);
        let (lo, hi) = safe_levels(7, r, k);
        assert_eq!((lo, hi), (2, 8));
        let x = window_op(&f, r, k, 1);
        let y = window_op(&f, r, k, 2);
        let lhs = lambda_k(&x.mul(&y).unwrap(), r, k).unwrap();
        let rhs = lambda_k(&x, r, k).unwrap().mul(&lambda_k(&y, r, k).unwrap()).unwrap();
        let gap = lhs.sub(&rhs).unwrap().compress_levels(lo, hi).max_abs();
        assert!(gap <= 1e-10, "{gap}");
    }

    #[test]
    fn lambda_of_matrix_units_matches_word_ops() {
        // Λ_k(e_{μ,ν}) = e_{u,v} ⊗ T̂_μ̄ T̂_ν̄*: on the full truncation it is
        // the sum of e_{μw,νw} over |w| ≡ 0 mod k, checked entry by entry.
        let f = full(2, 6);
        let k = 2;
        for mu in words_up_to(2, 3).filter(|x| (2..4).contains(&x.len())) {
            for nu in words_up_to(2, 3).filter(|x| (2..4).contains(&x.len())) {
                let l = lambda_k(&matrix_unit(&f, &mu, &nu).unwrap(), 2, k).unwrap();
                let mut expect = LevelOperator::zero(&f);
                for m in 0..=2 {
                    let len = k * m;
                    if mu.len().max(nu.len()) + len > 6 {
                        break;
                    }
                    for s in super::super::words::all_words(2, len) {
                        let e = matrix_unit(&f, &mu.concat(&s), &nu.concat(&s)).unwrap();
                        expect = expect.add(&e).unwrap();
                    }
                }
                assert_eq!(l.sub(&expect).unwrap().max_abs(), 0.0, "{mu} {nu}");
            }
        }
        // The shift part: Λ_2(e_{μ,ν}) restricted to |μ|,|ν| = 2 is the
        // compression of T_μT_ν* to lengths ≡ 0 mod 2.
        let t = word_op(&f, &w("12"), &w("21")).unwrap();
        let l = lambda_k(&matrix_unit(&f, &w("12"), &w("21")).unwrap(), 2, 2).unwrap();
        let even = t.matrix().filter(|i, _| f.level(i) % 2 == 0);
        assert_eq!(l.matrix().try_sub(&even).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn lambda_rejects_support_outside_window() {
        let f = full(2, 4);
        let t1 = creation(&f, 1).unwrap();
        assert!(lambda_k(&t1, 1, 2).is_err());
    }

    #[test]
    fn psi_of_zero_and_identity() {
        let k = 2;
        let f = full(2, min_depth(k));
        let z = psi_k(&LevelOperator::zero(&f), k).unwrap();
        assert_eq!(z.p.matrix().nnz() + z.q.matrix().nnz(), 0);
        let id = psi_k(&LevelOperator::identity(&f), k).unwrap();
        // κ_2 = (1/2)·ones, so both compressions are half the window projections.
        let [(p0, p1), (q0, q1)] = windows(k);
        let half_p = LevelOperator::level_projection(&f, p0, p1).matrix().scale_real(0.5);
        let half_q = LevelOperator::level_projection(&f, q0, q1).matrix().scale_real(0.5);
        assert_eq!(id.p.matrix().try_sub(&half_p).unwrap().max_abs(), 0.0);
        assert_eq!(id.q.matrix().try_sub(&half_q).unwrap().max_abs(), 0.0);
        assert!(psi_k(&LevelOperator::zero(&full(2, 5)), k).is_err());
    }

    #[test]
    fn phi_of_zero_is_zero() {
        let k = 2;
        let f = full(2, min_depth(k));
        let z = psi_k(&LevelOperator::zero(&f), k).unwrap();
        assert_eq!(phi_k(&z, k).unwrap().matrix().nnz(), 0);
    }

    #[test]
    fn composite_equals_sigma_schur() {
        let k = 2;
        let f = full(2, 10);
        for mu in words_up_to(2, 2) {
            for nu in words_up_to(2, 2) {
                assert!(composite_schur_gap(&f, &mu, &nu, k).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn composite_on_tail_sector_matches_full() {
        // Entries on the tail sector agree with the full truncation.
        let k = 2;
        let full_f = full(2, 12);
        let tail = Arc::new(TruncatedFock::tail(2, 12, 5).unwrap());
        let (mu, nu) = (w("1"), w("21"));
        let a_full = phi_k(&psi_k(&word_op(&full_f, &mu, &nu).unwrap(), k).unwrap(), k).unwrap();
        let a_tail = phi_k(&psi_k(&word_op(&tail, &mu, &nu).unwrap(), k).unwrap(), k).unwrap();
        let dense_full = a_full.matrix();
        for (i, j, v) in a_tail.matrix().iter() {
            let (p, q) = (
                full_f.index_of(tail.word(i)).unwrap(),
                full_f.index_of(tail.word(j)).unwrap(),
            );
            assert_eq!(dense_full.get(p, q), v);
        }
        let count = dense_full
            .iter()
            .filter(|&(p, q, _)| tail.index_of(full_f.word(p)).is_some() && tail.index_of(full_f.word(q)).is_some())
            .count();
        assert_eq!(count, a_tail.matrix().nnz());
    }

    #[test]
    fn summands_are_order_zero_on_small_case() {
        for r in [2, 3] {
            let rep = summand_order_zero(2, 9, r, 2, 1e-10, Exec::Sequential).unwrap();
            assert!(rep.is_order_zero, "{rep:?}");
        }
    }

    #[test]
    fn lambda_sector_agrees_with_full_truncation() {
        // The order-zero data computed on the reducing sector coincide with the
        // full truncation (restricted to complete copies).
        let (n, depth, r, k) = (2, 8, 2, 3);
        let full_map = LambdaMap::new(full(n, depth), r, k).unwrap();
        let rep_full = order_zero_report(&full_map, &[0], 1e-10, Exec::Sequential).unwrap();
        let rep_sector = summand_order_zero(n, depth, r, k, 1e-10, Exec::Sequential).unwrap();
        assert!(rep_full.is_order_zero && rep_sector.is_order_zero);
        let img = full_map.unit_image(0, 1, 2);
        assert!(img.norm() > 0.0);
    }

    #[test]
    fn calkin_examples() {
        let d = calkin_defect(2, 2, 8).unwrap();
        assert_eq!(d.exact_sup, Rational::zero());
        assert_eq!(d.paper_bound, rat(1, 2));
        let d = calkin_defect(1, 0, 8).unwrap();
        assert!(d.exact_sup <= rat(3, 4));
        assert!(calkin_defect(3, 0, 6).is_err());
    }

    #[test]
    fn fock_triple_small() {
        let rep = fock_triple_report(2, 2, min_depth(2), 1e-10, Exec::Sequential).unwrap();
        assert!((rep.phi_norm - 2.0).abs() <= 1e-9);
        // ψ_k(1) carries the κ diagonal, whose largest entry is l/(l+1).
        assert!((rep.psi_norm - 0.5).abs() <= 1e-12);
        assert!(rep.summands.iter().all(|s| s.is_order_zero));
    }
}
