//! The eleven acceptance criteria at their stated tolerances. Each test writes
//! one PASS/FAIL line for its criterion to stderr (uncaptured). Criteria whose
//! literal statement is false at finite scale (1, 2, 5) also have an ignored
//! test asserting the literal claim; run them with `--include-ignored`.

use std::io::Write;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::Rng;

use nucdim::commdim::{
    build_commutative_triple, build_pou, contractify, function_matrix, greedy_color, interval_sets, oscillation_bound,
    stride_for_mesh, FinSpace,
};
use nucdim::cstar::instances::{
    diagonal_samples, diagonal_triple, random_order_zero, random_prune_instance, round_trip,
};
use nucdim::cstar::{
    direct_sum_triples, product_domination_check, prune_to_order_zero, tensor_triples, validate_triple, ApproxTriple,
    DEFAULT_TENSOR_CAP,
};
use nucdim::fock::ceil_half;
use nucdim::fock::words::words_up_to;
use nucdim::fock::{
    calkin_defect, composite_fock, composite_schur_gap, fock_triple_report, kappa_dense, kappa_schur_norm,
    sigma_profile,
};
use nucdim::numkit::random::ordered_pair;
use nucdim::numkit::rational::{self, rat};
use nucdim::numkit::{hermitian_eigenvalues, operator_norm, CMatrix};
use nucdim::rng::stream;
use nucdim::roe::{
    commutator_report, convergence, norm_bound_check, shipped_cover, BandMatrix, CoarseSpace, HFamily, SpaceKind,
};
use nucdim::Exec;

// One criterion at a time, so the wall-time limits measure the criterion alone.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn line(id: u32, name: &str, pass: bool, detail: &str, elapsed: Duration) {
    let _ = writeln!(
        std::io::stderr(),
        "criterion {id:>2} {} {name}: {detail} [{:.2} s]",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
}

// ---- 1. σ-profile exactness -------------------------------------------------

struct SigmaOutcome {
    diag_ok: Vec<(usize, bool)>,
    offdiag_ok: bool,
    elapsed: Duration,
}

fn sigma_outcome() -> SigmaOutcome {
    let t = Instant::now();
    let mut diag_ok = Vec::new();
    let mut offdiag_ok = true;
    for k in 2..=32 {
        let r = sigma_profile(k).unwrap().check_stable_claims(2 * k);
        // Window (k + ⌈k/2⌉, k + ⌈k/2⌉ + 2k].
        assert_eq!(r.range, (k + ceil_half(k) + 1, k + ceil_half(k) + 2 * k));
        diag_ok.push((k, r.diag_failures.is_empty()));
        offdiag_ok &= r.offdiag_failures.is_empty();
        if k % 2 == 1 {
            // The exact odd-k diagonal defect, 1/(l+1).
            assert_eq!(r.max_diag_defect, rat(1, (ceil_half(k) + 1) as i64));
        }
    }
    SigmaOutcome {
        diag_ok,
        offdiag_ok,
        elapsed: t.elapsed(),
    }
}

#[test]
fn c01_sigma_profile_exactness() {
    let _g = serial();
    let o = sigma_outcome();
    let failing: Vec<usize> = o.diag_ok.iter().filter(|(_, ok)| !ok).map(|(k, _)| *k).collect();
    let pass = failing.is_empty() && o.offdiag_ok && o.elapsed < Duration::from_secs(1);
    line(
        1,
        "σ-profile exactness, k = 2..32",
        pass,
        &format!("diagonal σ_ii = 1 fails for k = {failing:?}; off-diagonal bound holds: {}", o.offdiag_ok),
        o.elapsed,
    );
    assert!(o.offdiag_ok);
    assert!(o.diag_ok.iter().filter(|(k, _)| k % 2 == 0).all(|(_, ok)| *ok));
    assert!(o.elapsed < Duration::from_secs(1));
}

#[test]
#[ignore = "blocked: σ_ii = 1 is false for odd k (defect 1/(l+1)); see decisions ledger"]
fn c01_sigma_profile_exactness_literal() {
    let _g = serial();
    let o = sigma_outcome();
    assert!(o.offdiag_ok);
    for (k, ok) in o.diag_ok {
        assert!(ok, "σ_ii = 1 fails at k = {k}");
    }
}

// ---- 2. κ_k positivity and contraction --------------------------------------

struct KappaRow {
    k: usize,
    min_eig: f64,
    norm: f64,
    schur_norm: f64,
}

fn kappa_rows() -> (Vec<KappaRow>, Duration) {
    let t = Instant::now();
    let rows = (1..=64)
        .map(|k| {
            let m = kappa_dense(k).unwrap();
            KappaRow {
                k,
                min_eig: hermitian_eigenvalues(&m).unwrap().into_iter().fold(f64::INFINITY, f64::min),
                norm: operator_norm(&m).unwrap(),
                schur_norm: rational::to_f64(&kappa_schur_norm(k).unwrap()),
            }
        })
        .collect();
    (rows, t.elapsed())
}

#[test]
fn c02_kappa_positivity_and_contraction() {
    let _g = serial();
    let (rows, elapsed) = kappa_rows();
    let psd = rows.iter().all(|r| r.min_eig >= -1e-10);
    let over: Vec<usize> = rows.iter().filter(|r| r.norm > 1.0 + 1e-10).map(|r| r.k).collect();
    let worst = rows.iter().map(|r| r.norm).fold(0.0, f64::max);
    line(
        2,
        "κ_k PSD and ‖κ_k‖ ≤ 1 + 1e-10, k ≤ 64",
        psd && over.is_empty() && elapsed < Duration::from_secs(5),
        &format!(
            "min eigenvalue ≥ −1e-10: {psd}; operator norm > 1 for {} values of k (max {worst:.3}); \
             Schur-multiplier norm ≤ 1 for all k: {}",
            over.len(),
            rows.iter().all(|r| r.schur_norm <= 1.0)
        ),
        elapsed,
    );
    assert!(psd);
    assert!(rows.iter().all(|r| r.schur_norm <= 1.0));
    assert!(elapsed < Duration::from_secs(5));
}

#[test]
#[ignore = "blocked: ‖κ_k‖ > 1 for every k ≥ 3 (κ_k is PSD, its Schur norm is ≤ 1); see decisions ledger"]
fn c02_kappa_positivity_and_contraction_literal() {
    let _g = serial();
    for r in kappa_rows().0 {
        assert!(r.min_eig >= -1e-10, "k = {}", r.k);
        assert!(r.norm <= 1.0 + 1e-10, "‖κ_{}‖ = {}", r.k, r.norm);
    }
}

// ---- 3. Calkin defect vs bound ---------------------------------------------

#[test]
fn c03_calkin_defect_bound() {
    let _g = serial();
    let t = Instant::now();
    let ks = [8, 12, 16, 20];
    let mut within = true;
    let mut monotone = true;
    for mu in 0..=3 {
        for nu in 0..=3 {
            let row: Vec<_> = ks.iter().map(|&k| calkin_defect(mu, nu, k).unwrap()).collect();
            for d in &row {
                // Independent bound: 2(2 + ||μ| − |ν||)/k.
                assert_eq!(d.paper_bound, rat(2 * (2 + mu.abs_diff(nu) as i64), d.k as i64));
                within &= d.exact_sup <= d.paper_bound;
            }
            monotone &= row.windows(2).all(|w| w[1].exact_sup <= w[0].exact_sup);
        }
    }
    let elapsed = t.elapsed();
    let pass = within && monotone && elapsed < Duration::from_secs(10);
    line(
        3,
        "Calkin defect ≤ 2(2+||μ|−|ν||)/k, n = 2, |μ|,|ν| ≤ 3, k ∈ {8,12,16,20}",
        pass,
        &format!("within bound: {within}; nonincreasing in k: {monotone}"),
        elapsed,
    );
    assert!(pass);
}

// ---- 4. Schur-composite oracle ---------------------------------------------

#[test]
fn c04_schur_composite_oracle() {
    let _g = serial();
    let t = Instant::now();
    let words: Vec<_> = words_up_to(2, 2).collect();
    let mut worst = 0.0_f64;
    for k in [6, 8] {
        let fock = composite_fock(2, k, 1 << 15).unwrap();
        assert_eq!(fock.depth(), 6 * k);
        for mu in &words {
            for nu in &words {
                worst = worst.max(composite_schur_gap(&fock, mu, nu, k).unwrap());
            }
        }
    }
    let elapsed = t.elapsed();
    let pass = worst <= 1e-12 && elapsed < Duration::from_secs(60);
    line(
        4,
        "φ_kψ_k(T_μT_ν*) = σ * T_μT_ν* entrywise, L = 6k, k ∈ {6,8}",
        pass,
        &format!("max entry gap {worst:e} (tol 1e-12)"),
        elapsed,
    );
    assert!(pass);
}

// ---- 5. Fock triple structure ----------------------------------------------

#[test]
fn c05_fock_triple_structure() {
    let _g = serial();
    let t = Instant::now();
    let r = fock_triple_report(2, 4, 20, 1e-10, Exec::default()).unwrap();
    let elapsed = t.elapsed();
    let psi_ok = (r.psi_norm - 1.0).abs() <= 1e-9;
    let phi_ok = (r.phi_norm - 2.0).abs() <= 1e-9;
    let oz_ok = r.summands.iter().all(|s| s.is_order_zero);
    line(
        5,
        "‖ψ_k‖ = 1, ‖φ_k‖ = 2, summands order zero (n = 2, k = 4, L = 20)",
        psi_ok && phi_ok && oz_ok,
        &format!("‖ψ_k‖ = {} (expected 1 ± 1e-9); ‖φ_k‖ = {}; summands order zero: {oz_ok}", r.psi_norm, r.phi_norm),
        elapsed,
    );
    assert!(phi_ok);
    assert!(oz_ok);
    // ‖ψ_k‖ = ‖ψ_k(1)‖ = max κ_ii = l/(l+1).
    assert!((r.psi_norm - 2.0 / 3.0).abs() <= 1e-12);
}

#[test]
#[ignore = "blocked: ψ_k is c.p. with ‖ψ_k(1)‖ = l/(l+1) = 2/3 at k = 4; see decisions ledger"]
fn c05_fock_triple_structure_literal() {
    let _g = serial();
    let r = fock_triple_report(2, 4, 20, 1e-10, Exec::default()).unwrap();
    assert!((r.psi_norm - 1.0).abs() <= 1e-9, "‖ψ_k‖ = {}", r.psi_norm);
    assert!((r.phi_norm - 2.0).abs() <= 1e-9);
    assert!(r.summands.iter().all(|s| s.is_order_zero));
}

// ---- 6. Order-zero round trip ----------------------------------------------

#[test]
fn c06_order_zero_round_trip() {
    let _g = serial();
    let t = Instant::now();
    let reps = Exec::default().map_range(100, |i| {
        let inst = random_order_zero(64, &mut stream(6, i as u64)).unwrap();
        round_trip(&inst).unwrap()
    });
    let elapsed = t.elapsed();
    assert!(reps.iter().all(|r| r.dim <= 64));
    let residual = reps.iter().map(|r| r.residual).fold(0.0, f64::max);
    let trace = reps.iter().map(|r| r.trace_defect).fold(0.0, f64::max);
    let pass = residual <= 1e-9 && trace <= 1e-8;
    line(
        6,
        "order-zero round trip, 100 instances, dim ≤ 64",
        pass,
        &format!("max residual {residual:e} (tol 1e-9); max trace pullback defect {trace:e} (tol 1e-8)"),
        elapsed,
    );
    assert!(pass);
}

// ---- 7. Pruning guarantees -------------------------------------------------

#[test]
fn c07_pruning_guarantees() {
    let _g = serial();
    let t = Instant::now();
    let mut violations = 0;
    let mut dropped = 0;
    for (e, eps) in [1e-6_f64, 1e-8].into_iter().enumerate() {
        let outs = Exec::default().map_range(100, |i| {
            let mut rng = stream(7, (e * 100 + i) as u64);
            let n = 1 + i % 2;
            let inst = random_prune_instance(n, eps, &mut rng).unwrap();
            let o = prune_to_order_zero(&inst.triple, &inst.testset, eps, Exec::Sequential).unwrap();
            (n, o.certificate, o.dropped_blocks.len())
        });
        for (n, c, d) in outs {
            dropped += d;
            // Bounds recomputed here: (n+1)ε^{1/8} and ε^{1/16}.
            let mass_ok = c.dropped_mass <= (n as f64 + 1.0) * eps.powf(0.125);
            let err_ok = c.post_error < eps.powf(0.0625);
            let pair_ok = c.max_pair_product < eps.powf(0.0625);
            if !(mass_ok && err_ok && pair_ok && c.holds()) {
                violations += 1;
            }
        }
    }
    let elapsed = t.elapsed();
    line(
        7,
        "pruning certificates, 100 instances per ε ∈ {1e-6, 1e-8}, n ≤ 2",
        violations == 0,
        &format!("{violations} violations; {dropped} blocks dropped in total"),
        elapsed,
    );
    assert_eq!(violations, 0);
    assert!(dropped > 0);
}

// ---- 8. Commutative dimension witness --------------------------------------

#[test]
fn c08_commutative_witness() {
    let _g = serial();
    let t = Instant::now();
    let n = 128;
    let eps = 0.05;
    let space = FinSpace::unit_interval(n).unwrap();
    let f: Vec<f64> = (0..n).map(|i| (i as f64 / (n - 1) as f64).sin()).collect();
    let fm = function_matrix(&f);
    let mut osc_ok = true;
    let mut contractive = true;
    let mut colors_ok = true;
    let mut last_error = f64::NAN;
    for mesh in [0.125, 0.0625, 0.03125] {
        let cover = greedy_color(&space, interval_sets(n, stride_for_mesh(n, mesh).unwrap()).unwrap()).unwrap();
        let pou = build_pou(&cover, &space).unwrap();
        let tr = build_commutative_triple(&space, &cover, &pou).unwrap();
        colors_ok &= tr.colors() == 2;
        let err = operator_norm(&tr.round_trip(&fm).unwrap().try_sub(&fm).unwrap()).unwrap();
        osc_ok &= err <= oscillation_bound(&pou, &f) + 1e-12;
        let c = contractify(&tr, &vec![1.0; n], eps).unwrap();
        contractive &= c.unit_image_norm <= 1.0 + 1e-10;
        last_error = operator_norm(&c.triple.round_trip(&fm).unwrap().try_sub(&fm).unwrap()).unwrap();
    }
    let elapsed = t.elapsed();
    let pass = osc_ok && contractive && colors_ok && last_error <= eps;
    line(
        8,
        "[0,1] with 128 points, meshes 1/8, 1/16, 1/32",
        pass,
        &format!(
            "2 colors: {colors_ok}; error(sin) ≤ oscillation bound: {osc_ok}; ‖φ̂(1)‖ ≤ 1 + 1e-10: {contractive}; \
             contractified error at mesh 1/32 {last_error:.4} (eps 0.05)"
        ),
        elapsed,
    );
    assert!(pass);
}

// ---- 9. Roe convergence ----------------------------------------------------

#[test]
fn c09_roe_convergence() {
    let _g = serial();
    let t = Instant::now();
    let space = Arc::new(CoarseSpace::z_interval(200).unwrap());
    let a = BandMatrix::shift(space);
    let rep = convergence(&a, &[2, 4, 8, 16, 32], Exec::default()).unwrap();
    let elapsed = t.elapsed();
    let unital = rep.max_unital_defect() <= 1e-12;
    let decreasing = rep.rows.windows(2).all(|w| w[1].defect < w[0].defect);
    // Independent bound for the shift: n + 1 = 2 families, w = 1, b = 3, ‖a‖ = 1.
    let bounds = rep.rows.iter().zip(&rep.commutator_total).all(|(row, total)| {
        assert!((row.paper_bound - 6.0 / row.r as f64).abs() <= 1e-12);
        *total <= row.paper_bound + 1e-9
    });
    let residual = rep.max_residual() == 0.0;
    let pass = unital && decreasing && bounds && residual && elapsed < Duration::from_secs(30);
    let defects: Vec<String> = rep.rows.iter().map(|r| format!("{:.4}", r.defect)).collect();
    line(
        9,
        "Z-interval of 200 points, shift, r ∈ {2,4,8,16,32}",
        pass,
        &format!(
            "unital: {unital}; defects [{}] strictly decreasing: {decreasing}; commutator bound: {bounds}; \
             ψ_r residual 0: {residual}",
            defects.join(", ")
        ),
        elapsed,
    );
    assert!(pass);
}

// ---- 10. Lemma bound and product-domination suites -------------------------

fn band_instance(i: usize) -> (f64, f64) {
    let mut rng = stream(10, i as u64);
    let space = if rng.random_bool(0.5) {
        CoarseSpace::z_interval(rng.random_range(10..=60)).unwrap()
    } else {
        CoarseSpace::grid(2, rng.random_range(3..=9)).unwrap()
    };
    let space = Arc::new(space);
    let a = BandMatrix::random(space.clone(), rng.random_range(0..=3), rng.random_range(0.1..=2.0), &mut rng).unwrap();
    let nb = norm_bound_check(&a).unwrap();
    // Test-side bound: b_w · max |entry| from the stored entries.
    let max_entry = a.matrix().iter().map(|(_, _, v)| v.norm()).fold(0.0, f64::max);
    let own_bound = space.ball_growth(a.width()) as f64 * max_entry;
    let norm_excess = (nb.norm - own_bound).max(nb.norm - nb.bound);
    let r = rng.random_range(1..=2);
    let comm_excess = match space.kind() {
        SpaceKind::Grid { side, .. } if side < 6 * r => 0.0,
        _ => {
            let cover = shipped_cover(&space, r).unwrap();
            let c = commutator_report(&a, &HFamily::new(&space, &cover, r).unwrap()).unwrap();
            c.total - c.paper_bound
        }
    };
    (norm_excess, comm_excess)
}

#[test]
fn c10_lemma_bound_and_domination_suites() {
    let _g = serial();
    let t = Instant::now();
    let band = Exec::default().map_range(1000, band_instance);
    let norm_viol = band.iter().filter(|b| b.0 > 1e-9).count();
    let comm_viol = band.iter().filter(|b| b.1 > 1e-9).count();
    let dom = Exec::default().map_range(1000, |i| {
        let mut rng = stream(11, i as u64);
        let (a, b) = ordered_pair(6, &mut rng).unwrap();
        let (a2, b2) = ordered_pair(6, &mut rng).unwrap();
        let r = product_domination_check(&a, &a2, &b, &b2).unwrap();
        // Recomputed here: ‖aa′‖² against ‖bb′‖.
        let lhs = operator_norm(&a.try_matmul(&a2).unwrap()).unwrap().powi(2);
        let rhs = operator_norm(&b.try_matmul(&b2).unwrap()).unwrap();
        (lhs - rhs).max(r.lhs - r.rhs)
    });
    let dom_viol = dom.iter().filter(|&&x| x > 1e-9).count();
    let elapsed = t.elapsed();
    let pass = norm_viol == 0 && comm_viol == 0 && dom_viol == 0;
    line(
        10,
        "1000 band matrices (‖a‖ ≤ b_w·M, commutator bound) and 1000 domination instances",
        pass,
        &format!("violations beyond 1e-9: norm {norm_viol}, commutator {comm_viol}, domination {dom_viol}"),
        elapsed,
    );
    assert!(pass);
}

// ---- 11. Permanence --------------------------------------------------------

#[test]
fn c11_permanence() {
    let _g = serial();
    let t = Instant::now();
    let space = FinSpace::unit_interval(8).unwrap();
    let cover = greedy_color(&space, interval_sets(8, stride_for_mesh(8, 0.5).unwrap()).unwrap()).unwrap();
    let t1 = build_commutative_triple(&space, &cover, &build_pou(&cover, &space).unwrap()).unwrap();
    let t2 = diagonal_triple(3).unwrap();
    let mut rng = stream(12, 0);
    let s1 = diagonal_samples(8, 4, &mut rng);
    let s2 = diagonal_samples(3, 4, &mut rng);
    let v1 = validate_triple(&t1, &s1, 1e-9, Exec::default()).unwrap();
    let v2 = validate_triple(&t2, &s2, 1e-9, Exec::default()).unwrap();
    assert!(v1.pass && v2.pass && t1.colors() == 2 && t2.colors() == 2);
    let tt = tensor_triples(&t1, &t2, DEFAULT_TENSOR_CAP).unwrap();
    let st: Vec<CMatrix> = s1.iter().flat_map(|a| s2.iter().map(move |b| a.kron(b))).collect();
    let vt = validate_triple(&tt, &st, 1e-9, Exec::default()).unwrap();
    let per_color_ok = vt.per_color.len() == 4 && vt.per_color.iter().all(|c| c.order_zero_residual <= 1e-9);
    let one = ApproxTriple::identity(2);
    let sums_ok = [(&t2, 2), (&one, 2)].iter().all(|(other, expect)| {
        let ds = direct_sum_triples(&t1, other).unwrap();
        let samples: Vec<CMatrix> = s1.iter().map(|a| a.direct_sum(&CMatrix::identity(other.ambient_dim()))).collect();
        let v = validate_triple(&ds, &samples, 1e-9, Exec::default()).unwrap();
        ds.colors() == *expect && ds.colors() == t1.colors().max(other.colors()) && v.pass
    });
    let elapsed = t.elapsed();
    let pass = tt.colors() == 4 && vt.pass && per_color_ok && sums_ok;
    line(
        11,
        "tensor of two 2-color triples is a validated 4-color triple; direct sums keep max colors",
        pass,
        &format!(
            "tensor colors {}; max per-color residual {:e} (tol 1e-9); direct sums: {sums_ok}",
            tt.colors(),
            vt.max_order_zero_residual()
        ),
        elapsed,
    );
    assert!(pass);
}

#[test]
fn blocked_criteria_have_exact_witnesses() {
    // The κ_4 Rayleigh quotient at the all-ones vector is 5/3 > 1.
    let k = 4;
    let kap = nucdim::fock::kappa_matrix(k).unwrap();
    let total = kap.iter().flatten().fold(rational::Rational::zero(), |acc, x| acc + x);
    assert_eq!(total / rational::int(k as i64), rat(5, 3));
    // σ_{i,i} at k = 5 takes the value 3/4 in the stable zone.
    let p = sigma_profile(5).unwrap();
    let s = p.stable_start();
    assert!((s..s + 5).any(|i| p.sigma(i, i) == rat(3, 4)));
}
