//! Cuntz–Toeplitz machinery on truncated Fock spaces: creation operators,
//! κ_k Schur multipliers and their σ-profiles, Λ_k, the maps ψ_k/φ_k and the
//! exact Calkin-norm defect of φ_kψ_k on T_μT_ν*.

pub mod lambda;
pub mod ops;
pub mod schur;
pub mod words;

pub use lambda::{
    calkin_defect, calkin_defect_with, composite_fock, composite_schur_gap, fock_triple_report, lambda_k, min_depth,
    phi_k, psi_k, safe_levels, summand_order_zero, windows, CalkinDefect, CalkinRow, FockTripleReport, LambdaMap,
    PsiPair,
};
pub use ops::{creation, matrix_unit, word_op, LevelOperator};
pub use schur::{
    a_entry, b_entry, ceil_half, kappa_schur_norm, d_k, d_k_congruence_holds, kappa_dense, kappa_entry, kappa_matrix, sigma_entry,
    sigma_profile, SchurProfile, SigmaClaimReport, SigmaEntry,
};
pub use words::{complete_copies, full_size, Sector, TruncatedFock, Word, MAX_BASIS};
