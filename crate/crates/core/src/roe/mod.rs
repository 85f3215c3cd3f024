//! Uniform Roe algebras at finite scale: bounded-geometry spaces, band
//! matrices, discrete covers from asymptotic-dimension witnesses, the h^(i)
//! partition and the approximations Ψ_r / Φ_r.

pub mod approx;
pub mod cover;
pub mod hfamily;
pub mod space;

pub use approx::{
    convergence, phi_psi_defect, ConvergenceReport, ConvergenceRow, FamilyBlocks, PhiPsiReport, PsiOutput, RoeApprox,
};
pub use cover::{cover_z, cover_zd, shipped_cover, DiscreteCover};
pub use hfamily::{commutator_report, diag_commutator, CommutatorReport, HFamily};
pub use space::{norm_bound_check, BandMatrix, CoarseSpace, NormBound, RoeSpaceSpec, SpaceKind};
