//! Finite-dimensional C*-algebras, completely positive maps, order-zero
//! structure and the algebra of approximation triples (F, ψ, φ).

pub mod algebra;
pub mod cpmap;
pub mod instances;
pub mod order_zero;
pub mod prune;
pub mod triple;

pub use algebra::{FdAlgebra, FdElement};
pub use cpmap::CpMap;
pub use order_zero::{
    is_order_zero, order_zero_decompose, order_zero_report, trace_functional, trace_pullback_defect,
    normalized_trace, weak_stability_check, BlockMap, OrderZeroDecomposition, OrderZeroReport, ResidualBreakdown,
    WeakStabilityReport,
};
pub use prune::{cut_down_psi, product_domination_check, prune_to_order_zero, CutDown, CutDownReport, PruneCertificate, PruneOutcome};
pub use triple::{
    direct_sum_triples, normalize_composition, tensor_triples, validate_triple, ApproxTriple, ColorReport,
    ValidationReport, DEFAULT_TENSOR_CAP,
};
