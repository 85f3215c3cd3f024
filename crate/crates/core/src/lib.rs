//! Finite-scale laboratory for nuclear-dimension approximation machinery:
//! order-zero maps and approximation triples, commutative partition-of-unity
//! approximations, Cuntz–Toeplitz Fock-space Schur multipliers, and Roe-algebra
//! approximations from asymptotic-dimension covers.

pub mod commdim;
pub mod cstar;
pub mod error;
pub mod exec;
pub mod fock;
pub mod numkit;
pub mod roe;
pub mod rng;

pub use error::{Error, Result};
pub use exec::Exec;
