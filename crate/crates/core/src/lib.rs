//! Quasifree states of self-dual CCR algebras at finite dimension.
//!
//! The crate models a phase space `(K, γ, Γ)` by matrices, builds quasifree
//! forms and their purifications, represents bilinear Hamiltonians and
//! Bogoliubov maps on a truncated bosonic Fock space, classifies families of
//! state pairs by the Hilbert–Schmidt criterion, and computes quasifree
//! modular data. Every closed formula comes with a brute-force counterpart so
//! the two can be compared.

pub mod classifier;
pub mod cli;
pub mod error;
pub mod fock;
pub mod implementers;
pub mod io;
pub mod linalg;
pub mod modular;
pub mod phase_space;
pub mod quasifree;
pub mod sp_algebra;
pub mod validation;

pub use error::{Error, Result};
pub use fock::{FockOperator, TruncatedFock};
pub use linalg::{CMat, CVec, C64};
pub use phase_space::{BasisSet, KOperator, PhaseSpace, Presentation};
pub use quasifree::{DoubledSpace, FormKind, QuasifreeForm};
pub use sp_algebra::{Hamiltonian, RankDecomposition};
pub use validation::ValidationReport;
