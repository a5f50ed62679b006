//! Effective zeros of systems of quadratic forms over the p-adic fields Q_p.
//!
//! The crate computes the classical upper and lower bounds for the number of
//! variables that force a common nontrivial zero, finds such zeros (and whole
//! subspaces of zeros) constructively by recursion on the number of forms,
//! builds anisotropic witness systems, and checks everything against a
//! brute-force search over residue rings `Z/p^k`.

pub mod bounds;
pub mod cli;
pub mod document;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod padic;
pub mod qform;
pub mod random;
pub mod solver;
pub mod witness;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use padic::{FieldContext, Padic, Valuation};
pub use qform::{FormDecomposition, FormSystem, QuadraticForm, Subspace};
pub use solver::{SolveCertificate, SubspaceCertificate};
