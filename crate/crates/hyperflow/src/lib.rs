//! Hyperhamiltonian dynamics on Euclidean R^4n.
//!
//! The crate covers quaternionic structures ([`structures`]), Hamiltonian
//! triples and frequency profiles ([`hamiltonian`]), closed-form and numerical
//! flows of quaternionic and Dirac oscillators ([`flows`]), conserved
//! quantities ([`invariants`]) and the linear symmetry algebra
//! so(2) + sp(n) of quaternionic oscillators ([`symmetry`]). The [`cli`]
//! module drives all of it from JSON scenario files.

pub mod cli;
pub mod error;
pub mod flows;
pub mod hamiltonian;
pub mod invariants;
pub mod linalg;
pub mod structures;
pub mod symmetry;

pub use error::{Error, Result};
pub use flows::{Method, Trajectory};
pub use hamiltonian::{FrequencyProfile, HamiltonianTriple, ScalarExpression};
pub use structures::{ComplexStructureTriple, Orientation, SquareMatrix};
