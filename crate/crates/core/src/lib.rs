//! Numerical laboratory for stationary-process machinery on finite windows:
//! shift-group cocycles built from inner functions, Wold decompositions of the
//! associated isometry semigroups, a graded cochain calculus with cup product,
//! a fermionic lattice process, and markovian perturbations of filtered
//! operator algebras.

pub mod cocycle;
pub mod cohomology;
pub mod error;
pub mod fermion;
pub mod inner;
pub mod kflow;
pub mod lattice;
pub mod linalg;
pub mod measure;
pub mod report;
pub mod wold;

pub use error::{LabError, Result};
