//! Isogeometric analysis of nearly-incompressible linear elasticity on single
//! quadratic NURBS patches, with compatible-strain (CS) elements and two
//! continuous-assumed-strain variants (CAS1, CAS2) that suppress volumetric
//! locking.

pub mod assembly;
pub mod benchmarks;
pub mod error;
pub mod mechanics;
pub mod quadrature;
pub mod solver;
pub mod splines;

pub use assembly::{assemble, Constraint, Loads, Mesh, SparseSystem};
pub use error::{Error, Result};
pub use mechanics::{Material, Technology};
pub use quadrature::QuadratureRule;
pub use solver::{CsrMatrix, SolverError};
pub use splines::{Face, KnotVector, NurbsPatch, Side};
