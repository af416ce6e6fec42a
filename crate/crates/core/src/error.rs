use thiserror::Error;

use crate::solver::SolverError;

/// Errors produced by the geometry, assembly and benchmark layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter {value} lies outside the knot range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),

    #[error("invalid patch: {0}")]
    InvalidPatch(String),

    #[error("singular geometry map in element {element} at parameter {xi:?} (det J = {det_jacobian:e})")]
    SingularJacobian {
        element: usize,
        xi: [f64; 3],
        det_jacobian: f64,
    },

    #[error("knot insertion at {value} refused: {reason}")]
    KnotInsertion { value: f64, reason: &'static str },

    #[error("unsupported number of Gauss points per direction: {0} (expected 2 or 3)")]
    UnsupportedQuadrature(usize),

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("strain input does not match element technology {0}")]
    TechnologyMismatch(crate::mechanics::Technology),

    #[error("expected {expected} corner values, got {got}")]
    CornerCount { expected: usize, got: usize },

    #[error("face {face} is not a boundary face of a {dim}-dimensional patch")]
    InvalidFace { face: crate::splines::Face, dim: usize },

    #[error("no Dirichlet constraints: the pure Neumann problem is singular")]
    Unconstrained,

    #[error("point at radius {radius} lies inside the hole of radius {hole_radius}")]
    InsideHole { radius: f64, hole_radius: f64 },

    #[error("no exact solution is available for {0}")]
    NoExactSolution(String),

    #[error(transparent)]
    Solver(#[from] SolverError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
