//! Reconstruction of a perfectly conducting inclusion inside a bounded 2D
//! domain from one Cauchy pair of boundary measurements.
//!
//! The crate provides an unstructured-mesh P1 finite element kernel on the
//! annular region between the outer boundary and the inclusion, the state /
//! adjoint / descent-field solvers, a Sobolev-gradient shape descent loop,
//! and an ADMM outer driver with a closed-form projection update and a dual
//! ascent multiplier step. A classical shape-optimization baseline (plain
//! least-squares descent) runs through the same machinery.

pub mod admm;
pub mod cli;
pub mod fem;
pub mod field;
pub mod geometry;
pub mod mesh;
pub mod metrics;
pub mod problems;
pub mod shape;

pub use field::{ScalarField, VectorField};
pub use geometry::{BoundaryPolyline, GeometryConstraints, Point2};
pub use mesh::Mesh;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("triangulation error: {0}")]
    Triangulation(String),

    #[error("mesh invariant violated: {0}")]
    MeshInvariant(String),

    /// A deformation produced a triangle with non-positive signed area.
    #[error("inverted element: triangle {triangle} has signed area {area:.3e} after deformation")]
    InvertedElement { triangle: usize, area: f64 },

    /// A deformation moved the inclusion too close to the outer boundary.
    #[error("clearance violation: inner vertex {vertex} is {distance:.3e} from the outer boundary (delta = {delta:.3e})")]
    Clearance {
        vertex: usize,
        distance: f64,
        delta: f64,
    },

    #[error("field/mesh mismatch: {0}")]
    FieldMismatch(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("linear solver failed: {0}")]
    SolverFailure(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("boundary condition error: {0}")]
    BoundaryCondition(String),

    /// Backtracking exhausted its budget without an acceptable step.
    #[error("line search exhausted after {tries} tries")]
    LineSearchExhausted { tries: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
