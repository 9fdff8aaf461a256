//! Linear finite elements on 2D triangle meshes and the sparse precision
//! matrices of Gaussian Markov random fields that approximate Matérn fields.
//!
//! The pipeline runs mesh → [`assembly::build_fem`] → either a deterministic
//! solve of `(k·J + D)·u = f` ([`pde::solve_pde`]) or a GMRF with precision
//! `Q = (k·J + D)·diag(1/ã)·(k·J + D)` ([`gmrf::PrecisionModel`]).

pub mod assembly;
pub mod bessel;
pub mod cli;
pub mod gmrf;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod pde;
pub mod rng;

pub use assembly::{build_fem, FemMatrices};
pub use gmrf::{MaternSpec, PrecisionModel};
pub use linalg::{factorize, LinalgError, SparseSymMatrix, SpdFactorization, TripletAccumulator};
pub use mesh::{generate_structured_mesh, AffineMap, Mesh, MeshError, Point, QualityReport};
pub use pde::{Field, PdeError};
