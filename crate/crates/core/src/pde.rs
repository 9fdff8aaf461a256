//! Deterministic solves of `k·u − ∇²u = f` with zero-flux boundaries, L2
//! projection onto the hat-function basis, and pointwise field evaluation.

use thiserror::Error;

use crate::assembly::FemMatrices;
use crate::linalg::{factorize, LinalgError, SparseSymMatrix};
use crate::mesh::{Mesh, Point};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdeError {
    #[error("right-hand side is not finite at ({}, {})", .0[0], .0[1])]
    NonFinite(Point),
    #[error("k must be positive, got {0}")]
    NonPositiveK(f64),
    #[error("point ({}, {}) is outside the mesh", .0[0], .0[1])]
    OutOfDomain(Point),
    #[error("field has {found} weights but the mesh has {expected} nodes")]
    FieldSize { expected: usize, found: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Hat-function weights, one per mesh node.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub weights: Vec<f64>,
}

impl Field {
    /// Wraps `weights`, checking they match the node count of `mesh`.
    pub fn new(mesh: &Mesh, weights: Vec<f64>) -> Result<Self, PdeError> {
        if weights.len() != mesh.node_count() {
            return Err(PdeError::FieldSize { expected: mesh.node_count(), found: weights.len() });
        }
        Ok(Self { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Samples `f` at every node (nodal interpolation).
    pub fn interpolate(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Self {
        Self { weights: mesh.nodes().iter().map(|p| f(p[0], p[1])).collect() }
    }
}

/// Edge-midpoint rule on the reference triangle: the local basis values at
/// each of the three points. Weights are `|det T|/6` each; exact for
/// quadratics.
const MIDPOINT_BARY: [[f64; 3]; 3] = [[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]];

/// Quadrature points in physical coordinates with their per-corner basis
/// values and weight, for triangle `t`.
fn midpoint_rule(mesh: &Mesh, t: usize) -> impl Iterator<Item = (Point, [f64; 3], f64)> {
    let [p1, p2, p3] = mesh.corners(t);
    let w = mesh.triangle_map(t).det.abs() / 6.0;
    MIDPOINT_BARY.into_iter().map(move |l| {
        let z = [
            l[0] * p1[0] + l[1] * p2[0] + l[2] * p3[0],
            l[0] * p1[1] + l[1] * p2[1] + l[2] * p3[1],
        ];
        (z, l, w)
    })
}

/// `bⱼ = ∫ f·φⱼ dΩ`, per triangle with the edge-midpoint rule.
pub fn load_vector(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Result<Vec<f64>, PdeError> {
    let mut b = vec![0.0; mesh.node_count()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for (z, phi, w) in midpoint_rule(mesh, t) {
            let v = f(z[0], z[1]);
            if !v.is_finite() {
                return Err(PdeError::NonFinite(z));
            }
            for (&i, p) in tri.iter().zip(phi) {
                b[i] += w * v * p;
            }
        }
    }
    Ok(b)
}

/// L2 projection: solves `J·m = b(f)`.
pub fn project(mesh: &Mesh, fem: &FemMatrices, f: impl Fn(f64, f64) -> f64) -> Result<Field, PdeError> {
    let b = load_vector(mesh, f)?;
    let m = factorize(&fem.mass)?.solve(&b)?;
    Ok(Field { weights: m })
}

/// Solves `(k·J + D)·u = b(f)`.
pub fn solve_pde(
    mesh: &Mesh,
    fem: &FemMatrices,
    k: f64,
    f: impl Fn(f64, f64) -> f64,
) -> Result<Field, PdeError> {
    let b = load_vector(mesh, f)?;
    solve_with_load(fem, k, &b)
}

/// Solves `(k·J + D)·u = b` for a precomputed load vector.
pub fn solve_with_load(fem: &FemMatrices, k: f64, b: &[f64]) -> Result<Field, PdeError> {
    if !(k > 0.0) {
        return Err(PdeError::NonPositiveK(k));
    }
    let u = factorize(&fem.operator(k))?.solve(b)?;
    Ok(Field { weights: u })
}

/// `‖A·x − b‖∞`.
pub fn residual_norm(a: &SparseSymMatrix, x: &[f64], b: &[f64]) -> Result<f64, PdeError> {
    let ax = a.matvec(x)?;
    Ok(ax.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max))
}

/// Value of the piecewise-linear field at `point`.
pub fn evaluate_field(mesh: &Mesh, field: &Field, point: Point) -> Result<f64, PdeError> {
    if field.len() != mesh.node_count() {
        return Err(PdeError::FieldSize { expected: mesh.node_count(), found: field.len() });
    }
    let (t, bary) = mesh.locate(point).ok_or(PdeError::OutOfDomain(point))?;
    let tri = mesh.triangles()[t];
    Ok((0..3).map(|a| bary[a] * field.weights[tri[a]]).sum())
}

/// `‖u_h − u‖₂` over the mesh using the edge-midpoint rule per triangle.
/// Slightly underestimates the true norm for non-polynomial `exact`.
pub fn l2_error(mesh: &Mesh, field: &Field, exact: impl Fn(f64, f64) -> f64) -> f64 {
    let mut sum = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for (z, phi, w) in midpoint_rule(mesh, t) {
            let uh: f64 = (0..3).map(|a| phi[a] * field.weights[tri[a]]).sum();
            let e = uh - exact(z[0], z[1]);
            sum += w * e * e;
        }
    }
    sum.sqrt()
}
