//! Element and global assembly of the mass matrix `J`, the stiffness matrix
//! `D`, and the white-noise variance vector `ã`.
//!
//! No boundary terms are assembled anywhere. Dropping the boundary integral
//! of the weak form is exactly the zero-flux (Neumann) condition, so these
//! matrices already encode it.

use crate::linalg::{SparseSymMatrix, TripletAccumulator};
use crate::mesh::{AffineMap, Mesh};

/// 3×3 element contribution indexed by corner position `(p1, p2, p3)`.
pub type LocalMatrix = [[f64; 3]; 3];

/// Reference-triangle gradients of the three local hat functions
/// `1 − η₁ − η₂`, `η₁`, `η₂`, as row vectors.
pub const REF_GRADIENTS: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

/// `∫ φ̃ dη` over the reference triangle, the same for each local basis
/// function (`∫(1 − η₁ − η₂) = ∫η₁ = ∫η₂ = 1/6`).
pub const WHITE_NOISE_C: f64 = 1.0 / 6.0;

const MASS_DIAG: f64 = 1.0 / 12.0;
const MASS_OFF: f64 = 1.0 / 24.0;

/// `|det T|` times the reference mass matrix (1/12 diagonal, 1/24 off).
pub fn local_mass(map: &AffineMap) -> LocalMatrix {
    let s = map.det.abs();
    let mut m = [[s * MASS_OFF; 3]; 3];
    for (a, row) in m.iter_mut().enumerate() {
        row[a] = s * MASS_DIAG;
    }
    m
}

/// `|det T| · ½ · g_a · (TᵀT)⁻¹ · g_bᵀ` for each pair of local corners.
pub fn local_stiffness(map: &AffineMap) -> LocalMatrix {
    let s = 0.5 * map.det.abs();
    let g = &map.gram_inv;
    let mut m = [[0.0; 3]; 3];
    for a in 0..3 {
        let ga = REF_GRADIENTS[a];
        let gag = [ga[0] * g[0][0] + ga[1] * g[1][0], ga[0] * g[0][1] + ga[1] * g[1][1]];
        for b in a..3 {
            let gb = REF_GRADIENTS[b];
            let v = s * (gag[0] * gb[0] + gag[1] * gb[1]);
            m[a][b] = v;
            m[b][a] = v;
        }
    }
    m
}

/// Per-corner white-noise variance contribution, `|det T| · c` with
/// `c = 1/6`; the three entries sum to the triangle area.
pub fn local_white_noise(map: &AffineMap) -> [f64; 3] {
    [map.det.abs() * WHITE_NOISE_C; 3]
}

/// Sums `local(map_t)` over all triangles into a global symmetric matrix.
pub fn assemble_matrix(mesh: &Mesh, local: impl Fn(&AffineMap) -> LocalMatrix) -> SparseSymMatrix {
    let mut acc = TripletAccumulator::with_capacity(mesh.node_count(), 6 * mesh.triangle_count());
    for t in 0..mesh.triangle_count() {
        scatter(&mut acc, &mesh.triangles()[t], &local(&mesh.triangle_map(t)));
    }
    acc.finalize()
}

pub fn assemble_mass(mesh: &Mesh) -> SparseSymMatrix {
    assemble_matrix(mesh, local_mass)
}

pub fn assemble_stiffness(mesh: &Mesh) -> SparseSymMatrix {
    assemble_matrix(mesh, local_stiffness)
}

/// `ãᵢ = ∫ φᵢ dΩ` for every node.
pub fn assemble_white_noise(mesh: &Mesh) -> Vec<f64> {
    let mut a = vec![0.0; mesh.node_count()];
    for t in 0..mesh.triangle_count() {
        let local = local_white_noise(&mesh.triangle_map(t));
        for (&i, v) in mesh.triangles()[t].iter().zip(local) {
            a[i] += v;
        }
    }
    a
}

fn scatter(acc: &mut TripletAccumulator, nodes: &[usize; 3], local: &LocalMatrix) {
    for a in 0..3 {
        for b in a..3 {
            acc.add(nodes[a], nodes[b], local[a][b]);
        }
    }
}

/// The three assembled FEM quantities for one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct FemMatrices {
    /// `J`, `Jᵢⱼ = ∫ φᵢ φⱼ`.
    pub mass: SparseSymMatrix,
    /// `D`, `Dᵢⱼ = ∫ ∇φᵢ · ∇φⱼ`.
    pub stiffness: SparseSymMatrix,
    /// `ãᵢ = ∫ φᵢ`.
    pub a_tilde: Vec<f64>,
}

impl FemMatrices {
    pub fn dim(&self) -> usize {
        self.a_tilde.len()
    }

    /// `k·J + D`.
    pub fn operator(&self, k: f64) -> SparseSymMatrix {
        self.mass
            .add_scaled(k, &self.stiffness, 1.0)
            .expect("mass and stiffness share a dimension")
    }
}

/// Assembles `J`, `D`, and `ã` in a single pass over the triangles.
pub fn build_fem(mesh: &Mesh) -> FemMatrices {
    let n = mesh.node_count();
    let cap = 6 * mesh.triangle_count();
    let mut mass = TripletAccumulator::with_capacity(n, cap);
    let mut stiffness = TripletAccumulator::with_capacity(n, cap);
    let mut a_tilde = vec![0.0; n];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let map = mesh.triangle_map(t);
        scatter(&mut mass, tri, &local_mass(&map));
        scatter(&mut stiffness, tri, &local_stiffness(&map));
        for (&i, v) in tri.iter().zip(local_white_noise(&map)) {
            a_tilde[i] += v;
        }
    }
    FemMatrices { mass: mass.finalize(), stiffness: stiffness.finalize(), a_tilde }
}
