//! Independent oracles shared by the integration tests: a degree-5
//! triangle quadrature, P1 basis functions from a Vandermonde solve, and
//! dense linear algebra through nalgebra.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spdefem::{Mesh, Point, SparseSymMatrix};

/// 7-point degree-5 rule on a triangle: `(barycentric, weight)` with weights
/// summing to one (multiply by the area).
pub fn degree5_rule() -> Vec<([f64; 3], f64)> {
    let s15 = 15f64.sqrt();
    let a = (6.0 - s15) / 21.0;
    let b = (6.0 + s15) / 21.0;
    let wa = (155.0 - s15) / 1200.0;
    let wb = (155.0 + s15) / 1200.0;
    let mut rule = vec![([1.0 / 3.0; 3], 9.0 / 40.0)];
    for (p, w) in [(a, wa), (b, wb)] {
        let q = 1.0 - 2.0 * p;
        rule.push(([q, p, p], w));
        rule.push(([p, q, p], w));
        rule.push(([p, p, q], w));
    }
    rule
}

/// Coefficients `(c0, cx, cy)` of each corner's hat function
/// `c0 + cx·x + cy·y`, from inverting the Vandermonde matrix of the corners.
pub fn p1_coefficients(corners: [Point; 3]) -> [[f64; 3]; 3] {
    let v = Matrix3::from_fn(|r, c| match c {
        0 => 1.0,
        1 => corners[r][0],
        _ => corners[r][1],
    });
    let inv = v.try_inverse().expect("non-degenerate triangle");
    let mut out = [[0.0; 3]; 3];
    for a in 0..3 {
        let col: Vector3<f64> = inv.column(a).into();
        out[a] = [col[0], col[1], col[2]];
    }
    out
}

pub fn triangle_area(c: [Point; 3]) -> f64 {
    0.5 * ((c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[2][0] - c[0][0]) * (c[1][1] - c[0][1])).abs()
}

pub fn bary_to_point(c: [Point; 3], l: [f64; 3]) -> Point {
    [
        l[0] * c[0][0] + l[1] * c[1][0] + l[2] * c[2][0],
        l[0] * c[0][1] + l[1] * c[1][1] + l[2] * c[2][1],
    ]
}

/// `∫ φ_a φ_b` by quadrature.
pub fn quad_mass(c: [Point; 3]) -> [[f64; 3]; 3] {
    let coef = p1_coefficients(c);
    let area = triangle_area(c);
    let phi = |a: usize, p: Point| coef[a][0] + coef[a][1] * p[0] + coef[a][2] * p[1];
    let mut m = [[0.0; 3]; 3];
    for (l, w) in degree5_rule() {
        let p = bary_to_point(c, l);
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] += area * w * phi(a, p) * phi(b, p);
            }
        }
    }
    m
}

/// `∫ ∇φ_a·∇φ_b` by quadrature.
pub fn quad_stiffness(c: [Point; 3]) -> [[f64; 3]; 3] {
    let coef = p1_coefficients(c);
    let area = triangle_area(c);
    let mut m = [[0.0; 3]; 3];
    for (_, w) in degree5_rule() {
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] += area * w * (coef[a][1] * coef[b][1] + coef[a][2] * coef[b][2]);
            }
        }
    }
    m
}

/// `∫ φ_a` by quadrature.
pub fn quad_integral(c: [Point; 3]) -> [f64; 3] {
    let coef = p1_coefficients(c);
    let area = triangle_area(c);
    let mut out = [0.0; 3];
    for (l, w) in degree5_rule() {
        let p = bary_to_point(c, l);
        for a in 0..3 {
            out[a] += area * w * (coef[a][0] + coef[a][1] * p[0] + coef[a][2] * p[1]);
        }
    }
    out
}

/// Random triangle with vertices in `[-2, 2]²`, rejecting slivers.
pub fn random_triangle(rng: &mut impl Rng) -> [Point; 3] {
    loop {
        let mut p = || [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let c = [p(), p(), p()];
        if triangle_area(c) > 0.1 {
            return c;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dense(a: &SparseSymMatrix) -> DMatrix<f64> {
    let d = a.to_dense();
    DMatrix::from_fn(a.dim(), a.dim(), |r, c| d[r][c])
}

pub fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

pub fn unit_square(n: usize) -> Mesh {
    spdefem::generate_structured_mesh(n, n, (0.0, 1.0), (0.0, 1.0)).unwrap()
}

/// A small unstructured mesh: a perturbed 4×3 grid.
pub fn irregular_mesh() -> Mesh {
    let base = spdefem::generate_structured_mesh(4, 3, (0.0, 2.0), (0.0, 1.5)).unwrap();
    let mut r = rng(99);
    let nodes: Vec<Point> = base
        .nodes()
        .iter()
        .map(|p| {
            let interior = p[0] > 0.0 && p[0] < 2.0 && p[1] > 0.0 && p[1] < 1.5;
            if interior {
                [p[0] + r.random_range(-0.1..0.1), p[1] + r.random_range(-0.1..0.1)]
            } else {
                *p
            }
        })
        .collect();
    Mesh::new(nodes, base.triangles().to_vec()).unwrap()
}

/// Graph distance ≤ 2 in the mesh node adjacency.
pub fn within_two_hops(adj: &[Vec<usize>], i: usize, j: usize) -> bool {
    i == j || adj[i].contains(&j) || adj[i].iter().any(|&m| adj[m].contains(&j))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
