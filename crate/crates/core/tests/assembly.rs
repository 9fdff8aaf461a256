mod common;

use common::*;
use nalgebra::SymmetricEigen;
use proptest::prelude::*;
use spdefem::assembly::{local_mass, local_stiffness, local_white_noise};
use spdefem::{build_fem, AffineMap};

fn close(a: [[f64; 3]; 3], b: [[f64; 3]; 3], tol: f64) -> bool {
    let scale = b.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| (x - y).abs() <= tol * scale)
}

#[test]
fn local_matrices_match_quadrature() {
    let mut r = rng(11);
    for _ in 0..50 {
        let c = random_triangle(&mut r);
        let map = AffineMap::from_corners(c[0], c[1], c[2]);
        assert!(close(local_mass(&map), quad_mass(c), 1e-12));
        assert!(close(local_stiffness(&map), quad_stiffness(c), 1e-12));
        let a = local_white_noise(&map);
        let integral = quad_integral(c);
        let area = triangle_area(c);
        for i in 0..3 {
            assert!((a[i] - area / 3.0).abs() <= 1e-12 * area);
            assert!((integral[i] - area / 3.0).abs() <= 1e-12 * area);
        }
    }
}

proptest! {
    #[test]
    fn local_stiffness_is_scale_and_translation_invariant(
        s in 0.01f64..100.0, dx in -50.0f64..50.0, dy in -50.0f64..50.0, seed in 0u64..1000,
    ) {
        let c = random_triangle(&mut rng(seed));
        let moved = c.map(|p| [s * p[0] + dx, s * p[1] + dy]);
        let a = local_stiffness(&AffineMap::from_corners(c[0], c[1], c[2]));
        let b = local_stiffness(&AffineMap::from_corners(moved[0], moved[1], moved[2]));
        prop_assert!(close(b, a, 1e-10));
        let ma = local_mass(&AffineMap::from_corners(c[0], c[1], c[2]));
        let mb = local_mass(&AffineMap::from_corners(moved[0], moved[1], moved[2]));
        let scaled = ma.map(|row| row.map(|v| v * s * s));
        prop_assert!(close(mb, scaled, 1e-10));
    }

    #[test]
    fn corner_order_permutes_local_matrices(seed in 0u64..1000) {
        let c = random_triangle(&mut rng(seed));
        let a = local_stiffness(&AffineMap::from_corners(c[0], c[1], c[2]));
        let b = local_stiffness(&AffineMap::from_corners(c[1], c[2], c[0]));
        let perm = [1, 2, 0];
        let permuted = std::array::from_fn(|i| std::array::from_fn(|j| a[perm[i]][perm[j]]));
        prop_assert!(close(b, permuted, 1e-12));
    }
}

#[test]
fn global_matrices_are_psd_and_pd() {
    for mesh in [unit_square(4), irregular_mesh()] {
        let fem = build_fem(&mesh);
        let d = SymmetricEigen::new(dense(&fem.stiffness)).eigenvalues;
        let scale = fem.stiffness.max_abs();
        assert!(d.min() >= -1e-12 * scale);
        // Exactly one zero mode on a connected mesh.
        assert_eq!(d.iter().filter(|&&v| v.abs() <= 1e-10 * scale).count(), 1);
        let j = SymmetricEigen::new(dense(&fem.mass)).eigenvalues;
        assert!(j.min() > 0.0);
    }
}

#[test]
fn sparsity_follows_mesh_edges() {
    let mesh = irregular_mesh();
    let fem = build_fem(&mesh);
    let adj = mesh.node_adjacency();
    for m in [&fem.mass, &fem.stiffness] {
        for (i, j, _) in m.iter() {
            assert!(i == j || adj[i].contains(&j), "({i},{j}) is not an edge");
        }
    }
    let edges: usize = adj.iter().map(Vec::len).sum::<usize>() / 2;
    assert_eq!(fem.mass.nnz(), mesh.node_count() + edges);
}

#[test]
fn stiffness_annihilates_constants_and_integrates_linears() {
    let mesh = irregular_mesh();
    let fem = build_fem(&mesh);
    // uᵀDu = ∫|∇u|² is exact for a linear u.
    let u: Vec<f64> = mesh.nodes().iter().map(|p| 2.0 * p[0] - 3.0 * p[1] + 0.5).collect();
    let du = fem.stiffness.matvec(&u).unwrap();
    let energy: f64 = u.iter().zip(&du).map(|(a, b)| a * b).sum();
    assert!((energy - 13.0 * mesh.total_area()).abs() < 1e-10);
    let ju = fem.mass.matvec(&vec![1.0; mesh.node_count()]).unwrap();
    for (a, b) in ju.iter().zip(&fem.a_tilde) {
        assert!((a - b).abs() < 1e-14);
    }
}
