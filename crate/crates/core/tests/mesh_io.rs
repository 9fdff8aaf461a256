mod common;

use common::*;
use proptest::prelude::*;
use spdefem::io::{mesh_hash, read_field_csv, read_matrix_market, write_field_csv, write_matrix_market, Metadata};
use spdefem::mesh::quality_report;
use spdefem::{build_fem, generate_structured_mesh, Mesh};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn structured_meshes_round_trip(nx in 1usize..12, ny in 1usize..12, x0 in -5.0f64..5.0, w in 0.1f64..10.0) {
        let mesh = generate_structured_mesh(nx, ny, (x0, x0 + w), (0.0, w / 2.0)).unwrap();
        prop_assert_eq!(mesh.node_count(), (nx + 1) * (ny + 1));
        prop_assert_eq!(mesh.triangle_count(), 2 * nx * ny);
        prop_assert!((mesh.total_area() - w * w / 2.0).abs() <= 1e-12 * w * w);
        let back = Mesh::parse(&mesh.emit()).unwrap();
        prop_assert_eq!(&back, &mesh);
        prop_assert_eq!(mesh_hash(&back), mesh_hash(&mesh));
    }

    #[test]
    fn edges_are_shared_once_or_twice(nx in 1usize..10, ny in 1usize..10) {
        let mesh = generate_structured_mesh(nx, ny, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let counts = mesh.edge_counts();
        prop_assert!(counts.values().all(|&c| c == 1 || c == 2));
        prop_assert_eq!(mesh.boundary_edges().len(), 2 * (nx + ny));
    }
}

#[test]
fn perturbed_mesh_round_trips() {
    let mesh = irregular_mesh();
    assert_eq!(Mesh::parse(&mesh.emit()).unwrap(), mesh);
}

#[test]
fn matrices_and_fields_round_trip() {
    let mesh = irregular_mesh();
    let fem = build_fem(&mesh);
    for m in [&fem.mass, &fem.stiffness] {
        assert_eq!(&read_matrix_market(&write_matrix_market(m)).unwrap(), m);
    }
    let csv = write_field_csv(&mesh, &fem.a_tilde).unwrap();
    let back = read_field_csv(&csv).unwrap();
    assert_eq!(back.values, fem.a_tilde);
    assert_eq!(back.coords, mesh.nodes());
    let mut meta = Metadata::default();
    meta.insert("seed", 3);
    meta.insert("generator", "x");
    assert_eq!(Metadata::parse(&meta.to_text()).unwrap(), meta);
}

#[test]
fn quality_rules_on_a_grid() {
    let mesh = generate_structured_mesh(30, 30, (0.0, 3.0), (0.0, 3.0)).unwrap();
    let centre = quality_report(&mesh, 1.0, &[[1.5, 1.5]]);
    assert!(centre.passes());
    assert!((centre.min_boundary_distance - 1.5).abs() < 1e-12);
    let edge = quality_report(&mesh, 1.0, &[[0.2, 1.5]]);
    assert!(edge.passes_edge_rule && !edge.passes_boundary_rule);
    let coarse = quality_report(&mesh, 0.5, &[[1.5, 1.5]]);
    assert!(!coarse.passes_edge_rule);
}
