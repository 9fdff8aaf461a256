//! Triangle meshes, the affine map onto the reference triangle, and mesh
//! quality checks against a target correlation range.
//!
//! A [`Mesh`] is immutable once built. Construction goes through
//! [`Mesh::new`], which validates indices, rejects degenerate triangles and
//! coincident nodes, and flips clockwise triangles so that every stored
//! triangle has `det T > 0`.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

/// A point or vector in the plane.
pub type Point = [f64; 2];

/// Relative tolerance for rejecting sliver triangles, scaled by the squared
/// longest edge of the triangle.
pub const DEGENERACY_TOL: f64 = 1e-14;

/// Relative tolerance for coincident nodes, scaled by the bounding-box
/// diagonal.
pub const COINCIDENCE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("triangle {triangle} references node index {index}, but the mesh has {nodes} nodes")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        nodes: usize,
    },
    #[error("triangle {triangle} is degenerate (det T = {det:e})")]
    Degenerate { triangle: usize, det: f64 },
    #[error("nodes {first} and {second} coincide")]
    DuplicateNode { first: usize, second: usize },
    #[error("node {0} is not a corner of any triangle")]
    OrphanNode(usize),
    #[error("node {node} has a non-finite coordinate")]
    NonFinite { node: usize },
    #[error("mesh has no triangles")]
    Empty,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// A conforming triangulation: node coordinates plus zero-based corner
/// index triples, all oriented counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
}

impl Mesh {
    /// Validates and orientation-normalizes a triangulation.
    pub fn new(nodes: Vec<Point>, mut triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        for (i, p) in nodes.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(MeshError::NonFinite { node: i });
            }
        }
        let mut used = vec![false; nodes.len()];
        for (t, tri) in triangles.iter_mut().enumerate() {
            for &i in tri.iter() {
                if i >= nodes.len() {
                    return Err(MeshError::IndexOutOfRange {
                        triangle: t,
                        index: i,
                        nodes: nodes.len(),
                    });
                }
                used[i] = true;
            }
            let [a, b, c] = tri.map(|i| nodes[i]);
            let det = cross(sub(b, a), sub(c, a));
            let longest = [dist2(a, b), dist2(b, c), dist2(c, a)]
                .into_iter()
                .fold(0.0, f64::max);
            if !(det.abs() > DEGENERACY_TOL * longest) {
                return Err(MeshError::Degenerate { triangle: t, det });
            }
            if det < 0.0 {
                tri.swap(1, 2);
            }
        }
        if let Some(i) = used.iter().position(|&u| !u) {
            return Err(MeshError::OrphanNode(i));
        }
        check_coincident(&nodes)?;
        Ok(Self { nodes, triangles })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Corner coordinates of triangle `t` in stored order.
    pub fn corners(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|i| self.nodes[i])
    }

    /// The affine map sending the reference triangle onto triangle `t`.
    pub fn triangle_map(&self, t: usize) -> AffineMap {
        let [p1, p2, p3] = self.corners(t);
        AffineMap::from_corners(p1, p2, p3)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangle_count())
            .map(|t| self.triangle_map(t).area())
            .sum()
    }

    /// Longest edge over all triangles.
    pub fn max_edge(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
            .map(|(i, j)| dist2(self.nodes[i], self.nodes[j]).sqrt())
            .fold(0.0, f64::max)
    }

    /// Number of triangles sharing each undirected edge, keyed by
    /// `(min, max)` node index.
    pub fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::new();
        for &[a, b, c] in &self.triangles {
            for (i, j) in [(a, b), (b, c), (c, a)] {
                *counts.entry((i.min(j), i.max(j))).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Edges belonging to exactly one triangle, sorted.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<_> = self
            .edge_counts()
            .into_iter()
            .filter(|&(_, n)| n == 1)
            .map(|(e, _)| e)
            .collect();
        edges.sort_unstable();
        edges
    }

    /// Euclidean distance from `p` to the nearest boundary edge.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.boundary_edges()
            .iter()
            .map(|&(i, j)| segment_distance(p, self.nodes[i], self.nodes[j]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Sorted neighbour lists: `j` is adjacent to `i` when they share a
    /// triangle.
    pub fn node_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for &[a, b, c] in &self.triangles {
            for (i, j) in [(a, b), (b, c), (c, a)] {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Finds the first triangle (in index order) containing `p`, with its
    /// barycentric coordinates. Points within `-1e-12` of an edge count as
    /// inside.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        (0..self.triangle_count()).find_map(|t| {
            let bary = self.triangle_map(t).barycentric(p);
            bary.iter().all(|&l| l >= -1e-12).then_some((t, bary))
        })
    }

    /// Index of the node closest to `p`; ties go to the lowest index.
    pub fn nearest_node(&self, p: Point) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, &q) in self.nodes.iter().enumerate() {
            let d = dist2(p, q);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    /// Parses the plain-text mesh format.
    pub fn parse(text: &str) -> Result<Self, MeshError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let n_nodes = parse_header(lines.next(), "nodes")?;
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            let (line, l) = lines.next().ok_or(MeshError::Parse {
                line: 0,
                msg: format!("expected {n_nodes} node lines, file ended early"),
            })?;
            let [x, y] = parse_fields::<f64, 2>(line, l)?;
            nodes.push([x, y]);
        }

        let n_tri = parse_header(lines.next(), "triangles")?;
        let mut triangles = Vec::with_capacity(n_tri);
        for _ in 0..n_tri {
            let (line, l) = lines.next().ok_or(MeshError::Parse {
                line: 0,
                msg: format!("expected {n_tri} triangle lines, file ended early"),
            })?;
            triangles.push(parse_fields::<usize, 3>(line, l)?);
        }
        if let Some((line, l)) = lines.next() {
            return Err(MeshError::Parse {
                line,
                msg: format!("unexpected trailing content `{l}`"),
            });
        }
        Mesh::new(nodes, triangles)
    }

    /// Serializes to the text format with 17 significant digits per
    /// coordinate, which round-trips every `f64` exactly.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        writeln!(out, "nodes {}", self.nodes.len()).unwrap();
        for p in &self.nodes {
            writeln!(out, "{:.16e} {:.16e}", p[0], p[1]).unwrap();
        }
        writeln!(out, "triangles {}", self.triangles.len()).unwrap();
        for t in &self.triangles {
            writeln!(out, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        out
    }
}

/// Parses mesh text; see [`Mesh::parse`].
pub fn load_mesh(text: &str) -> Result<Mesh, MeshError> {
    Mesh::parse(text)
}

/// Serializes a mesh; see [`Mesh::emit`].
pub fn emit_mesh(mesh: &Mesh) -> String {
    mesh.emit()
}

/// Regular `nx × ny` grid over a rectangle, each cell split along its
/// south-west to north-east diagonal. Node `(i, j)` has index
/// `j * (nx + 1) + i`.
pub fn generate_structured_mesh(
    nx: usize,
    ny: usize,
    x_range: (f64, f64),
    y_range: (f64, f64),
) -> Result<Mesh, MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::InvalidGrid(format!(
            "grid dimensions must be positive, got {nx}x{ny}"
        )));
    }
    if !(x_range.1 > x_range.0) || !(y_range.1 > y_range.0) {
        return Err(MeshError::InvalidGrid(format!(
            "empty range x={x_range:?} y={y_range:?}"
        )));
    }
    let hx = (x_range.1 - x_range.0) / nx as f64;
    let hy = (y_range.1 - y_range.0) / ny as f64;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        // Pin the far edge so the rectangle is reproduced exactly.
        let y = if j == ny { y_range.1 } else { y_range.0 + j as f64 * hy };
        for i in 0..=nx {
            let x = if i == nx { x_range.1 } else { x_range.0 + i as f64 * hx };
            nodes.push([x, y]);
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (sw, se, ne, nw) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            triangles.push([sw, se, ne]);
            triangles.push([sw, ne, nw]);
        }
    }
    Mesh::new(nodes, triangles)
}

/// Affine map `z = T·η + p1` from the reference triangle
/// `(0,0), (1,0), (0,1)` onto a physical triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    /// Row-major; column 0 is `p2 - p1`, column 1 is `p3 - p1`.
    pub t: [[f64; 2]; 2],
    pub p1: Point,
    pub det: f64,
    /// `(TᵀT)⁻¹`, row-major.
    pub gram_inv: [[f64; 2]; 2],
}

impl AffineMap {
    pub fn from_corners(p1: Point, p2: Point, p3: Point) -> Self {
        let e1 = sub(p2, p1);
        let e2 = sub(p3, p1);
        let t = [[e1[0], e2[0]], [e1[1], e2[1]]];
        let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
        // TᵀT = [[e1·e1, e1·e2], [e1·e2, e2·e2]], with determinant det².
        let g11 = dot(e1, e1);
        let g12 = dot(e1, e2);
        let g22 = dot(e2, e2);
        let det2 = det * det;
        let gram_inv = [[g22 / det2, -g12 / det2], [-g12 / det2, g11 / det2]];
        Self { t, p1, det, gram_inv }
    }

    pub fn map_to_physical(&self, eta: Point) -> Point {
        [
            self.t[0][0] * eta[0] + self.t[0][1] * eta[1] + self.p1[0],
            self.t[1][0] * eta[0] + self.t[1][1] * eta[1] + self.p1[1],
        ]
    }

    /// Inverse of [`map_to_physical`](Self::map_to_physical).
    pub fn to_reference(&self, z: Point) -> Point {
        let d = sub(z, self.p1);
        [
            (self.t[1][1] * d[0] - self.t[0][1] * d[1]) / self.det,
            (-self.t[1][0] * d[0] + self.t[0][0] * d[1]) / self.det,
        ]
    }

    /// Barycentric coordinates of `z` with respect to `(p1, p2, p3)`.
    pub fn barycentric(&self, z: Point) -> [f64; 3] {
        let [e1, e2] = self.to_reference(z);
        [1.0 - e1 - e2, e1, e2]
    }

    /// Physical area, `|det T| / 2`.
    pub fn area(&self) -> f64 {
        0.5 * self.det.abs()
    }
}

/// Free-function form of [`AffineMap::area`].
pub fn triangle_area(map: &AffineMap) -> f64 {
    map.area()
}

/// Mesh resolution and boundary clearance measured against a correlation
/// range.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub max_edge: f64,
    pub min_boundary_distance: f64,
    pub passes_edge_rule: bool,
    pub passes_boundary_rule: bool,
    pub range: f64,
}

impl QualityReport {
    pub fn passes(&self) -> bool {
        self.passes_edge_rule && self.passes_boundary_rule
    }

    /// Advisory notes for values that pass the permissive threshold but
    /// miss the stricter one (`range/10` for edges, `range` for boundary
    /// clearance).
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.passes_edge_rule && self.max_edge > self.range / 10.0 {
            w.push(format!(
                "max edge {:.6} exceeds range/10 = {:.6}",
                self.max_edge,
                self.range / 10.0
            ));
        }
        if self.passes_boundary_rule && self.min_boundary_distance < self.range {
            w.push(format!(
                "boundary distance {:.6} is below one range ({:.6})",
                self.min_boundary_distance, self.range
            ));
        }
        w
    }
}

impl fmt::Display for QualityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
        writeln!(f, "range = {}", self.range)?;
        writeln!(
            f,
            "edge rule: max_edge = {:.6} <= range/5 = {:.6}: {}",
            self.max_edge,
            self.range / 5.0,
            verdict(self.passes_edge_rule)
        )?;
        writeln!(
            f,
            "boundary rule: min_boundary_distance = {:.6} >= range/2 = {:.6}: {}",
            self.min_boundary_distance,
            self.range / 2.0,
            verdict(self.passes_boundary_rule)
        )?;
        for w in self.warnings() {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// Checks the mesh resolution (`max_edge <= range/5`) and the clearance of
/// each probe point from the boundary (`>= range/2`).
///
/// # Panics
///
/// Panics if `range` is not strictly positive.
pub fn quality_report(mesh: &Mesh, range: f64, probe_points: &[Point]) -> QualityReport {
    assert!(range > 0.0, "range must be positive, got {range}");
    let max_edge = mesh.max_edge();
    let boundary = mesh.boundary_edges();
    let min_boundary_distance = probe_points
        .iter()
        .flat_map(|&p| {
            boundary
                .iter()
                .map(move |&(i, j)| segment_distance(p, mesh.nodes[i], mesh.nodes[j]))
        })
        .fold(f64::INFINITY, f64::min);
    QualityReport {
        max_edge,
        min_boundary_distance,
        passes_edge_rule: max_edge <= range / 5.0,
        passes_boundary_rule: min_boundary_distance >= range / 2.0,
        range,
    }
}

fn parse_header(next: Option<(usize, &str)>, keyword: &str) -> Result<usize, MeshError> {
    let (line, l) = next.ok_or(MeshError::Parse {
        line: 0,
        msg: format!("missing `{keyword}` header"),
    })?;
    let mut it = l.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some(k), Some(n), None) if k == keyword => n.parse().map_err(|_| MeshError::Parse {
            line,
            msg: format!("invalid {keyword} count `{n}`"),
        }),
        _ => Err(MeshError::Parse {
            line,
            msg: format!("expected `{keyword} <count>`, found `{l}`"),
        }),
    }
}

fn parse_fields<T: std::str::FromStr, const N: usize>(
    line: usize,
    l: &str,
) -> Result<[T; N], MeshError> {
    let fields: Vec<&str> = l.split_whitespace().collect();
    if fields.len() != N {
        return Err(MeshError::Parse {
            line,
            msg: format!("expected {N} fields, found {}", fields.len()),
        });
    }
    let parsed: Result<Vec<T>, _> = fields.iter().map(|s| s.parse::<T>()).collect();
    let parsed = parsed.map_err(|_| MeshError::Parse {
        line,
        msg: format!("cannot parse `{l}`"),
    })?;
    parsed.try_into().map_err(|_| unreachable!())
}

fn check_coincident(nodes: &[Point]) -> Result<(), MeshError> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in nodes {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let tol = COINCIDENCE_TOL * dist2(lo, hi).sqrt();
    if !(tol > 0.0) {
        return Ok(());
    }
    // Bucket by tol-sized cells; coincident pairs sit in neighbouring cells.
    let cell = |p: Point| ((p[0] / tol).floor() as i64, (p[1] / tol).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, &p) in nodes.iter().enumerate() {
        let (cx, cy) = cell(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = grid.get(&(cx + dx, cy + dy)) {
                    if let Some(&j) = bucket.iter().find(|&&j| dist2(p, nodes[j]).sqrt() <= tol) {
                        return Err(MeshError::DuplicateNode { first: j, second: i });
                    }
                }
            }
        }
        grid.entry((cx, cy)).or_default().push(i);
    }
    Ok(())
}

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub(crate) fn dist2(a: Point, b: Point) -> f64 {
    let d = sub(a, b);
    dot(d, d)
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let s = (dot(sub(p, a), ab) / dot(ab, ab)).clamp(0.0, 1.0);
    dist2(p, [a[0] + s * ab[0], a[1] + s * ab[1]]).sqrt()
}
