//! Structured triangulations of the unit square and the L-shaped domain.
//!
//! Six mesh families are provided: Right, Crossed and Nonuniform meshes on
//! the unit square, and Left, Uniform and Nonuniform meshes on the L-shaped
//! domain obtained by removing the quarter `[1/2,1] x [1/2,1]`. The integer
//! `N` is the number of subdivisions on each side of the square.
//!
//! Edges carry a global orientation (lower vertex index -> higher vertex
//! index) so that H(div) degrees of freedom have mesh-order independent
//! signs. Vertex numbering is row-major with centroid rows interleaved for
//! crossed meshes, which keeps the edge graph banded.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative jitter amplitude for Nonuniform meshes: `0.3 * (1/N)` per coordinate.
pub const JITTER_AMPLITUDE_FACTOR: f64 = 0.3;
/// Attempts before giving up on producing a non-degenerate jittered mesh.
const JITTER_MAX_RETRIES: u32 = 10;

/// The six mesh families of the numerical experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyName {
    SquareRight,
    SquareCrossed,
    SquareNonuniform,
    LShapeLeft,
    LShapeUniform,
    LShapeNonuniform,
}

/// Domain of a mesh family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Square,
    LShape,
}

/// Cell subdivision pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    /// Diagonal from the lower-left to the upper-right corner of each cell.
    Right,
    /// Diagonal from the lower-right to the upper-left corner.
    Left,
    /// Cell centroid plus four triangles per cell.
    Crossed,
}

impl FamilyName {
    pub const ALL: [FamilyName; 6] = [
        FamilyName::SquareRight,
        FamilyName::SquareCrossed,
        FamilyName::SquareNonuniform,
        FamilyName::LShapeLeft,
        FamilyName::LShapeUniform,
        FamilyName::LShapeNonuniform,
    ];

    pub fn domain(self) -> Domain {
        match self {
            FamilyName::SquareRight | FamilyName::SquareCrossed | FamilyName::SquareNonuniform => {
                Domain::Square
            }
            _ => Domain::LShape,
        }
    }

    /// Pattern of the (possibly unjittered parent) structured mesh.
    /// Nonuniform square meshes start from Right, nonuniform L-shape from Left.
    pub fn pattern(self) -> Pattern {
        match self {
            FamilyName::SquareRight | FamilyName::SquareNonuniform => Pattern::Right,
            FamilyName::LShapeLeft | FamilyName::LShapeNonuniform => Pattern::Left,
            FamilyName::SquareCrossed | FamilyName::LShapeUniform => Pattern::Crossed,
        }
    }

    pub fn is_nonuniform(self) -> bool {
        matches!(
            self,
            FamilyName::SquareNonuniform | FamilyName::LShapeNonuniform
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyName::SquareRight => "square-right",
            FamilyName::SquareCrossed => "square-crossed",
            FamilyName::SquareNonuniform => "square-nonuniform",
            FamilyName::LShapeLeft => "lshape-left",
            FamilyName::LShapeUniform => "lshape-uniform",
            FamilyName::LShapeNonuniform => "lshape-nonuniform",
        }
    }

    pub fn parse(s: &str) -> Result<FamilyName> {
        FamilyName::ALL
            .iter()
            .copied()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| {
                Error::parameter(format!(
                    "unknown mesh family {s:?}; expected one of {}",
                    FamilyName::ALL.map(|f| f.as_str()).join(", ")
                ))
            })
    }
}

impl std::fmt::Display for FamilyName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A mesh family instance: which family, how many subdivisions per side,
/// and the jitter seed (used only by the Nonuniform variants).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshFamily {
    pub name: FamilyName,
    pub subdivisions: u32,
    pub seed: u64,
}

impl MeshFamily {
    pub fn new(name: FamilyName, subdivisions: u32) -> Self {
        MeshFamily {
            name,
            subdivisions,
            seed: 0,
        }
    }

    pub fn with_seed(name: FamilyName, subdivisions: u32, seed: u64) -> Self {
        MeshFamily {
            name,
            subdivisions,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.subdivisions == 0 {
            return Err(Error::parameter("N must be >= 1"));
        }
        if self.name.domain() == Domain::LShape && self.subdivisions % 2 != 0 {
            return Err(Error::parameter(format!(
                "N must be even for L-shape families (got N={})",
                self.subdivisions
            )));
        }
        Ok(())
    }
}

/// A conforming triangulation with oriented edge topology.
///
/// Invariants (checked on construction):
/// * every edge is shared by exactly one (boundary) or two (interior) triangles,
/// * `V - E + T = 1` on the simply connected domains used here,
/// * all triangle signed areas are strictly positive,
/// * boundary vertices are exactly the endpoints of boundary edges.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    /// Vertex coordinates, domain contained in `[0,1]^2`.
    pub vertices: Vec<[f64; 2]>,
    /// Vertex index triples, counter-clockwise.
    pub triangles: Vec<[usize; 3]>,
    /// Vertex index pairs with the global convention lower index -> higher index.
    pub edges: Vec<[usize; 2]>,
    /// Per triangle: (edge index, sign) for the local edges opposite vertices
    /// 0, 1, 2. The sign is +1 when the triangle's outward normal on that edge
    /// agrees with the global edge normal.
    pub triangle_edges: Vec<[(usize, i8); 3]>,
    /// Edge indices on the domain boundary.
    pub boundary_edges: BTreeSet<usize>,
    /// Vertex indices on the domain boundary.
    pub boundary_vertices: BTreeSet<usize>,
    /// Longest edge length.
    pub h_max: f64,
}

impl TriangleMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt()
    }

    /// Builds the edge topology from vertices and triangles and checks all
    /// mesh invariants.
    pub fn from_cells(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<TriangleMesh> {
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(Error::parameter(format!(
                        "triangle {t} references vertex {v} out of range"
                    )));
                }
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if area <= 0.0 {
                return Err(Error::parameter(format!(
                    "triangle {t} has non-positive signed area {area:.3e}"
                )));
            }
        }

        // Deterministic edge numbering: lexicographic by (lo, hi) vertex pair.
        let mut edge_set: BTreeSet<[usize; 2]> = BTreeSet::new();
        for tri in &triangles {
            for l in 0..3 {
                let a = tri[(l + 1) % 3];
                let b = tri[(l + 2) % 3];
                edge_set.insert([a.min(b), a.max(b)]);
            }
        }
        let edges: Vec<[usize; 2]> = edge_set.into_iter().collect();
        let edge_index: BTreeMap<[usize; 2], usize> =
            edges.iter().enumerate().map(|(i, &k)| (k, i)).collect();

        let mut incidence = vec![0usize; edges.len()];
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let mut local = [(0usize, 0i8); 3];
            for l in 0..3 {
                let a = tri[(l + 1) % 3];
                let b = tri[(l + 2) % 3];
                let e = edge_index[&[a.min(b), a.max(b)]];
                // CCW traversal goes a -> b; the global edge goes lo -> hi.
                // Outward normal agrees with the global edge normal iff a < b.
                let sign = if a < b { 1i8 } else { -1i8 };
                local[l] = (e, sign);
                incidence[e] += 1;
            }
            triangle_edges.push(local);
        }

        let mut boundary_edges = BTreeSet::new();
        for (e, &count) in incidence.iter().enumerate() {
            match count {
                1 => {
                    boundary_edges.insert(e);
                }
                2 => {}
                n => {
                    return Err(Error::parameter(format!(
                        "edge {e} is shared by {n} triangles; mesh is not conforming"
                    )));
                }
            }
        }
        let mut boundary_vertices = BTreeSet::new();
        for &e in &boundary_edges {
            boundary_vertices.insert(edges[e][0]);
            boundary_vertices.insert(edges[e][1]);
        }

        let euler =
            vertices.len() as i64 - edges.len() as i64 + triangles.len() as i64;
        if euler != 1 {
            return Err(Error::parameter(format!(
                "Euler characteristic V-E+T = {euler}, expected 1"
            )));
        }

        let mut mesh = TriangleMesh {
            vertices,
            triangles,
            edges,
            triangle_edges,
            boundary_edges,
            boundary_vertices,
            h_max: 0.0,
        };
        mesh.h_max = (0..mesh.n_edges())
            .map(|e| mesh.edge_length(e))
            .fold(0.0, f64::max);
        Ok(mesh)
    }

    /// Serializes vertices and triangles as JSON. Topology is never
    /// serialized; it is recomputed on load.
    pub fn to_json(&self) -> String {
        let doc = MeshJson {
            vertices: self.vertices.clone(),
            triangles: self.triangles.clone(),
        };
        serde_json::to_string(&doc).expect("mesh serialization cannot fail")
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_json().as_bytes())?;
        w.write_all(b"\n")?;
        Ok(())
    }

    /// Reads a mesh from JSON, skipping leading `#` comment lines, and
    /// rebuilds the full topology.
    pub fn read_json<R: BufRead>(r: R) -> Result<TriangleMesh> {
        let mut body = String::new();
        for line in r.lines() {
            let line = line?;
            if line.trim_start().starts_with('#') {
                continue;
            }
            body.push_str(&line);
            body.push('\n');
        }
        let doc: MeshJson = serde_json::from_str(&body)?;
        TriangleMesh::from_cells(doc.vertices, doc.triangles)
    }
}

#[derive(Serialize, Deserialize)]
struct MeshJson {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
}

/// Counts and mesh quality measures reported by `mesh_statistics`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshStatistics {
    pub n_vertices: usize,
    pub n_edges: usize,
    pub n_triangles: usize,
    pub n_boundary_vertices: usize,
    pub n_boundary_edges: usize,
    pub h_max: f64,
    pub min_angle_deg: f64,
}

pub fn mesh_statistics(mesh: &TriangleMesh) -> MeshStatistics {
    let mut min_angle = f64::INFINITY;
    for tri in &mesh.triangles {
        for l in 0..3 {
            let p = mesh.vertices[tri[l]];
            let q = mesh.vertices[tri[(l + 1) % 3]];
            let r = mesh.vertices[tri[(l + 2) % 3]];
            let u = [q[0] - p[0], q[1] - p[1]];
            let v = [r[0] - p[0], r[1] - p[1]];
            let dot = u[0] * v[0] + u[1] * v[1];
            let nu = (u[0] * u[0] + u[1] * u[1]).sqrt();
            let nv = (v[0] * v[0] + v[1] * v[1]).sqrt();
            let cos = (dot / (nu * nv)).clamp(-1.0, 1.0);
            min_angle = min_angle.min(cos.acos());
        }
    }
    MeshStatistics {
        n_vertices: mesh.n_vertices(),
        n_edges: mesh.n_edges(),
        n_triangles: mesh.n_triangles(),
        n_boundary_vertices: mesh.boundary_vertices.len(),
        n_boundary_edges: mesh.boundary_edges.len(),
        h_max: mesh.h_max,
        min_angle_deg: min_angle.to_degrees(),
    }
}

/// Generates the requested mesh family instance.
pub fn generate_mesh(family: &MeshFamily) -> Result<TriangleMesh> {
    family.validate()?;
    let base = structured_mesh(
        family.name.domain(),
        family.name.pattern(),
        family.subdivisions,
    )?;
    if family.name.is_nonuniform() {
        jitter_interior(base, family.subdivisions, family.seed)
    } else {
        Ok(base)
    }
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn in_domain_vertex(domain: Domain, i: u32, j: u32, n: u32) -> bool {
    match domain {
        Domain::Square => true,
        // Keep vertices on the re-entrant lines x=1/2, y=1/2.
        Domain::LShape => !(i > n / 2 && j > n / 2),
    }
}

fn in_domain_cell(domain: Domain, i: u32, j: u32, n: u32) -> bool {
    match domain {
        Domain::Square => true,
        Domain::LShape => !(i >= n / 2 && j >= n / 2),
    }
}

/// Builds the structured parent mesh. Grid rows and (for crossed patterns)
/// centroid rows are interleaved so vertex numbering stays banded.
pub fn structured_mesh(domain: Domain, pattern: Pattern, n: u32) -> Result<TriangleMesh> {
    let h = 1.0 / n as f64;
    let mut vertices = Vec::new();
    let mut grid_id = BTreeMap::new();
    let mut centroid_id = BTreeMap::new();

    for j in 0..=n {
        for i in 0..=n {
            if in_domain_vertex(domain, i, j, n) {
                grid_id.insert((i, j), vertices.len());
                vertices.push([i as f64 * h, j as f64 * h]);
            }
        }
        if pattern == Pattern::Crossed && j < n {
            for i in 0..n {
                if in_domain_cell(domain, i, j, n) {
                    centroid_id.insert((i, j), vertices.len());
                    vertices.push([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
                }
            }
        }
    }

    let mut triangles = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if !in_domain_cell(domain, i, j, n) {
                continue;
            }
            let a = grid_id[&(i, j)];
            let b = grid_id[&(i + 1, j)];
            let c = grid_id[&(i + 1, j + 1)];
            let d = grid_id[&(i, j + 1)];
            match pattern {
                Pattern::Right => {
                    triangles.push([a, b, c]);
                    triangles.push([a, c, d]);
                }
                Pattern::Left => {
                    triangles.push([a, b, d]);
                    triangles.push([b, c, d]);
                }
                Pattern::Crossed => {
                    let m = centroid_id[&(i, j)];
                    triangles.push([a, b, m]);
                    triangles.push([b, c, m]);
                    triangles.push([c, d, m]);
                    triangles.push([d, a, m]);
                }
            }
        }
    }

    TriangleMesh::from_cells(vertices, triangles)
}

/// Displaces interior vertices by a seeded uniform offset of magnitude at
/// most `0.3/N` per coordinate, keeping the boundary fixed. Retries with a
/// halved amplitude if any triangle degenerates.
fn jitter_interior(base: TriangleMesh, n: u32, seed: u64) -> Result<TriangleMesh> {
    let mut amplitude = JITTER_AMPLITUDE_FACTOR / n as f64;
    for attempt in 0..JITTER_MAX_RETRIES {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed.wrapping_add(u64::from(attempt).wrapping_mul(0x9E37)));
        let mut vertices = base.vertices.clone();
        for (v, p) in vertices.iter_mut().enumerate() {
            // Draw for every vertex so the stream layout does not depend on
            // the boundary set; discard boundary displacements.
            let dx = rng.gen_range(-amplitude..=amplitude);
            let dy = rng.gen_range(-amplitude..=amplitude);
            if !base.boundary_vertices.contains(&v) {
                p[0] += dx;
                p[1] += dy;
            }
        }
        let degenerate = base.triangles.iter().any(|tri| {
            signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) <= 0.0
        });
        if !degenerate {
            return TriangleMesh::from_cells(vertices, base.triangles.clone());
        }
        amplitude *= 0.5;
    }
    Err(Error::Numerical(format!(
        "jitter produced a degenerate triangle even after {JITTER_MAX_RETRIES} amplitude halvings"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(name: FamilyName, n: u32) -> TriangleMesh {
        generate_mesh(&MeshFamily::new(name, n)).unwrap()
    }

    #[test]
    fn smallest_right_mesh_counts() {
        let m = gen(FamilyName::SquareRight, 1);
        assert_eq!((m.n_vertices(), m.n_triangles(), m.n_edges()), (4, 2, 5));
        assert_eq!(m.n_vertices() as i64 - m.n_edges() as i64 + m.n_triangles() as i64, 1);
    }

    #[test]
    fn single_crossed_cell_counts() {
        let m = gen(FamilyName::SquareCrossed, 1);
        assert_eq!((m.n_vertices(), m.n_triangles(), m.n_edges()), (5, 4, 8));
    }

    #[test]
    fn lshape_left_n2_counts() {
        // Hand count on the 3-cell L: consistent with Euler's formula.
        let m = gen(FamilyName::LShapeLeft, 2);
        assert_eq!((m.n_vertices(), m.n_triangles(), m.n_edges()), (8, 6, 13));
    }

    #[test]
    fn lshape_uniform_n2_triangle_count() {
        let m = gen(FamilyName::LShapeUniform, 2);
        assert_eq!(m.n_triangles(), 12);
    }

    #[test]
    fn square_right_n2_statistics() {
        let m = gen(FamilyName::SquareRight, 2);
        let s = mesh_statistics(&m);
        assert_eq!((s.n_vertices, s.n_triangles, s.n_edges), (9, 8, 16));
        assert_eq!(s.n_boundary_vertices, 8);
    }

    #[test]
    fn unit_cell_h_max_is_diagonal() {
        let m = gen(FamilyName::SquareRight, 1);
        assert!((m.h_max - 2f64.sqrt()).abs() < 1e-15);
        let s = mesh_statistics(&m);
        assert!((s.min_angle_deg - 45.0).abs() < 1e-12);
    }

    #[test]
    fn nonuniform_is_deterministic() {
        let f = MeshFamily::with_seed(FamilyName::SquareNonuniform, 4, 7);
        let a = generate_mesh(&f).unwrap();
        let b = generate_mesh(&f).unwrap();
        assert_eq!(a.vertices, b.vertices);
        assert_eq!(a.triangles, b.triangles);
        // A different seed must move at least one interior vertex.
        let c = generate_mesh(&MeshFamily::with_seed(FamilyName::SquareNonuniform, 4, 8)).unwrap();
        assert_ne!(a.vertices, c.vertices);
    }

    #[test]
    fn jitter_preserves_topology() {
        let parent = gen(FamilyName::SquareRight, 4);
        let jittered = generate_mesh(&MeshFamily::with_seed(FamilyName::SquareNonuniform, 4, 3))
            .unwrap();
        assert_eq!(parent.triangles, jittered.triangles);
        assert_eq!(parent.edges, jittered.edges);
        assert_eq!(parent.boundary_vertices, jittered.boundary_vertices);
    }

    #[test]
    fn invalid_subdivision_counts_rejected() {
        assert!(matches!(
            generate_mesh(&MeshFamily::new(FamilyName::SquareRight, 0)),
            Err(Error::Parameter(_))
        ));
        let err = generate_mesh(&MeshFamily::new(FamilyName::LShapeLeft, 3)).unwrap_err();
        assert!(err.to_string().contains("N must be even for L-shape"));
    }

    #[test]
    fn json_round_trip_rebuilds_topology() {
        let m = gen(FamilyName::LShapeUniform, 4);
        let mut text = String::from("# comment header\n");
        text.push_str(&m.to_json());
        let back = TriangleMesh::read_json(text.as_bytes()).unwrap();
        assert_eq!(m.vertices, back.vertices);
        assert_eq!(m.edges, back.edges);
        assert_eq!(m.boundary_edges, back.boundary_edges);
    }
}
