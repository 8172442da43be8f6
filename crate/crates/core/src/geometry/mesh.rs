use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::domain::DomainSpec;
use super::locate::Locator;
use super::Point;
use crate::error::{Error, Result};

/// Conforming triangulation of a planar domain.
///
/// Immutable after construction. Triangles are stored counterclockwise; edge
/// topology and the point locator are built lazily on first use.
#[derive(Debug)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_nodes: Vec<usize>,
    is_boundary: Vec<bool>,
    areas: Vec<f64>,
    h_max: f64,
    domain: Option<DomainSpec>,
    topology: OnceLock<Topology>,
    locator: OnceLock<Locator>,
}

/// Unique edges with their incident triangles, plus triangle adjacency.
#[derive(Debug)]
pub struct Topology {
    pub edges: Vec<[usize; 2]>,
    /// Incident triangles of each edge; the second slot is `None` on the boundary.
    pub edge_triangles: Vec<[Option<usize>; 2]>,
    /// For triangle `t`, `neighbors[t][k]` is the triangle across the edge opposite vertex `k`.
    pub neighbors: Vec<[Option<usize>; 3]>,
    pub edge_index: HashMap<(usize, usize), usize>,
}

/// JSON interchange form of a mesh.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshDocument {
    pub nodes: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) fn signed_triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl Mesh {
    /// Builds a mesh from raw arrays; the boundary is the set of nodes on edges
    /// that belong to exactly one triangle.
    pub fn from_parts(nodes: Vec<Point>, triangles: Vec<[usize; 3]>, domain: Option<DomainSpec>) -> Result<Mesh> {
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        let n = nodes.len();
        if nodes.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::InvalidMesh("non-finite node coordinate".into()));
        }
        let mut areas = Vec::with_capacity(triangles.len());
        let mut h_max: f64 = 0.0;
        let mut used = vec![false; n];
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing node")));
            }
            let [a, b, c] = tri.map(|v| nodes[v]);
            let area = signed_triangle_area(a, b, c);
            if !(area > 0.0) {
                return Err(Error::DegenerateTriangle { index: t, area });
            }
            areas.push(area);
            h_max = h_max.max(dist(a, b)).max(dist(b, c)).max(dist(c, a));
            for &v in tri {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::InvalidMesh(format!("node {v} belongs to no triangle")));
        }
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &triangles {
            for k in 0..3 {
                *counts.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_default() += 1;
            }
        }
        let mut is_boundary = vec![false; n];
        for (&(a, b), &c) in &counts {
            if c > 2 {
                return Err(Error::InvalidMesh(format!("edge ({a},{b}) has {c} triangles")));
            }
            if c == 1 {
                is_boundary[a] = true;
                is_boundary[b] = true;
            }
        }
        let boundary_nodes = (0..n).filter(|&i| is_boundary[i]).collect();
        Ok(Mesh {
            nodes,
            triangles,
            boundary_nodes,
            is_boundary,
            areas,
            h_max,
            domain,
            topology: OnceLock::new(),
            locator: OnceLock::new(),
        })
    }

    pub fn from_document(doc: MeshDocument) -> Result<Mesh> {
        let MeshDocument { nodes, triangles, boundary, domain } = doc;
        let mesh = Mesh::from_parts(nodes, triangles, domain)?;
        let mut given = boundary;
        given.sort_unstable();
        given.dedup();
        if given != mesh.boundary_nodes {
            return Err(Error::InvalidMesh("boundary list does not match the topological boundary".into()));
        }
        Ok(mesh)
    }

    pub fn to_document(&self) -> MeshDocument {
        MeshDocument {
            nodes: self.nodes.clone(),
            triangles: self.triangles.clone(),
            boundary: self.boundary_nodes.clone(),
            domain: self.domain.clone(),
        }
    }

    /// Hex SHA-256 of the node coordinates and connectivity.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for p in &self.nodes {
            h.update(p[0].to_le_bytes());
            h.update(p[1].to_le_bytes());
        }
        for t in &self.triangles {
            for &v in t {
                h.update((v as u64).to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Mesh> {
        Mesh::from_document(serde_json::from_str(s)?)
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Point {
        self.nodes[i]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.is_boundary[i]
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&i| !self.is_boundary[i])
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn domain(&self) -> Option<&DomainSpec> {
        self.domain.as_ref()
    }

    pub fn vertices(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.nodes[v])
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.vertices(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Cartesian point with barycentric coordinates `bary` in triangle `t`.
    pub fn point_at(&self, t: usize, bary: [f64; 3]) -> Point {
        let [a, b, c] = self.vertices(t);
        [bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0], bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1]]
    }

    /// Gradients of the three hat functions on triangle `t` (constant per triangle).
    pub fn hat_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.vertices(t);
        let two_area = 2.0 * self.areas[t];
        [
            [(b[1] - c[1]) / two_area, (c[0] - b[0]) / two_area],
            [(c[1] - a[1]) / two_area, (a[0] - c[0]) / two_area],
            [(a[1] - b[1]) / two_area, (b[0] - a[0]) / two_area],
        ]
    }

    /// Index of the node closest to `p`.
    pub fn nearest_node(&self, p: Point) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, q) in self.nodes.iter().enumerate() {
            let d = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    /// Lumped (row-sum) mass of each node: one third of the adjacent triangle areas.
    pub fn lumped_mass(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.nodes.len()];
        for (tri, &a) in self.triangles.iter().zip(&self.areas) {
            for &v in tri {
                m[v] += a / 3.0;
            }
        }
        m
    }

    pub fn topology(&self) -> &Topology {
        self.topology.get_or_init(|| {
            let mut edge_index = HashMap::new();
            let mut edges = Vec::new();
            let mut edge_triangles: Vec<[Option<usize>; 2]> = Vec::new();
            for (t, tri) in self.triangles.iter().enumerate() {
                for k in 0..3 {
                    let key = edge_key(tri[k], tri[(k + 1) % 3]);
                    let e = *edge_index.entry(key).or_insert_with(|| {
                        edges.push([key.0, key.1]);
                        edge_triangles.push([None, None]);
                        edges.len() - 1
                    });
                    if edge_triangles[e][0].is_none() {
                        edge_triangles[e][0] = Some(t);
                    } else {
                        edge_triangles[e][1] = Some(t);
                    }
                }
            }
            let neighbors = self
                .triangles
                .iter()
                .enumerate()
                .map(|(t, tri)| {
                    let mut nb = [None; 3];
                    for (k, slot) in nb.iter_mut().enumerate() {
                        let key = edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3]);
                        let e = edge_index[&key];
                        let [t0, t1] = edge_triangles[e];
                        *slot = if t0 == Some(t) { t1 } else { t0 };
                    }
                    nb
                })
                .collect();
            Topology { edges, edge_triangles, neighbors, edge_index }
        })
    }

    pub fn num_edges(&self) -> usize {
        self.topology().edges.len()
    }

    pub fn locator(&self) -> &Locator {
        self.locator.get_or_init(|| Locator::new(self))
    }

    /// Closed boundary loops as node sequences, each oriented with the domain on the left.
    pub fn boundary_loops(&self) -> Vec<Vec<usize>> {
        let topo = self.topology();
        let mut next: HashMap<usize, usize> = HashMap::new();
        for (e, tris) in topo.edge_triangles.iter().enumerate() {
            if tris[1].is_some() {
                continue;
            }
            let t = tris[0].expect("edge without triangle");
            let tri = self.triangles[t];
            let [a, b] = topo.edges[e];
            // orientation of the edge inside its triangle
            let k = tri.iter().position(|&v| v == a).unwrap();
            if tri[(k + 1) % 3] == b {
                next.insert(a, b);
            } else {
                next.insert(b, a);
            }
        }
        let mut starts: Vec<usize> = next.keys().copied().collect();
        starts.sort_unstable();
        let mut seen = vec![false; self.nodes.len()];
        let mut loops = Vec::new();
        for s in starts {
            if seen[s] {
                continue;
            }
            let mut lp = vec![s];
            seen[s] = true;
            let mut cur = next[&s];
            while cur != s {
                seen[cur] = true;
                lp.push(cur);
                cur = next[&cur];
            }
            loops.push(lp);
        }
        loops
    }

    /// Uniform 1-to-4 refinement by edge midpoints. Boundary midpoints of curved
    /// domains are moved onto the exact boundary curve.
    pub fn refine(&self) -> Result<Mesh> {
        let topo = self.topology();
        let mut nodes = self.nodes.clone();
        let mut midpoint = Vec::with_capacity(topo.edges.len());
        let curved = self.domain.as_ref().filter(|d| d.is_curved());
        for (e, &[a, b]) in topo.edges.iter().enumerate() {
            let (pa, pb) = (self.nodes[a], self.nodes[b]);
            let mut m = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            if topo.edge_triangles[e][1].is_none() {
                if let Some(d) = curved {
                    m = d.project_to_boundary(m);
                }
            }
            midpoint.push(nodes.len());
            nodes.push(m);
        }
        let mid = |a: usize, b: usize| midpoint[topo.edge_index[&edge_key(a, b)]];
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        Mesh::from_parts(nodes, triangles, self.domain.clone())
    }
}

impl Clone for Mesh {
    fn clone(&self) -> Self {
        Mesh {
            nodes: self.nodes.clone(),
            triangles: self.triangles.clone(),
            boundary_nodes: self.boundary_nodes.clone(),
            is_boundary: self.is_boundary.clone(),
            areas: self.areas.clone(),
            h_max: self.h_max,
            domain: self.domain.clone(),
            topology: OnceLock::new(),
            locator: OnceLock::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Unit square split into four triangles around its centre.
    pub(crate) fn four_triangle_square() -> Mesh {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        let tris = vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]];
        Mesh::from_parts(nodes, tris, None).unwrap()
    }

    #[test]
    fn four_triangle_square_refines_to_sixteen() {
        let m = four_triangle_square();
        assert_eq!(m.boundary_nodes(), &[0, 1, 2, 3]);
        let r = m.refine().unwrap();
        assert_eq!(r.num_triangles(), 16);
        assert_eq!(r.num_nodes(), m.num_nodes() + m.num_edges());
        assert!((r.h_max() - 0.5 * m.h_max()).abs() < 1e-12);
        assert!((r.area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_clockwise_triangle() {
        let nodes = vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]];
        let err = Mesh::from_parts(nodes, vec![[0, 1, 2]], None).unwrap_err();
        assert!(matches!(err, Error::DegenerateTriangle { index: 0, .. }));
    }

    #[test]
    fn boundary_loop_is_counterclockwise() {
        let m = four_triangle_square();
        let loops = m.boundary_loops();
        assert_eq!(loops.len(), 1);
        let poly: Vec<Point> = loops[0].iter().map(|&i| m.node(i)).collect();
        assert!(crate::geometry::domain::signed_area(&poly) > 0.0);
    }

    #[test]
    fn json_round_trip_checks_boundary() {
        let m = four_triangle_square();
        let json = m.to_json().unwrap();
        let back = Mesh::from_json(&json).unwrap();
        assert_eq!(back.nodes(), m.nodes());
        let mut doc = m.to_document();
        doc.boundary.pop();
        assert!(Mesh::from_document(doc).is_err());
    }

    #[test]
    fn hat_gradients_sum_to_zero() {
        let m = four_triangle_square();
        for t in 0..m.num_triangles() {
            let g = m.hat_gradients(t);
            assert!((g[0][0] + g[1][0] + g[2][0]).abs() < 1e-14);
            assert!((g[0][1] + g[1][1] + g[2][1]).abs() < 1e-14);
        }
    }
}
