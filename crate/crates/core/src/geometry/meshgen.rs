use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use super::domain::{point_in_polygon, point_segment_distance, signed_area, DomainSpec, Shape};
use super::mesh::{signed_triangle_area, Mesh};
use super::Point;
use crate::error::{Error, Result};

/// Node spacing relative to the requested target edge length.
const SPACING: f64 = 0.9;

/// Triangulates `spec` with edges close to `target_h`.
///
/// Shapes centred at the origin are meshed in the first quadrant and mirrored,
/// so the result is exactly symmetric about both coordinate axes.
pub fn build_mesh(spec: &DomainSpec, target_h: f64) -> Result<Mesh> {
    spec.validate()?;
    if !(target_h.is_finite() && target_h > 0.0) {
        return Err(Error::InvalidMesh(format!("target_h must be positive, got {target_h}")));
    }
    let sp = SPACING * target_h;
    let (nodes, tris) = match &spec.shape {
        Shape::UnitDisk => mirror(ring_quadrant(&ring_radii(0.0, 1.0, sp), sp)),
        Shape::Disk { radius } => mirror(ring_quadrant(&ring_radii(0.0, *radius, sp), sp)),
        Shape::Annulus { inner, outer } => mirror(ring_quadrant(&ring_radii(*inner, *outer, sp), sp)),
        Shape::Ellipse { a, b } => {
            let s = sp / a.max(*b);
            let (nodes, tris) = mirror(ring_quadrant(&ring_radii(0.0, 1.0, s), s));
            (nodes.into_iter().map(|[x, y]| [a * x, b * y]).collect(), tris)
        }
        Shape::Rectangle { width, height } => mirror(grid_quadrant(0.5 * width, 0.5 * height, sp)),
        Shape::Polygon { vertices } => polygon_mesh(vertices, sp)?,
    };
    let mesh = Mesh::from_parts(nodes, tris, Some(spec.clone()))?;
    let interior = mesh.num_nodes() - mesh.boundary_nodes().len();
    if interior < 3 {
        return Err(Error::InvalidMesh(format!("target_h {target_h} leaves only {interior} interior nodes")));
    }
    Ok(mesh)
}

/// Builds a mesh and refines it `refinements` times.
pub fn build_refined(spec: &DomainSpec, target_h: f64, refinements: usize) -> Result<Mesh> {
    let mut m = build_mesh(spec, target_h)?;
    for _ in 0..refinements {
        m = m.refine()?;
    }
    Ok(m)
}

fn ring_radii(inner: f64, outer: f64, sp: f64) -> Vec<f64> {
    let n = (((outer - inner) / sp).ceil() as usize).max(1);
    (0..=n).map(|k| if k == n { outer } else { inner + (outer - inner) * k as f64 / n as f64 }).collect()
}

fn ring_point(r: f64, j: usize, segments: usize) -> Point {
    if j == 0 {
        [r, 0.0]
    } else if j == segments {
        [0.0, r]
    } else {
        let th = FRAC_PI_2 * j as f64 / segments as f64;
        [r * th.cos(), r * th.sin()]
    }
}

/// Quarter-disk (or quarter-annulus) strip mesh between concentric rings.
fn ring_quadrant(radii: &[f64], sp: f64) -> (Vec<Point>, Vec<[usize; 3]>) {
    let mut nodes = Vec::new();
    let mut tris = Vec::new();
    let mut prev: Vec<usize> = Vec::new();
    let mut segments = 0usize;
    for &r in radii {
        if r == 0.0 {
            nodes.push([0.0, 0.0]);
            prev = vec![nodes.len() - 1];
            continue;
        }
        segments = segments.max(((FRAC_PI_2 * r / sp).ceil() as usize).max(1));
        let ring: Vec<usize> = (0..=segments)
            .map(|j| {
                nodes.push(ring_point(r, j, segments));
                nodes.len() - 1
            })
            .collect();
        if prev.len() == 1 {
            for j in 0..segments {
                tris.push([prev[0], ring[j], ring[j + 1]]);
            }
        } else if !prev.is_empty() {
            stitch(&nodes, &prev, &ring, &mut tris);
        }
        prev = ring;
    }
    (nodes, tris)
}

/// Triangulates the strip between an inner and an outer chain, both ordered by angle.
fn stitch(nodes: &[Point], inner: &[usize], outer: &[usize], tris: &mut Vec<[usize; 3]>) {
    let d = |a: usize, b: usize| {
        let (p, q) = (nodes[a], nodes[b]);
        (p[0] - q[0]).hypot(p[1] - q[1])
    };
    let (p, q) = (inner.len() - 1, outer.len() - 1);
    let (mut i, mut j) = (0, 0);
    while i < p || j < q {
        let advance_outer = if i == p {
            true
        } else if j == q {
            false
        } else {
            d(inner[i], outer[j + 1]) <= d(inner[i + 1], outer[j])
        };
        if advance_outer {
            tris.push([inner[i], outer[j], outer[j + 1]]);
            j += 1;
        } else {
            tris.push([inner[i], outer[j], inner[i + 1]]);
            i += 1;
        }
    }
}

fn grid_quadrant(hw: f64, hh: f64, sp: f64) -> (Vec<Point>, Vec<[usize; 3]>) {
    let nx = ((hw / sp).ceil() as usize).max(1);
    let ny = ((hh / sp).ceil() as usize).max(1);
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([hw * i as f64 / nx as f64, hh * j as f64 / ny as f64]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut tris = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    (nodes, tris)
}

/// Reflects a first-quadrant mesh into all four quadrants, merging nodes on the axes.
fn mirror((nodes, tris): (Vec<Point>, Vec<[usize; 3]>)) -> (Vec<Point>, Vec<[usize; 3]>) {
    let mut out_nodes: Vec<Point> = Vec::with_capacity(4 * nodes.len());
    let mut out_tris = Vec::with_capacity(4 * tris.len());
    let mut index: HashMap<(u64, u64), usize> = HashMap::new();
    for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        let map: Vec<usize> = nodes
            .iter()
            .map(|&[x, y]| {
                // adding 0.0 turns -0.0 into 0.0 so axis nodes merge
                let p = [sx * x + 0.0, sy * y + 0.0];
                *index.entry((p[0].to_bits(), p[1].to_bits())).or_insert_with(|| {
                    out_nodes.push(p);
                    out_nodes.len() - 1
                })
            })
            .collect();
        for &[a, b, c] in &tris {
            if sx * sy > 0.0 {
                out_tris.push([map[a], map[b], map[c]]);
            } else {
                out_tris.push([map[a], map[c], map[b]]);
            }
        }
    }
    (out_nodes, out_tris)
}

fn polygon_mesh(vertices: &[Point], sp: f64) -> Result<(Vec<Point>, Vec<[usize; 3]>)> {
    let n = vertices.len();
    let mut points = Vec::new();
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let k = ((len / sp).ceil() as usize).max(1);
        for s in 0..k {
            let t = s as f64 / k as f64;
            points.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    let num_boundary = points.len();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for v in vertices {
        for k in 0..2 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    let dy = sp * 3f64.sqrt() / 2.0;
    let mut row = 0usize;
    let mut y = lo[1] + 0.5 * dy;
    while y < hi[1] {
        let mut x = lo[0] + if row % 2 == 0 { 0.25 * sp } else { 0.75 * sp };
        while x < hi[0] {
            let p = [x, y];
            if point_in_polygon(vertices, p) {
                let clearance = (0..n)
                    .map(|i| point_segment_distance(p, vertices[i], vertices[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min);
                if clearance >= 0.6 * sp {
                    points.push(p);
                }
            }
            x += sp;
        }
        y += dy;
        row += 1;
    }

    let all = delaunay(&points);
    let mut kept: Vec<[usize; 3]> = all
        .into_iter()
        .filter(|&[a, b, c]| {
            let (pa, pb, pc) = (points[a], points[b], points[c]);
            let cen = [(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0];
            signed_triangle_area(pa, pb, pc) > 1e-12 * sp * sp && point_in_polygon(vertices, cen)
        })
        .collect();

    // drop nodes no triangle uses (possible only for collinear boundary samples)
    let mut remap = vec![usize::MAX; points.len()];
    let mut nodes = Vec::new();
    for tri in &mut kept {
        for v in tri.iter_mut() {
            if remap[*v] == usize::MAX {
                remap[*v] = nodes.len();
                nodes.push(points[*v]);
            }
            *v = remap[*v];
        }
    }
    let area: f64 = kept.iter().map(|&[a, b, c]| signed_triangle_area(nodes[a], nodes[b], nodes[c])).sum();
    let exact = signed_area(vertices);
    if (area - exact).abs() > 1e-10 * exact {
        return Err(Error::InvalidMesh(format!(
            "triangulation covers area {area}, polygon has {exact} ({num_boundary} boundary samples)"
        )));
    }
    Ok((nodes, kept))
}

/// Bowyer–Watson Delaunay triangulation of a point set (counterclockwise output).
pub(crate) fn delaunay(points: &[Point]) -> Vec<[usize; 3]> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let mut pts = points.to_vec();
    let s = points.len();
    pts.push([mid[0] - 20.0 * span, mid[1] - 10.0 * span]);
    pts.push([mid[0] + 20.0 * span, mid[1] - 10.0 * span]);
    pts.push([mid[0], mid[1] + 20.0 * span]);

    struct Tri {
        v: [usize; 3],
        center: Point,
        r2: f64,
    }
    let make = |pts: &[Point], v: [usize; 3]| -> Tri {
        let [a, b, c] = v.map(|i| pts[i]);
        let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
        let (a2, b2, c2) = (a[0] * a[0] + a[1] * a[1], b[0] * b[0] + b[1] * b[1], c[0] * c[0] + c[1] * c[1]);
        let ux = (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d;
        let uy = (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d;
        let r2 = (a[0] - ux).powi(2) + (a[1] - uy).powi(2);
        Tri { v, center: [ux, uy], r2 }
    };
    let mut tris = vec![make(&pts, [s, s + 1, s + 2])];
    for (i, &p) in points.iter().enumerate() {
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        let mut keep = Vec::with_capacity(tris.len());
        for t in tris.drain(..) {
            let d2 = (p[0] - t.center[0]).powi(2) + (p[1] - t.center[1]).powi(2);
            if d2 < t.r2 * (1.0 - 1e-12) {
                for k in 0..3 {
                    let (a, b) = (t.v[k], t.v[(k + 1) % 3]);
                    *edges.entry(if a < b { (a, b) } else { (b, a) }).or_default() += 1;
                }
                keep.push((t, true));
            } else {
                keep.push((t, false));
            }
        }
        let mut next = Vec::with_capacity(keep.len() + 4);
        let mut new_edges = Vec::new();
        for (t, bad) in keep {
            if bad {
                for k in 0..3 {
                    let (a, b) = (t.v[k], t.v[(k + 1) % 3]);
                    if edges[&if a < b { (a, b) } else { (b, a) }] == 1 {
                        new_edges.push((a, b));
                    }
                }
            } else {
                next.push(t);
            }
        }
        for (a, b) in new_edges {
            next.push(make(&pts, [a, b, i]));
        }
        tris = next;
    }
    tris.into_iter().filter(|t| t.v.iter().all(|&v| v < s)).map(|t| t.v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Axis;
    use std::f64::consts::PI;

    #[test]
    fn unit_disk_area_and_spacing() {
        let m = build_mesh(&DomainSpec::unit_disk(), 0.05).unwrap();
        assert!((m.area() - PI).abs() / PI < 1e-3);
        assert!(m.h_max() <= 1.5 * 0.05);
        for &b in m.boundary_nodes() {
            let [x, y] = m.node(b);
            assert!((x.hypot(y) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn square_area_is_exact() {
        let m = build_mesh(&DomainSpec::rectangle(1.0, 1.0), 0.25).unwrap();
        assert!((m.area() - 1.0).abs() < 1e-14);
        assert!(m.h_max() <= 1.5 * 0.25);
    }

    #[test]
    fn disk_mesh_is_exactly_mirror_symmetric() {
        let m = build_mesh(&DomainSpec::ellipse(1.3, 0.8), 0.1).unwrap();
        let set: std::collections::HashSet<(u64, u64)> =
            m.nodes().iter().map(|p| (p[0].to_bits(), p[1].to_bits())).collect();
        for axis in [Axis::x_axis(), Axis::y_axis()] {
            for &p in m.nodes() {
                let r = axis.reflect(p);
                let key = ((r[0] + 0.0).to_bits(), (r[1] + 0.0).to_bits());
                assert!(set.contains(&key));
            }
        }
    }

    #[test]
    fn curved_area_error_drops_quadratically() {
        let m0 = build_mesh(&DomainSpec::unit_disk(), 0.1).unwrap();
        let m1 = m0.refine().unwrap();
        let m2 = m1.refine().unwrap();
        let e = [&m0, &m1, &m2].map(|m| (PI - m.area()).abs());
        for k in 0..2 {
            let ratio = e[k] / e[k + 1];
            assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
        }
        // boundary midpoints are projected, so halving is only approximate on curves
        assert!((m1.h_max() / m0.h_max() - 0.5).abs() < 0.05);
    }

    #[test]
    fn annulus_and_polygons() {
        let ann = build_mesh(&DomainSpec::annulus(0.5, 1.0), 0.1).unwrap();
        assert_eq!(ann.boundary_loops().len(), 2);
        let l_shape = vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]];
        let m = build_mesh(&DomainSpec::polygon(l_shape), 0.1).unwrap();
        assert!((m.area() - 3.0).abs() < 1e-12);
        assert!(m.h_max() <= 1.5 * 0.1);
        let r = m.refine().unwrap();
        assert!((r.h_max() - 0.5 * m.h_max()).abs() < 1e-12);
        let tri = vec![[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]];
        let m = build_mesh(&DomainSpec::polygon(tri), 0.08).unwrap();
        assert!((m.area() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_mesh(&DomainSpec::unit_disk(), 0.0).is_err());
        assert!(build_mesh(&DomainSpec::unit_disk(), 5.0).is_err());
        assert!(build_mesh(&DomainSpec::disk(-1.0), 0.1).is_err());
    }
}
