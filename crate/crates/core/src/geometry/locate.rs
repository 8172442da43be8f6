use super::mesh::Mesh;
use super::Point;

/// Uniform bucket grid over triangle bounding boxes.
#[derive(Debug)]
pub struct Locator {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

const BARY_TOL: f64 = 1e-10;

pub(crate) fn barycentric(tri: [Point; 3], p: Point) -> [f64; 3] {
    let [a, b, c] = tri;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (p[1] - a[1]) * (c[0] - a[0])) / det;
    let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / det;
    [1.0 - l1 - l2, l1, l2]
}

impl Locator {
    pub fn new(mesh: &Mesh) -> Locator {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in mesh.nodes() {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let cell = mesh.h_max().max(1e-12);
        let nx = (((hi[0] - lo[0]) / cell).ceil() as usize).max(1);
        let ny = (((hi[1] - lo[1]) / cell).ceil() as usize).max(1);
        let mut loc = Locator { origin: lo, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] };
        for t in 0..mesh.num_triangles() {
            let v = mesh.vertices(t);
            let (mut tlo, mut thi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for p in v {
                for k in 0..2 {
                    tlo[k] = tlo[k].min(p[k]);
                    thi[k] = thi[k].max(p[k]);
                }
            }
            let (i0, j0) = loc.cell_of(tlo);
            let (i1, j1) = loc.cell_of(thi);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.buckets[j * nx + i].push(t);
                }
            }
        }
        loc
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let fx = ((p[0] - self.origin[0]) / self.cell).floor();
        let fy = ((p[1] - self.origin[1]) / self.cell).floor();
        let i = fx.clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = fy.clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }

    /// Triangle containing `p` with its barycentric coordinates, or `None` outside the mesh.
    pub fn locate(&self, mesh: &Mesh, p: Point) -> Option<(usize, [f64; 3])> {
        let (i, j) = self.cell_of(p);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.buckets[j * self.nx + i] {
            let b = barycentric(mesh.vertices(t), p);
            let worst = b[0].min(b[1]).min(b[2]);
            if worst >= 0.0 {
                return Some((t, b));
            }
            if worst >= -BARY_TOL && best.as_ref().is_none_or(|x| worst > x.2) {
                best = Some((t, b, worst));
            }
        }
        best.map(|(t, b, _)| (t, clamp_bary(b)))
    }

    /// Like [`Locator::locate`], but points slightly outside the mesh (a curved
    /// boundary cutting between nodes) snap to the closest triangle.
    pub fn locate_nearest(&self, mesh: &Mesh, p: Point) -> (usize, [f64; 3]) {
        if let Some(hit) = self.locate(mesh, p) {
            return hit;
        }
        let (ci, cj) = self.cell_of(p);
        let mut best = (usize::MAX, [0.0; 3], f64::NEG_INFINITY);
        let mut radius = 1usize;
        loop {
            let (i0, i1) = (ci.saturating_sub(radius), (ci + radius).min(self.nx - 1));
            let (j0, j1) = (cj.saturating_sub(radius), (cj + radius).min(self.ny - 1));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    for &t in &self.buckets[j * self.nx + i] {
                        let b = barycentric(mesh.vertices(t), p);
                        let worst = b[0].min(b[1]).min(b[2]);
                        if worst > best.2 {
                            best = (t, b, worst);
                        }
                    }
                }
            }
            let covers_all = i0 == 0 && j0 == 0 && i1 == self.nx - 1 && j1 == self.ny - 1;
            if best.0 != usize::MAX || covers_all {
                break;
            }
            radius *= 2;
        }
        (best.0, clamp_bary(best.1))
    }
}

fn clamp_bary(b: [f64; 3]) -> [f64; 3] {
    let c = b.map(|x| x.max(0.0));
    let s = c[0] + c[1] + c[2];
    c.map(|x| x / s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locates_points_and_snaps_outside_ones() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let m = Mesh::from_parts(nodes, vec![[0, 1, 2], [0, 2, 3]], None).unwrap();
        let (t, b) = m.locator().locate(&m, [0.75, 0.25]).unwrap();
        assert_eq!(t, 0);
        let p = m.point_at(t, b);
        assert!((p[0] - 0.75).abs() < 1e-14 && (p[1] - 0.25).abs() < 1e-14);
        assert!(m.locator().locate(&m, [1.5, 0.5]).is_none());
        let (_, b) = m.locator().locate_nearest(&m, [1.0 + 1e-6, 0.5]);
        assert!(b.iter().all(|&x| x >= 0.0));
    }
}
