use std::collections::HashMap;

use super::quadrature::{GAUSS3, GAUSS_LEGENDRE5};
use super::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::{barycentric, Mesh, Point};

type Bary = [f64; 3];

/// Convex polygon `{interpolant > t}` inside one triangle, in barycentric coordinates.
fn clip_above(v: [f64; 3], t: f64) -> ([Bary; 4], usize) {
    let mut out = [[0.0; 3]; 4];
    let mut n = 0;
    for i in 0..3 {
        let j = (i + 1) % 3;
        let (ai, aj) = (v[i] > t, v[j] > t);
        if ai {
            let mut b = [0.0; 3];
            b[i] = 1.0;
            out[n] = b;
            n += 1;
        }
        if ai != aj {
            let s = (t - v[i]) / (v[j] - v[i]);
            let mut b = [0.0; 3];
            b[i] = 1.0 - s;
            b[j] = s;
            out[n] = b;
            n += 1;
        }
    }
    (out, n)
}

/// `∫ e^{scale·w}` over the convex barycentric polygon, relative to the triangle area.
fn polygon_exp(poly: &[Bary], wv: [f64; 3], scale: f64) -> f64 {
    let mut s = 0.0;
    for k in 1..poly.len().saturating_sub(1) {
        let (p0, p1, p2) = (poly[0], poly[k], poly[k + 1]);
        let det = ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0])).abs();
        if det == 0.0 {
            continue;
        }
        let mut q = 0.0;
        for (g, wt) in GAUSS3 {
            let b: Bary = std::array::from_fn(|c| g[0] * p0[c] + g[1] * p1[c] + g[2] * p2[c]);
            q += wt * (scale * (b[0] * wv[0] + b[1] * wv[1] + b[2] * wv[2])).exp();
        }
        s += det * q;
    }
    s
}

fn full_exp(wv: [f64; 3], scale: f64) -> f64 {
    GAUSS3.iter().map(|(b, wt)| wt * (scale * (b[0] * wv[0] + b[1] * wv[1] + b[2] * wv[2])).exp()).sum()
}

fn tri_values(u: &[f64], tri: [usize; 3]) -> [f64; 3] {
    [u[tri[0]], u[tri[1]], u[tri[2]]]
}

fn triangle_superlevel(area: f64, pv: [f64; 3], wv: [f64; 3], scale: f64, t: f64) -> f64 {
    let lo = pv[0].min(pv[1]).min(pv[2]);
    let hi = pv[0].max(pv[1]).max(pv[2]);
    if hi <= t {
        0.0
    } else if lo > t {
        area * full_exp(wv, scale)
    } else {
        let (poly, n) = clip_above(pv, t);
        area * polygon_exp(&poly[..n], wv, scale)
    }
}

/// `∫_{φ > t} e^w`, cutting triangles along the exact level segment of the interpolant.
pub fn superlevel_mass(phi: &ScalarField, w: &ScalarField, t: f64) -> Result<f64> {
    superlevel_mass_weighted(phi, w, 1.0, t)
}

/// `∫_{φ > t} e^{scale·w}`.
pub fn superlevel_mass_weighted(phi: &ScalarField, w: &ScalarField, scale: f64, t: f64) -> Result<f64> {
    phi.check_mesh(w)?;
    let mesh = phi.mesh();
    let mut total = 0.0;
    for (tri, &area) in mesh.triangles().iter().zip(mesh.areas()) {
        total += triangle_superlevel(area, tri_values(phi.values(), *tri), tri_values(w.values(), *tri), scale, t);
    }
    Ok(total)
}

/// `∫_{φ > t} e^{scale·w}` restricted to the listed triangles.
pub fn superlevel_mass_on(phi: &ScalarField, w: &ScalarField, scale: f64, t: f64, triangles: &[usize]) -> Result<f64> {
    phi.check_mesh(w)?;
    let mesh = phi.mesh();
    let mut total = 0.0;
    for &k in triangles {
        let tri = mesh.triangles()[k];
        total +=
            triangle_superlevel(mesh.areas()[k], tri_values(phi.values(), tri), tri_values(w.values(), tri), scale, t);
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Key {
    Vertex(usize),
    Edge(usize, usize),
}

/// Piece of a level line inside one triangle.
#[derive(Clone, Copy, Debug)]
pub struct LevelSegment {
    pub triangle: usize,
    pub a: Bary,
    pub b: Bary,
    /// `|∇φ|` on the triangle.
    pub gradient: f64,
    keys: [Key; 2],
}

impl LevelSegment {
    pub fn endpoints(&self, mesh: &Mesh) -> [Point; 2] {
        [mesh.point_at(self.triangle, self.a), mesh.point_at(self.triangle, self.b)]
    }

    pub fn length(&self, mesh: &Mesh) -> f64 {
        let [p, q] = self.endpoints(mesh);
        (p[0] - q[0]).hypot(p[1] - q[1])
    }
}

fn crossing_key(tri: [usize; 3], i: usize, j: usize, s: f64) -> Key {
    if s <= 0.0 {
        Key::Vertex(tri[i])
    } else if s >= 1.0 {
        Key::Vertex(tri[j])
    } else {
        Key::Edge(tri[i].min(tri[j]), tri[i].max(tri[j]))
    }
}

fn gradient_norm(mesh: &Mesh, t: usize, v: [f64; 3]) -> f64 {
    let g = mesh.hat_gradients(t);
    let gx = v[0] * g[0][0] + v[1] * g[1][0] + v[2] * g[2][0];
    let gy = v[0] * g[0][1] + v[1] * g[1][1] + v[2] * g[2][1];
    gx.hypot(gy)
}

/// All level segments of `{φ = t}`, each separating `{φ > t}` from `{φ ≤ t}`.
///
/// Fails with `PlateauAtLevel` when a triangle is flat at exactly `t`.
pub fn level_segments(phi: &ScalarField, t: f64) -> Result<Vec<LevelSegment>> {
    let mesh = phi.mesh();
    let mut out = Vec::new();
    for (k, &tri) in mesh.triangles().iter().enumerate() {
        let v = tri_values(phi.values(), tri);
        if v.iter().all(|&x| x == t) {
            return Err(Error::PlateauAtLevel(t));
        }
        let above = v.map(|x| x > t);
        if above.iter().all(|&a| a) || above.iter().all(|&a| !a) {
            continue;
        }
        let mut pts = Vec::with_capacity(2);
        for i in 0..3 {
            let j = (i + 1) % 3;
            if above[i] != above[j] {
                let s = (t - v[i]) / (v[j] - v[i]);
                let mut b = [0.0; 3];
                b[i] = 1.0 - s;
                b[j] = s;
                pts.push((b, crossing_key(tri, i, j, s)));
            }
        }
        debug_assert_eq!(pts.len(), 2);
        if pts[0].1 == pts[1].1 {
            continue;
        }
        out.push(LevelSegment {
            triangle: k,
            a: pts[0].0,
            b: pts[1].0,
            gradient: gradient_norm(mesh, k, v),
            keys: [pts[0].1, pts[1].1],
        });
    }
    Ok(out)
}

/// `∫_{φ=t} |∇φ| dσ` with per-triangle constant gradients.
pub fn coarea_flux(phi: &ScalarField, t: f64) -> Result<f64> {
    let mesh = phi.mesh();
    Ok(level_segments(phi, t)?.iter().map(|s| s.gradient * s.length(mesh)).sum())
}

/// `∫_{φ=t} e^w / |∇φ| dσ`, the rate `-dμ/dt` of the superlevel mass.
pub fn level_measure_derivative(phi: &ScalarField, w: &ScalarField, t: f64) -> Result<f64> {
    phi.check_mesh(w)?;
    let mesh = phi.mesh();
    let mut total = 0.0;
    for s in level_segments(phi, t)? {
        let len = s.length(mesh);
        let wa = w.eval_in(s.triangle, s.a);
        let wb = w.eval_in(s.triangle, s.b);
        let line: f64 = GAUSS_LEGENDRE5.iter().map(|&(x, g)| g * ((1.0 - x) * wa + x * wb).exp()).sum();
        total += len * line / s.gradient;
    }
    Ok(total)
}

/// Chain of points; segment `k` joins `points[k]` and `points[k + 1]`, plus the
/// closing segment when `closed`.
#[derive(Clone, Debug, Default)]
pub struct Polyline {
    pub points: Vec<Point>,
    pub closed: bool,
    /// Triangle holding each segment, when known (level lines); empty otherwise.
    pub triangles: Vec<usize>,
}

impl Polyline {
    pub fn new(points: Vec<Point>, closed: bool) -> Polyline {
        Polyline { points, closed, triangles: Vec::new() }
    }

    /// Boundary loops of the mesh as closed polylines.
    pub fn from_boundary(mesh: &Mesh) -> Vec<Polyline> {
        mesh.boundary_loops()
            .into_iter()
            .map(|lp| Polyline::new(lp.into_iter().map(|i| mesh.node(i)).collect(), true))
            .collect()
    }

    pub fn num_segments(&self) -> usize {
        match (self.points.len(), self.closed) {
            (0 | 1, _) => 0,
            (n, true) => n,
            (n, false) => n - 1,
        }
    }

    pub fn segment(&self, k: usize) -> [Point; 2] {
        [self.points[k], self.points[(k + 1) % self.points.len()]]
    }

    pub fn length(&self) -> f64 {
        (0..self.num_segments())
            .map(|k| {
                let [p, q] = self.segment(k);
                (p[0] - q[0]).hypot(p[1] - q[1])
            })
            .sum()
    }
}

/// Level lines `{φ = t}` chained into polylines. Lines that end on the boundary
/// come out open.
pub fn level_lines(phi: &ScalarField, t: f64) -> Result<Vec<Polyline>> {
    let mesh = phi.mesh();
    let segs = level_segments(phi, t)?;
    let mut incident: HashMap<Key, Vec<usize>> = HashMap::new();
    for (i, s) in segs.iter().enumerate() {
        incident.entry(s.keys[0]).or_default().push(i);
        incident.entry(s.keys[1]).or_default().push(i);
    }
    let mut used = vec![false; segs.len()];
    // open chains first, so that each starts at a loose end
    let mut order: Vec<usize> = (0..segs.len()).collect();
    let loose = |i: usize| segs[i].keys.iter().any(|k| incident[k].len() == 1);
    order.sort_by_key(|&i| (!loose(i), i));
    let mut lines = Vec::new();
    for &start in &order {
        if used[start] {
            continue;
        }
        used[start] = true;
        let s = &segs[start];
        let (first, mut end, first_pt, second_pt) = if incident[&s.keys[1]].len() == 1 {
            (s.keys[1], s.keys[0], s.b, s.a)
        } else {
            (s.keys[0], s.keys[1], s.a, s.b)
        };
        let mut points = vec![mesh.point_at(s.triangle, first_pt), mesh.point_at(s.triangle, second_pt)];
        let mut tris = vec![s.triangle];
        let mut closed = false;
        loop {
            if end == first {
                points.pop();
                closed = true;
                break;
            }
            let Some(&next) = incident[&end].iter().find(|&&i| !used[i]) else {
                break;
            };
            used[next] = true;
            let n = &segs[next];
            let (far, far_pt) = if n.keys[0] == end { (n.keys[1], n.b) } else { (n.keys[0], n.a) };
            points.push(mesh.point_at(n.triangle, far_pt));
            tris.push(n.triangle);
            end = far;
        }
        lines.push(Polyline { points, closed, triangles: tris });
    }
    Ok(lines)
}

/// `∫ e^{u/2} dσ` along a closed polyline.
pub fn boundary_exp_half_integral(u: &ScalarField, line: &Polyline) -> Result<f64> {
    if !line.closed || line.points.len() < 3 {
        return Err(Error::OpenPolyline);
    }
    let mesh = u.mesh();
    let known = line.triangles.len() == line.num_segments();
    let mut total = 0.0;
    for k in 0..line.num_segments() {
        let [p, q] = line.segment(k);
        let len = (p[0] - q[0]).hypot(p[1] - q[1]);
        let mut s = 0.0;
        for &(x, g) in &GAUSS_LEGENDRE5 {
            let pt = [p[0] + x * (q[0] - p[0]), p[1] + x * (q[1] - p[1])];
            let val = if known {
                let t = line.triangles[k];
                u.eval_in(t, barycentric(mesh.vertices(t), pt))
            } else {
                let (t, b) = mesh.locator().locate_nearest(mesh, pt);
                u.eval_in(t, b)
            };
            s += g * (0.5 * val).exp();
        }
        total += len * s;
    }
    Ok(total)
}

/// Discrete layer cake of `φ` under the measure `e^w dx`: `μ_k = ∫_{φ > t_k} e^w`
/// at the sorted distinct nodal values `t_k`.
#[derive(Clone, Debug)]
pub struct LayerCake {
    thresholds: Vec<f64>,
    masses: Vec<f64>,
    total: f64,
}

impl LayerCake {
    pub fn build(phi: &ScalarField, w: &ScalarField) -> Result<LayerCake> {
        phi.check_mesh(w)?;
        let mesh = phi.mesh();
        let mut thresholds: Vec<f64> = phi.values().to_vec();
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        let nk = thresholds.len();
        // full[k] collects triangles entirely above t_k, partial[k] the cut ones
        let mut full_diff = vec![0.0; nk + 1];
        let mut partial = vec![0.0; nk];
        let mut total = 0.0;
        for (tri, &area) in mesh.triangles().iter().zip(mesh.areas()) {
            let pv = tri_values(phi.values(), *tri);
            let wv = tri_values(w.values(), *tri);
            let whole = area * full_exp(wv, 1.0);
            total += whole;
            let lo = pv[0].min(pv[1]).min(pv[2]);
            let hi = pv[0].max(pv[1]).max(pv[2]);
            let first_cut = thresholds.partition_point(|&t| t < lo);
            full_diff[0] += whole;
            full_diff[first_cut] -= whole;
            let end = thresholds.partition_point(|&t| t < hi);
            for (k, slot) in partial.iter_mut().enumerate().take(end).skip(first_cut) {
                let (poly, n) = clip_above(pv, thresholds[k]);
                *slot += area * polygon_exp(&poly[..n], wv, 1.0);
            }
        }
        let mut masses = Vec::with_capacity(nk);
        let mut running = 0.0;
        for k in 0..nk {
            running += full_diff[k];
            masses.push((running + partial[k]).max(0.0));
        }
        for k in 1..nk {
            masses[k] = masses[k].min(masses[k - 1]);
        }
        Ok(LayerCake { thresholds, masses, total })
    }

    /// Ascending distinct nodal values.
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// `μ_k`, non-increasing.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// `∫ e^w` over the whole domain.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// `μ(t)`, linear between thresholds; the total below the minimum.
    pub fn mass_at(&self, t: f64) -> f64 {
        let th = &self.thresholds;
        if t < th[0] {
            return self.total;
        }
        let k = th.partition_point(|&x| x <= t);
        if k >= th.len() {
            return 0.0;
        }
        let (t0, t1) = (th[k - 1], th[k]);
        let s = (t - t0) / (t1 - t0);
        self.masses[k - 1] + s * (self.masses[k] - self.masses[k - 1])
    }

    /// Largest `t` with `μ(t) ≥ m`, by linear inversion.
    pub fn level_for_mass(&self, m: f64) -> f64 {
        let th = &self.thresholds;
        if m >= self.masses[0] {
            return th[0];
        }
        // masses are non-increasing; first index with μ_k < m
        let k = self.masses.partition_point(|&x| x >= m);
        if k >= th.len() {
            return th[th.len() - 1];
        }
        let (m0, m1) = (self.masses[k - 1], self.masses[k]);
        if m0 == m1 {
            return th[k - 1];
        }
        th[k - 1] + (m0 - m) / (m0 - m1) * (th[k] - th[k - 1])
    }
}

/// The `n` quantile levels of `φ` under `e^w dx` (masses `total·q/(n+1)`),
/// nudged by `1e-9·range` off the exact values. Ascending.
pub fn quantile_levels(cake: &LayerCake, n: usize) -> Vec<f64> {
    let th = cake.thresholds();
    let range = th[th.len() - 1] - th[0];
    let mut out: Vec<f64> =
        (1..=n).map(|q| cake.level_for_mass(cake.total() * q as f64 / (n + 1) as f64) + 1e-9 * range).collect();
    out.sort_by(f64::total_cmp);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn disk(h: f64) -> Arc<Mesh> {
        Arc::new(build_mesh(&DomainSpec::unit_disk(), h).unwrap())
    }

    #[test]
    fn superlevel_area_of_paraboloid() {
        let m = disk(0.025);
        let phi = ScalarField::from_fn(&m, |p| 1.0 - p[0] * p[0] - p[1] * p[1]).unwrap();
        let w = ScalarField::constant(&m, 0.0).unwrap();
        let a = superlevel_mass(&phi, &w, 0.5).unwrap();
        assert!((a - PI / 2.0).abs() < 1e-3, "{a}");
        assert_eq!(superlevel_mass(&phi, &w, 2.0).unwrap(), 0.0);
        let all = superlevel_mass(&phi, &w, -1.0).unwrap();
        assert!((all - w.weighted_mass(1.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn coarea_flux_of_paraboloid() {
        let m = disk(0.05);
        let phi = ScalarField::from_fn(&m, |p| 1.0 - p[0] * p[0] - p[1] * p[1]).unwrap();
        let f = coarea_flux(&phi, 0.75).unwrap();
        assert!((f - PI).abs() / PI < 2e-2, "{f}");
    }

    #[test]
    fn linear_field_flux_is_gradient_times_chord() {
        let sq = Arc::new(build_mesh(&DomainSpec::rectangle(1.0, 1.0), 0.1).unwrap());
        let phi = ScalarField::from_fn(&sq, |p| 3.0 * p[0] + 4.0 * p[1]).unwrap();
        // chord of 3x + 4y = 0.3 in [-1/2, 1/2]^2
        let f = coarea_flux(&phi, 0.3).unwrap();
        let lines = level_lines(&phi, 0.3).unwrap();
        assert_eq!(lines.len(), 1);
        assert!(!lines[0].closed);
        assert!((f - 5.0 * lines[0].length()).abs() < 1e-12);
        let (y0, y1) = ((0.3 + 1.5) / 4.0, (0.3 - 1.5) / 4.0);
        let chord = (1.0f64 + (y1 - y0) * (y1 - y0)).sqrt();
        assert!((lines[0].length() - chord).abs() < 1e-12);
    }

    #[test]
    fn plateau_is_reported() {
        let sq = Arc::new(build_mesh(&DomainSpec::rectangle(1.0, 1.0), 0.25).unwrap());
        let phi = ScalarField::constant(&sq, 1.0).unwrap();
        assert!(matches!(coarea_flux(&phi, 1.0), Err(Error::PlateauAtLevel(_))));
        assert_eq!(coarea_flux(&phi, 1.0 + 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn circle_level_line_is_closed() {
        let m = disk(0.05);
        let phi = ScalarField::from_fn(&m, |p| 1.0 - p[0] * p[0] - p[1] * p[1]).unwrap();
        let lines = level_lines(&phi, 0.75).unwrap();
        assert_eq!(lines.len(), 1);
        assert!(lines[0].closed);
        assert!((lines[0].length() - PI).abs() < 1e-2);
        let zero = ScalarField::constant(&m, 0.0).unwrap();
        let l = boundary_exp_half_integral(&zero, &lines[0]).unwrap();
        assert!((l - lines[0].length()).abs() < 1e-12);
    }

    #[test]
    fn exp_half_integral_on_boundaries() {
        let m = Arc::new(build_mesh(&DomainSpec::unit_disk(), 0.01).unwrap());
        let zero = ScalarField::constant(&m, 0.0).unwrap();
        let b = &Polyline::from_boundary(&m)[0];
        assert!((boundary_exp_half_integral(&zero, b).unwrap() - 2.0 * PI).abs() < 1e-3);
        let sq = Arc::new(build_mesh(&DomainSpec::rectangle(1.0, 1.0), 0.1).unwrap());
        let u = ScalarField::constant(&sq, 2.0 * 3f64.ln()).unwrap();
        let b = &Polyline::from_boundary(&sq)[0];
        assert!((boundary_exp_half_integral(&u, b).unwrap() - 12.0).abs() < 1e-10);
        let open = Polyline::new(vec![[0.0, 0.0], [0.1, 0.0], [0.1, 0.1]], false);
        assert!(matches!(boundary_exp_half_integral(&u, &open), Err(Error::OpenPolyline)));
    }

    #[test]
    fn layer_cake_matches_direct_superlevel_masses() {
        let m = disk(0.1);
        let phi = ScalarField::from_fn(&m, |p| (1.0 - p[0] * p[0] - p[1] * p[1]) + 0.2 * p[1]).unwrap();
        let w = ScalarField::from_fn(&m, |p| 0.5 * p[0]).unwrap();
        let cake = LayerCake::build(&phi, &w).unwrap();
        assert!((cake.total() - w.weighted_mass(1.0).unwrap()).abs() < 1e-12);
        for (k, &t) in cake.thresholds().iter().enumerate().step_by(7) {
            let direct = superlevel_mass(&phi, &w, t).unwrap();
            assert!((cake.masses()[k] - direct).abs() < 1e-10 * cake.total(), "{k}");
        }
        assert!(cake.masses().windows(2).all(|p| p[1] <= p[0]));
        let levels = quantile_levels(&cake, 64);
        assert_eq!(levels.len(), 64);
        assert!(levels.windows(2).all(|p| p[0] <= p[1]));
        for (q, &t) in levels.iter().rev().enumerate() {
            let want = cake.total() * (q + 1) as f64 / 65.0;
            assert!((superlevel_mass(&phi, &w, t).unwrap() - want).abs() < 2e-2 * cake.total());
        }
    }

    #[test]
    fn measure_derivative_matches_finite_difference() {
        let m = disk(0.05);
        let phi = ScalarField::from_fn(&m, |p| 1.0 - p[0] * p[0] - p[1] * p[1]).unwrap();
        let w = ScalarField::from_fn(&m, |p| 0.3 * p[0]).unwrap();
        let t = 0.4;
        let d = 1e-3;
        let fd = (superlevel_mass(&phi, &w, t - d).unwrap() - superlevel_mass(&phi, &w, t + d).unwrap()) / (2.0 * d);
        let exact = level_measure_derivative(&phi, &w, t).unwrap();
        assert!((fd - exact).abs() / exact < 1e-2, "{fd} {exact}");
    }
}
