use std::f64::consts::PI;
use std::sync::Arc;

use liouville_core::comparison::{rearrange, BubbleParam};
use liouville_core::field::ScalarField;
use liouville_core::geometry::{build_mesh, DomainSpec, Mesh};

/// Radius of the ball where `∫ e^{U_λ} = m`, from `m(r) = 8π λ² r² / (8 + λ² r²)`.
fn bubble_radius(lambda: f64, m: f64) -> f64 {
    (8.0 * m / (lambda * lambda * (8.0 * PI - m))).sqrt()
}

/// Area of `{φ > t}` for the P1 interpolant, by counting sub-triangle centroids
/// on an `n × n` barycentric grid of every triangle.
fn brute_superlevel_area(phi: &ScalarField, t: f64, n: usize) -> f64 {
    let mesh = phi.mesh();
    let v = phi.values();
    let mut area = 0.0;
    for (tri, &a) in mesh.triangles().iter().zip(mesh.areas()) {
        let cell = a / (n * n) as f64;
        let f = |b0: f64, b1: f64| {
            let b2 = 1.0 - b0 - b1;
            b0 * v[tri[0]] + b1 * v[tri[1]] + b2 * v[tri[2]]
        };
        for i in 0..n {
            for j in 0..n - i {
                let (x, y) = (i as f64, j as f64);
                let nf = n as f64;
                // upright cell, then the inverted one next to it
                if f((x + 1.0 / 3.0) / nf, (y + 1.0 / 3.0) / nf) > t {
                    area += cell;
                }
                if i + j + 1 < n && f((x + 2.0 / 3.0) / nf, (y + 2.0 / 3.0) / nf) > t {
                    area += cell;
                }
            }
        }
    }
    area
}

/// Square `[-1, 1]²` split into eight triangles around the center.
fn fan_square() -> Arc<Mesh> {
    let ring = [[1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [-1.0, 1.0], [-1.0, 0.0], [-1.0, -1.0], [0.0, -1.0], [1.0, -1.0]];
    let mut nodes = vec![[0.0, 0.0]];
    nodes.extend(ring);
    let triangles = (0..8).map(|i| [0, 1 + i, 1 + (i + 1) % 8]).collect();
    Arc::new(Mesh::from_parts(nodes, triangles, None).unwrap())
}

#[test]
fn four_level_staircase_matches_brute_force() {
    let mesh = fan_square();
    assert_eq!(mesh.num_triangles(), 8);
    // center 3, two edge midpoints at 2, two at 1, corners 0
    let levels = [3.0, 2.0, 0.0, 2.0, 0.0, 1.0, 0.0, 1.0, 0.0];
    let phi = ScalarField::new(mesh.clone(), levels.to_vec()).unwrap();
    let w = ScalarField::constant(&mesh, 0.0).unwrap();
    let lambda = 1.3;
    let star = rearrange(&phi, &w, lambda).unwrap();
    assert!(star.is_nonincreasing_profile());
    assert!((star.outer_radius() - bubble_radius(lambda, 4.0)).abs() < 1e-9);
    for t in [0.0, 1.0, 2.0] {
        let area = brute_superlevel_area(&phi, t, 300);
        let r = bubble_radius(lambda, area);
        let got = star.crossing_radius(t);
        assert!((got - r).abs() < 2e-3 * r, "t={t}: {got} vs {r}");
    }
    assert_eq!(star.value_at(0.0), 3.0);
}

#[test]
fn linear_field_on_a_rectangle_has_closed_form_levels() {
    let mesh = Arc::new(build_mesh(&DomainSpec::rectangle(2.0, 1.0), 0.1).unwrap());
    let xs = mesh.nodes().iter().map(|p| p[0]);
    let (x0, x1) = xs.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let ys = mesh.nodes().iter().map(|p| p[1]);
    let (y0, y1) = ys.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let phi = ScalarField::from_fn(&mesh, |p| p[0] - x0).unwrap();
    let w = ScalarField::constant(&mesh, 0.0).unwrap();
    let lambda = 0.7;
    let star = rearrange(&phi, &w, lambda).unwrap();
    let width = x1 - x0;
    // the layer masses are exact at the nodal values; in between the profile
    // is only interpolated
    let mut th: Vec<f64> = phi.values().to_vec();
    th.sort_by(f64::total_cmp);
    th.dedup();
    let mut checked = 0;
    for &t in th.iter().step_by(3) {
        if t >= width - 1e-9 {
            continue;
        }
        // {x - x0 > t} is a strip of area (width - t)·height
        let r = bubble_radius(lambda, (width - t) * (y1 - y0));
        let got = star.crossing_radius(t);
        assert!((got - r).abs() < 1e-9 * r, "t={t}: {got} vs {r}");
        checked += 1;
    }
    assert!(checked >= 5);
}

#[test]
fn weighted_rearrangement_conserves_mass() {
    let mesh = Arc::new(build_mesh(&DomainSpec::unit_disk(), 0.1).unwrap());
    let phi = ScalarField::from_fn(&mesh, |p| 1.0 - p[0] * p[0] - 0.5 * p[1] * p[1] + 0.1 * p[1]).unwrap();
    let w = ScalarField::from_fn(&mesh, |p| 0.5 * p[0] - 0.3).unwrap();
    let lambda = 1.0;
    let star = rearrange(&phi, &w, lambda).unwrap();
    let total = w.weighted_mass(1.0).unwrap();
    let b = BubbleParam::new(lambda).unwrap();
    assert!((b.mass(star.outer_radius()) - total).abs() < 1e-9 * total);
    assert!(star.is_nonincreasing_profile());
    assert!((star.value_at(0.0) - phi.max()).abs() < 1e-12);
}
