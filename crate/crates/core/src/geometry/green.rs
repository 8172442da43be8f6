use std::f64::consts::PI;
use std::sync::Arc;

use super::domain::Shape;
use super::mesh::Mesh;
use super::Point;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::solver::DiscreteOperator;

/// Dirichlet Green's function `G(x) = -ln|x - p| / (2π) + H(x)` with pole `p`.
///
/// Only the smooth regular part `H` is stored at the nodes.
#[derive(Clone, Debug)]
pub struct GreenFunction {
    mesh: Arc<Mesh>,
    pole: Point,
    regular: Vec<f64>,
    disk: Option<f64>,
}

fn free_space(x: Point, p: Point) -> f64 {
    -((x[0] - p[0]).hypot(x[1] - p[1])).ln() / (2.0 * PI)
}

fn check_pole(mesh: &Mesh, pole: Point) -> Result<()> {
    let inside = match mesh.domain() {
        Some(d) => d.contains(pole),
        None => mesh.locator().locate(mesh, pole).is_some(),
    };
    let clear =
        mesh.boundary_nodes().iter().all(|&b| (mesh.node(b)[0] - pole[0]).hypot(mesh.node(b)[1] - pole[1]) > 1e-12);
    if inside && clear && pole.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::PoleOnBoundary(pole))
    }
}

/// Green's function of the mesh domain. Disks use the closed form (image charge);
/// every other shape solves a discrete Laplace problem for the regular part.
pub fn green_function(mesh: &Arc<Mesh>, pole: Point) -> Result<GreenFunction> {
    check_pole(mesh, pole)?;
    let radius = match mesh.domain().map(|d| &d.shape) {
        Some(Shape::UnitDisk) => Some(1.0),
        Some(Shape::Disk { radius }) => Some(*radius),
        _ => None,
    };
    match radius {
        Some(r) => {
            let regular = mesh.nodes().iter().map(|&x| disk_regular(r, pole, x)).collect();
            Ok(GreenFunction { mesh: mesh.clone(), pole, regular, disk: Some(r) })
        }
        None => green_function_numeric(mesh, pole),
    }
}

/// Numerical branch on any mesh: `H` is the discrete harmonic function with
/// `H = ln|x - p| / (2π)` on the boundary.
pub fn green_function_numeric(mesh: &Arc<Mesh>, pole: Point) -> Result<GreenFunction> {
    check_pole(mesh, pole)?;
    let op = DiscreteOperator::assemble(mesh.clone())?;
    let boundary: Vec<f64> = mesh.nodes().iter().map(|&x| -free_space(x, pole)).collect();
    let mut bvals = vec![0.0; mesh.num_nodes()];
    for &b in mesh.boundary_nodes() {
        bvals[b] = boundary[b];
    }
    let regular = op.solve_dirichlet(&vec![0.0; mesh.num_nodes()], &bvals)?;
    Ok(GreenFunction { mesh: mesh.clone(), pole, regular, disk: None })
}

/// Cross-check variant: the Dirac mass is lumped onto the node nearest the pole
/// and `K G = e_k` is solved directly. Returns nodal values of `G` itself.
pub fn green_function_lumped(mesh: &Arc<Mesh>, pole: Point) -> Result<Vec<f64>> {
    check_pole(mesh, pole)?;
    let op = DiscreteOperator::assemble(mesh.clone())?;
    let mut load = vec![0.0; mesh.num_nodes()];
    load[mesh.nearest_node(pole)] = 1.0;
    op.solve_dirichlet(&load, &vec![0.0; mesh.num_nodes()])
}

fn disk_regular(r: f64, p: Point, x: Point) -> f64 {
    let pn = p[0].hypot(p[1]);
    if pn == 0.0 {
        return r.ln() / (2.0 * PI);
    }
    let s = r * r / (pn * pn);
    let image = [p[0] * s, p[1] * s];
    (pn / r * (x[0] - image[0]).hypot(x[1] - image[1])).ln() / (2.0 * PI)
}

impl GreenFunction {
    pub fn pole(&self) -> Point {
        self.pole
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    /// True when the closed form is used.
    pub fn analytic(&self) -> bool {
        self.disk.is_some()
    }

    /// Nodal values of the regular part `H`.
    pub fn regular(&self) -> &[f64] {
        &self.regular
    }

    /// Regular part at an arbitrary point of the domain.
    pub fn regular_at(&self, x: Point) -> f64 {
        match self.disk {
            Some(r) => disk_regular(r, self.pole, x),
            None => {
                let (t, b) = self.mesh.locator().locate_nearest(&self.mesh, x);
                let tri = self.mesh.triangles()[t];
                (0..3).map(|k| b[k] * self.regular[tri[k]]).sum()
            }
        }
    }

    /// `G(x)`; infinite at the pole.
    pub fn value_at(&self, x: Point) -> f64 {
        free_space(x, self.pole) + self.regular_at(x)
    }

    /// Nodal values of `G`. A node sitting on the pole gets `+∞`.
    pub fn nodal_values(&self) -> Vec<f64> {
        self.mesh.nodes().iter().zip(&self.regular).map(|(&x, &h)| free_space(x, self.pole) + h).collect()
    }

    /// Nodal `G` with the pole node replaced by the regular limit `H(p)`, so the
    /// field stays finite.
    pub fn nodal_finite(&self) -> Vec<f64> {
        self.nodal_values().into_iter().zip(&self.regular).map(|(v, &h)| if v.is_finite() { v } else { h }).collect()
    }

    /// Weight `e^{-4π s G(x)} = |x - p|^{2s} e^{-4π s H(x)}` at a point.
    pub fn weight_at(&self, strength: f64, x: Point) -> f64 {
        if strength == 0.0 {
            return 1.0;
        }
        let d = (x[0] - self.pole[0]).hypot(x[1] - self.pole[1]);
        d.powf(2.0 * strength) * (-4.0 * PI * strength * self.regular_at(x)).exp()
    }
}

/// Nodal field `h = e^{-4π·strength·G}`: zero at a pole node, one on the boundary.
pub fn singular_weight(g: &GreenFunction, strength: f64) -> Result<ScalarField> {
    if !(strength >= 0.0 && strength.is_finite()) {
        return Err(Error::NegativeStrength(strength));
    }
    let mesh = g.mesh();
    let values = mesh
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if mesh.is_boundary(i) {
                1.0
            } else if strength == 0.0 {
                1.0
            } else {
                let d = (x[0] - g.pole[0]).hypot(x[1] - g.pole[1]);
                d.powf(2.0 * strength) * (-4.0 * PI * strength * g.regular[i]).exp()
            }
        })
        .collect();
    ScalarField::new(mesh.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, build_refined, DomainSpec};

    #[test]
    fn unit_disk_closed_form() {
        let m = Arc::new(build_mesh(&DomainSpec::unit_disk(), 0.1).unwrap());
        let g = green_function(&m, [0.0, 0.0]).unwrap();
        assert!(g.analytic());
        assert_eq!(g.value_at([1.0, 0.0]), 0.0);
        assert!((g.value_at([0.5, 0.0]) - 2f64.ln() / (2.0 * PI)).abs() < 1e-15);
        assert!((g.value_at([0.5, 0.0]) - 0.110318).abs() < 1e-6);
        let off = green_function(&m, [0.3, -0.2]).unwrap();
        for &b in m.boundary_nodes() {
            assert!(off.value_at(m.node(b)).abs() < 1e-12);
        }
        assert!(green_function(&m, [1.0, 0.0]).is_err());
    }

    #[test]
    fn numeric_branch_matches_closed_form_away_from_pole() {
        let m = Arc::new(build_refined(&DomainSpec::unit_disk(), 0.05, 1).unwrap());
        let exact = green_function(&m, [0.0, 0.0]).unwrap();
        let num = green_function_numeric(&m, [0.0, 0.0]).unwrap();
        assert!(!num.analytic());
        let lumped = green_function_lumped(&m, [0.0, 0.0]).unwrap();
        let mut worst: f64 = 0.0;
        let mut worst_lumped: f64 = 0.0;
        for (i, &x) in m.nodes().iter().enumerate() {
            if x[0].hypot(x[1]) >= 0.1 {
                worst = worst.max((num.value_at(x) - exact.value_at(x)).abs());
                worst_lumped = worst_lumped.max((lumped[i] - exact.value_at(x)).abs());
            }
        }
        assert!(worst < 1e-3, "{worst}");
        assert!(worst_lumped < 1e-3, "{worst_lumped}");
    }

    #[test]
    fn square_green_is_positive() {
        let m = Arc::new(build_mesh(&DomainSpec::rectangle(1.0, 1.0), 0.05).unwrap());
        let g = green_function(&m, [0.0, 0.0]).unwrap();
        let vals = g.nodal_values();
        for i in m.interior_nodes() {
            assert!(vals[i] > 0.0);
        }
        for &b in m.boundary_nodes() {
            assert!(vals[b].abs() < 1e-12);
        }
    }

    #[test]
    fn weight_on_the_unit_disk_is_a_power() {
        let m = Arc::new(build_mesh(&DomainSpec::unit_disk(), 0.1).unwrap());
        let g = green_function(&m, [0.0, 0.0]).unwrap();
        assert_eq!(g.weight_at(0.0, [0.3, 0.1]), 1.0);
        assert!((g.weight_at(1.0, [0.5, 0.0]) - 0.25).abs() < 1e-15);
        let h = singular_weight(&g, 1.5).unwrap();
        for (i, &x) in m.nodes().iter().enumerate() {
            let r = x[0].hypot(x[1]);
            assert!((h.values()[i] - r.powi(3)).abs() < 1e-14);
        }
        let ones = singular_weight(&g, 0.0).unwrap();
        assert!(ones.values().iter().all(|&v| v == 1.0));
        assert!(singular_weight(&g, -1.0).is_err());
    }
}
