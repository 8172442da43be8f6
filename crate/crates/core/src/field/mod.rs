//! Scalar fields on meshes: integrals, level sets, rearrangement data and symmetry.

mod level;
mod quadrature;
mod symmetry;

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Mesh, Point};

pub use level::{
    boundary_exp_half_integral, coarea_flux, level_lines, level_measure_derivative, level_segments, quantile_levels,
    superlevel_mass, superlevel_mass_on, superlevel_mass_weighted, LayerCake, LevelSegment, Polyline,
};
pub use quadrature::{QuadPoints, DUNAVANT7, GAUSS3, GAUSS_LEGENDRE5};
pub use symmetry::{reflected, symmetry_defect};

/// Largest exponent accepted before `exp` is considered an overflow.
pub const EXP_LIMIT: f64 = 700.0;

/// Nodal values of a piecewise-linear function on a shared mesh.
#[derive(Clone, Debug)]
pub struct ScalarField {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

/// Serialized form of a field. The mesh is referenced by its digest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSnapshot {
    #[serde(rename = "mesh-ref")]
    pub mesh_ref: String,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != mesh.num_nodes() {
            return Err(Error::FieldSize { expected: mesh.num_nodes(), got: values.len() });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Ok(ScalarField { mesh, values })
    }

    pub fn from_fn(mesh: &Arc<Mesh>, f: impl Fn(Point) -> f64) -> Result<ScalarField> {
        let values = mesh.nodes().iter().map(|&p| f(p)).collect();
        ScalarField::new(mesh.clone(), values)
    }

    pub fn constant(mesh: &Arc<Mesh>, c: f64) -> Result<ScalarField> {
        ScalarField::new(mesh.clone(), vec![c; mesh.num_nodes()])
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Same mesh (by pointer or by content).
    pub fn same_mesh(&self, other: &ScalarField) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh)
            || (self.mesh.nodes() == other.mesh.nodes() && self.mesh.triangles() == other.mesh.triangles())
    }

    pub(crate) fn check_mesh(&self, other: &ScalarField) -> Result<()> {
        if self.same_mesh(other) {
            Ok(())
        } else {
            Err(Error::MeshMismatch)
        }
    }

    /// Pointwise map into a new field on the same mesh.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ScalarField> {
        ScalarField::new(self.mesh.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two fields.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        self.check_mesh(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        ScalarField::new(self.mesh.clone(), values)
    }

    /// Linear interpolant at a point; `None` outside the mesh.
    pub fn eval(&self, p: Point) -> Option<f64> {
        let (t, b) = self.mesh.locator().locate(&self.mesh, p)?;
        Some(self.eval_in(t, b))
    }

    /// Linear interpolant at barycentric coordinates of triangle `t`.
    pub fn eval_in(&self, t: usize, bary: [f64; 3]) -> f64 {
        let tri = self.mesh.triangles()[t];
        bary[0] * self.values[tri[0]] + bary[1] * self.values[tri[1]] + bary[2] * self.values[tri[2]]
    }

    /// `∫ u`, exact for the interpolant.
    pub fn integral(&self) -> f64 {
        self.mesh
            .triangles()
            .iter()
            .zip(self.mesh.areas())
            .map(|(tri, a)| a * (self.values[tri[0]] + self.values[tri[1]] + self.values[tri[2]]) / 3.0)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.mesh.area()
    }

    /// `‖u‖_{L²}`, exact for the interpolant.
    pub fn l2_norm(&self) -> f64 {
        l2_norm(&self.mesh, &self.values)
    }

    /// `∫ e^{scale·u}` with the 3-point rule.
    pub fn weighted_mass(&self, scale: f64) -> Result<f64> {
        let top = self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(scale * v));
        if top > EXP_LIMIT {
            return Err(Error::Overflow(top));
        }
        let mut total = 0.0;
        for (tri, &area) in self.mesh.triangles().iter().zip(self.mesh.areas()) {
            let v = [self.values[tri[0]], self.values[tri[1]], self.values[tri[2]]];
            let mut s = 0.0;
            for (b, w) in GAUSS3 {
                s += w * (scale * (b[0] * v[0] + b[1] * v[1] + b[2] * v[2])).exp();
            }
            total += area * s;
        }
        Ok(total)
    }

    pub fn snapshot(&self) -> FieldSnapshot {
        FieldSnapshot { mesh_ref: self.mesh.digest(), values: self.values.clone() }
    }

    /// Rebuilds a field from a snapshot; the mesh digest must match.
    pub fn from_snapshot(mesh: &Arc<Mesh>, snap: &FieldSnapshot) -> Result<ScalarField> {
        if snap.mesh_ref != mesh.digest() {
            return Err(Error::MeshMismatch);
        }
        ScalarField::new(mesh.clone(), snap.values.clone())
    }

    /// `node,x,y,value` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,x,y,value\n");
        for (i, (p, v)) in self.mesh.nodes().iter().zip(&self.values).enumerate() {
            let _ = writeln!(out, "{i},{},{},{}", p[0], p[1], v);
        }
        out
    }
}

pub(crate) fn l2_norm(mesh: &Mesh, u: &[f64]) -> f64 {
    let mut s = 0.0;
    for (tri, &area) in mesh.triangles().iter().zip(mesh.areas()) {
        let (a, b, c) = (u[tri[0]], u[tri[1]], u[tri[2]]);
        s += area / 6.0 * (a * a + b * b + c * c + a * b + b * c + c * a);
    }
    s.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec};
    use std::f64::consts::PI;

    #[test]
    fn masses_of_constants() {
        let disk = Arc::new(build_mesh(&DomainSpec::unit_disk(), 0.05).unwrap());
        let zero = ScalarField::constant(&disk, 0.0).unwrap();
        assert!((zero.weighted_mass(1.0).unwrap() - PI).abs() / PI < 1e-3);
        let sq = Arc::new(build_mesh(&DomainSpec::rectangle(1.0, 1.0), 0.1).unwrap());
        let u = ScalarField::constant(&sq, 2f64.ln()).unwrap();
        assert!((u.weighted_mass(1.0).unwrap() - 2.0).abs() < 1e-10);
        let big = ScalarField::constant(&sq, 400.0).unwrap();
        assert!(matches!(big.weighted_mass(2.0), Err(Error::Overflow(_))));
    }

    #[test]
    fn bubble_mass_on_a_disk_of_radius_two() {
        let m = Arc::new(build_mesh(&DomainSpec::disk(2.0), 0.05).unwrap());
        let u = ScalarField::from_fn(&m, |p| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            -2.0 * (1.0 + 4.0 * r2 / 8.0).ln() + 2.0 * 2f64.ln()
        })
        .unwrap();
        let exact = 16.0 * PI / 3.0;
        assert!((u.weighted_mass(1.0).unwrap() - exact).abs() / exact < 1e-3);
    }

    #[test]
    fn rejects_bad_sizes_and_values() {
        let m = Arc::new(build_mesh(&DomainSpec::unit_disk(), 0.3).unwrap());
        assert!(matches!(ScalarField::new(m.clone(), vec![0.0; 2]), Err(Error::FieldSize { .. })));
        let mut v = vec![0.0; m.num_nodes()];
        v[1] = f64::NAN;
        assert!(matches!(ScalarField::new(m, v), Err(Error::NonFinite { node: 1 })));
    }

    #[test]
    fn snapshot_round_trip_and_csv() {
        let m = Arc::new(build_mesh(&DomainSpec::unit_disk(), 0.3).unwrap());
        let u = ScalarField::from_fn(&m, |p| p[0] - p[1]).unwrap();
        let snap = u.snapshot();
        let json = serde_json::to_string(&snap).unwrap();
        assert!(json.contains("\"mesh-ref\""));
        let back: FieldSnapshot = serde_json::from_str(&json).unwrap();
        let v = ScalarField::from_snapshot(&m, &back).unwrap();
        assert_eq!(v.values(), u.values());
        let csv = u.to_csv();
        assert!(csv.starts_with("node,x,y,value\n"));
        assert_eq!(csv.lines().count(), m.num_nodes() + 1);
    }

    #[test]
    fn l2_norm_of_linear_field_is_exact() {
        let sq = Arc::new(build_mesh(&DomainSpec::rectangle(1.0, 1.0), 0.1).unwrap());
        let u = ScalarField::from_fn(&sq, |p| p[0]).unwrap();
        assert!((u.l2_norm() - (1.0f64 / 12.0).sqrt()).abs() < 1e-12);
    }
}
