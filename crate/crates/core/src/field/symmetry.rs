use super::{l2_norm, ScalarField};
use crate::error::{Error, Result};
use crate::geometry::Axis;

/// `u∘R` at the nodes, where `R` is the reflection about `axis`.
///
/// Reflected nodes that fall slightly outside a polygonal approximation of a
/// curved boundary snap to the nearest triangle; anything farther than half an
/// element is an `AsymmetricDomain` error.
pub fn reflected(u: &ScalarField, axis: &Axis) -> Result<Vec<f64>> {
    let mesh = u.mesh();
    let tol = 0.5 * mesh.h_max();
    let locator = mesh.locator();
    let mut out = Vec::with_capacity(mesh.num_nodes());
    for (i, &p) in mesh.nodes().iter().enumerate() {
        let q = axis.reflect(p);
        let (t, b) = match locator.locate(mesh, q) {
            Some(hit) => hit,
            None => {
                let (t, b) = locator.locate_nearest(mesh, q);
                let s = mesh.point_at(t, b);
                let distance = (s[0] - q[0]).hypot(s[1] - q[1]);
                if distance > tol {
                    return Err(Error::AsymmetricDomain { node: i, distance });
                }
                (t, b)
            }
        };
        out.push(u.eval_in(t, b));
    }
    Ok(out)
}

/// `‖u − u∘R‖ / max(‖u‖, 1e-12)` in `L²`.
pub fn symmetry_defect(u: &ScalarField, axis: &Axis) -> Result<f64> {
    let mesh = u.mesh();
    if let Some(d) = mesh.domain() {
        if !d.is_symmetric_about(axis) {
            return Err(Error::AsymmetricDomain { node: 0, distance: f64::NAN });
        }
    }
    let r = reflected(u, axis)?;
    let diff: Vec<f64> = u.values().iter().zip(&r).map(|(a, b)| a - b).collect();
    Ok(l2_norm(mesh, &diff) / u.l2_norm().max(1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec};
    use std::sync::Arc;

    #[test]
    fn odd_field_has_defect_two() {
        let m = Arc::new(build_mesh(&DomainSpec::unit_disk(), 0.05).unwrap());
        let u = ScalarField::from_fn(&m, |p| p[1]).unwrap();
        let d = symmetry_defect(&u, &Axis::x_axis()).unwrap();
        assert!((d - 2.0).abs() < 1e-2, "{d}");
        let c = ScalarField::constant(&m, 3.0).unwrap();
        assert_eq!(symmetry_defect(&c, &Axis::x_axis()).unwrap(), 0.0);
    }

    #[test]
    fn radial_field_is_symmetric_about_any_diameter() {
        let m = Arc::new(build_mesh(&DomainSpec::unit_disk(), 0.05).unwrap());
        let u = ScalarField::from_fn(&m, |p| (1.0 - p[0] * p[0] - p[1] * p[1]).exp()).unwrap();
        for theta in [0.0, 0.3, 1.0, std::f64::consts::FRAC_PI_2] {
            let d = symmetry_defect(&u, &Axis::through_origin(theta)).unwrap();
            assert!(d < 1e-3, "{theta} {d}");
        }
        // the reflection difference itself ignores added constants
        let shifted = u.map(|v| v + 10.0).unwrap();
        let axis = Axis::through_origin(0.3);
        let a = symmetry_defect(&u, &axis).unwrap() * u.l2_norm();
        let b = symmetry_defect(&shifted, &axis).unwrap() * shifted.l2_norm();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn asymmetric_domain_is_rejected() {
        let m = Arc::new(build_mesh(&DomainSpec::ellipse(1.3, 0.8), 0.1).unwrap());
        let u = ScalarField::constant(&m, 0.0).unwrap();
        assert!(symmetry_defect(&u, &Axis::x_axis()).is_ok());
        assert!(matches!(symmetry_defect(&u, &Axis::through_origin(0.7)), Err(Error::AsymmetricDomain { .. })));
    }
}
