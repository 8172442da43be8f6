//! Bubbles, their pairing, equimeasurable rearrangement and the radial checks.

mod bubble;
mod checks;
mod profile;
mod rearrange;

pub use bubble::{bubble_discrete_residual, bubble_mass, bubble_pair, bubble_value, BubbleParam};
pub use checks::{
    mass_dichotomy_check, nodal_equation_residual, radial_bol_check, subsolution_defect, Branch, DichotomyReport,
    HypothesisSample, RadialBolReport,
};
pub use profile::{Radial, RadialProfile};
pub use rearrange::{
    equimeasurability_defect, gradient_comparison_check, rearrange, rearrange_checked, GradientReport, GradientSample,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{quantile_levels, LayerCake, ScalarField};
    use crate::geometry::{build_mesh, DomainSpec};
    use std::sync::Arc;

    fn disk(h: f64) -> Arc<crate::geometry::Mesh> {
        Arc::new(build_mesh(&DomainSpec::unit_disk(), h).unwrap())
    }

    #[test]
    fn constant_field_rearranges_to_constant() {
        let m = disk(0.1);
        let phi = ScalarField::constant(&m, 0.7).unwrap();
        let w = ScalarField::constant(&m, 0.0).unwrap();
        let star = rearrange(&phi, &w, 1.0).unwrap();
        assert!(star.values().iter().all(|&v| v == 0.7));
        let b = BubbleParam::new(1.0).unwrap();
        let total = w.weighted_mass(1.0).unwrap();
        assert!((b.mass(star.outer_radius()) - total).abs() < 1e-12);
    }

    #[test]
    fn radial_field_is_its_own_rearrangement() {
        let m = disk(0.05);
        let (b1, b2) = (BubbleParam::new(1.0).unwrap(), BubbleParam::new(2.0).unwrap());
        let w = b1.field(&m, [0.0, 0.0]).unwrap();
        let phi = ScalarField::from_fn(&m, |p| {
            let r = p[0].hypot(p[1]);
            b2.value(r) - b1.value(r)
        })
        .unwrap();
        let star = rearrange(&phi, &w, 1.0).unwrap();
        assert!(star.is_nonincreasing_profile());
        let mut worst: f64 = 0.0;
        for &r in star.radii() {
            if r <= 1.0 {
                worst = worst.max((star.value_at(r) - (b2.value(r) - b1.value(r))).abs());
            }
        }
        assert!(worst < 1e-3, "{worst}");
        let cake = LayerCake::build(&phi, &w).unwrap();
        let levels = quantile_levels(&cake, 64);
        let d = equimeasurability_defect(&phi, &w, &star, 1.0, &levels).unwrap();
        assert!(d < 2e-2, "{d}");
        let rep = gradient_comparison_check(&phi, &w, &star, 1.0, &levels, 1e-2).unwrap();
        for s in &rep.samples {
            assert!((s.lhs - s.rhs).abs() <= 1e-2 * s.rhs, "{s:?}");
        }
        assert!(rep.pass);
    }
}
