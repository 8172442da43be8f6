use std::f64::consts::PI;

use liouville_core::comparison::{bubble_pair, BubbleParam};
use proptest::prelude::*;

/// `∫_{B_r} e^{U_λ}` by the midpoint rule in the radius.
fn numeric_mass(b: &BubbleParam, r: f64) -> f64 {
    let n = 4000;
    let h = r / n as f64;
    (0..n)
        .map(|k| {
            let t = (k as f64 + 0.5) * h;
            2.0 * PI * t * b.value(t).exp() * h
        })
        .sum()
}

fn away_from_degenerate() -> impl Strategy<Value = (f64, f64)> {
    (0.05f64..20.0, 0.05f64..4.0).prop_filter("pair is degenerate", |(l, r)| ((l * r) * (l * r) - 8.0).abs() > 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pairing_is_an_involution((lambda, r) in away_from_degenerate()) {
        let b2 = bubble_pair(lambda, r).unwrap();
        let back = bubble_pair(b2.lambda(), r).unwrap();
        prop_assert!((back.lambda() - lambda).abs() <= 1e-12 * lambda);
        let b1 = BubbleParam::new(lambda).unwrap();
        prop_assert!((b1.value(r) - b2.value(r)).abs() <= 1e-11 * (1.0 + b1.value(r).abs()));
    }

    #[test]
    fn paired_masses_fill_the_sphere((lambda, r) in away_from_degenerate()) {
        let b1 = BubbleParam::new(lambda).unwrap();
        let b2 = bubble_pair(lambda, r).unwrap();
        prop_assert!((b1.mass(r) + b2.mass(r) - 8.0 * PI).abs() <= 1e-11);
    }

    #[test]
    fn mass_matches_radial_integration(lambda in 0.1f64..5.0, r in 0.1f64..2.0) {
        let b = BubbleParam::new(lambda).unwrap();
        let m = b.mass(r);
        prop_assert!((numeric_mass(&b, r) - m).abs() <= 1e-6 * m);
        let back = b.radius_for_mass(m).unwrap();
        prop_assert!((back - r).abs() <= 1e-10 * r);
    }
}
