use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{QuadPoints, ScalarField};
use crate::geometry::{Mesh, Point};
use crate::solver::DiscreteOperator;

const EIGHT_PI: f64 = 8.0 * PI;

/// The radial solution `U_λ(x) = -2 ln(1 + λ²|x|²/8) + 2 ln λ` of `ΔU + e^U = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleParam {
    lambda: f64,
}

impl BubbleParam {
    pub fn new(lambda: f64) -> Result<BubbleParam> {
        if lambda > 0.0 && lambda.is_finite() {
            Ok(BubbleParam { lambda })
        } else {
            Err(Error::InvalidBubble(format!("lambda must be positive, got {lambda}")))
        }
    }

    /// The bubble with `∫_{B_R} e^U = m`, for `0 < m < 8π`.
    pub fn with_mass(m: f64, radius: f64) -> Result<BubbleParam> {
        if !(m > 0.0 && m < EIGHT_PI) {
            return Err(Error::MeasureMismatch { mass: m });
        }
        BubbleParam::new((8.0 * m / (EIGHT_PI - m)).sqrt() / radius)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn value(&self, r: f64) -> f64 {
        let l2 = self.lambda * self.lambda;
        -2.0 * (l2 * r * r / 8.0).ln_1p() + 2.0 * self.lambda.ln()
    }

    /// `U'(r)`, never positive.
    pub fn slope(&self, r: f64) -> f64 {
        let l2 = self.lambda * self.lambda;
        -4.0 * l2 * r / (8.0 + l2 * r * r)
    }

    /// `∫_{B_r} e^U = 8πλ²r²/(8 + λ²r²)`.
    pub fn mass(&self, r: f64) -> f64 {
        let s = self.lambda * self.lambda * r * r;
        EIGHT_PI * s / (8.0 + s)
    }

    /// Radius enclosing mass `m`: `r² = 8m / (λ²(8π - m))`.
    pub fn radius_for_mass(&self, m: f64) -> Result<f64> {
        if !(0.0..EIGHT_PI).contains(&m) {
            return Err(Error::MeasureMismatch { mass: m });
        }
        Ok((8.0 * m / (self.lambda * self.lambda * (EIGHT_PI - m))).sqrt())
    }

    /// `∫_{∂B_r} e^{U/2} dσ = 2πrλ / (1 + λ²r²/8)`.
    pub fn exp_half_boundary(&self, r: f64) -> f64 {
        2.0 * PI * r * self.lambda / (1.0 + self.lambda * self.lambda * r * r / 8.0)
    }

    /// Nodal samples of `U_λ(x - center)`.
    pub fn field(&self, mesh: &Arc<Mesh>, center: Point) -> Result<ScalarField> {
        ScalarField::from_fn(mesh, |p| self.value((p[0] - center[0]).hypot(p[1] - center[1])))
    }
}

pub fn bubble_value(b: &BubbleParam, r: f64) -> f64 {
    b.value(r)
}

pub fn bubble_mass(b: &BubbleParam, r: f64) -> f64 {
    b.mass(r)
}

/// The other bubble through the same boundary value on `∂B_R`: `λ2 = 8 / (λ1 R²)`.
/// The two masses on `B_R` add up to `8π`. Degenerate when `λ1² R² = 8`, where
/// the pair collapses to `λ2 = λ1`.
pub fn bubble_pair(lambda1: f64, radius: f64) -> Result<BubbleParam> {
    let b = BubbleParam::new(lambda1)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidBubble(format!("radius must be positive, got {radius}")));
    }
    let s = lambda1 * lambda1 * radius * radius;
    if (s - 8.0).abs() <= 1e-12 * 8.0 {
        return Err(Error::DegeneratePair);
    }
    BubbleParam::new(8.0 / (b.lambda * radius * radius))
}

/// Consistency error of the discrete bubble equation on `mesh`.
///
/// Forms the weak residual `R = K U_h - ∫ e^{U_h} φ_i` at interior nodes and
/// returns the `L²` norm of `K_II⁻¹ R`, i.e. the nodal correction the bubble
/// would need to satisfy the discrete equation exactly.
pub fn bubble_discrete_residual(mesh: &Arc<Mesh>, b: &BubbleParam) -> Result<f64> {
    let op = DiscreteOperator::assemble(mesh.clone())?;
    let u = b.field(mesh, [0.0, 0.0])?;
    let quad = QuadPoints::standard(mesh);
    let at_q: Vec<f64> = quad.interpolate(mesh, u.values()).into_iter().map(f64::exp).collect();
    let load = quad.load(mesh, &at_q);
    let ku = op.apply(u.values());
    let residual: Vec<f64> = op.interior().iter().map(|&i| ku[i] - load[i]).collect();
    let lu = op.factor_interior()?;
    let corr = lu.solve(&residual)?;
    let mut nodal = vec![0.0; mesh.num_nodes()];
    for (k, &i) in op.interior().iter().enumerate() {
        nodal[i] = corr[k];
    }
    Ok(ScalarField::new(mesh.clone(), nodal)?.l2_norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let b = BubbleParam::new(1.0).unwrap();
        assert_eq!(b.value(0.0), 0.0);
        let b = BubbleParam::new(2.0 * 2f64.sqrt()).unwrap();
        assert!((b.value(0.0) - 8f64.ln()).abs() < 1e-15);
        let b = BubbleParam::new(2.0).unwrap();
        assert!((b.mass(2.0) - 16.0 * PI / 3.0).abs() < 1e-13);
        assert!((b.mass(1e9) - EIGHT_PI).abs() < 1e-9);
        assert_eq!(b.mass(0.0), 0.0);
        assert!((b.radius_for_mass(b.mass(0.7)).unwrap() - 0.7).abs() < 1e-14);
        assert!(BubbleParam::new(0.0).is_err());
        assert!(b.radius_for_mass(EIGHT_PI).is_err());
    }

    #[test]
    fn pairing() {
        let l2 = bubble_pair(1.0, 2.0).unwrap();
        assert!((l2.lambda() - 2.0).abs() < 1e-15);
        let b1 = BubbleParam::new(1.0).unwrap();
        assert!((b1.mass(2.0) + l2.mass(2.0) - EIGHT_PI).abs() < 1e-13);
        let a = 4.0 - 2.0 * 2f64.sqrt();
        assert!((bubble_pair(a, 1.0).unwrap().lambda() - (4.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!(matches!(bubble_pair(2.0 * 2f64.sqrt(), 1.0), Err(Error::DegeneratePair)));
        // both bubbles agree on the circle
        assert!((b1.value(2.0) - l2.value(2.0)).abs() < 1e-14);
    }

    #[test]
    fn slope_balances_mass() {
        let b = BubbleParam::new(1.7).unwrap();
        for r in [0.1, 0.5, 1.3] {
            assert!((2.0 * PI * r * -b.slope(r) - b.mass(r)).abs() < 1e-13);
            let lhs = b.exp_half_boundary(r).powi(2);
            let m = b.mass(r);
            assert!((lhs - 0.5 * m * (EIGHT_PI - m)).abs() < 1e-12 * lhs);
        }
    }
}
