use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bubble::{bubble_pair, BubbleParam};
use super::profile::Radial;
use crate::error::{Error, Result};
use crate::field::{QuadPoints, ScalarField};
use crate::solver::DiscreteOperator;

const EIGHT_PI: f64 = 8.0 * PI;

/// Largest violation of the weak inequality `Δw + e^w ≥ 0` over interior nodes,
/// `max_i ((K w)_i - ∫ e^w φ_i) / m_i`, clamped at 0.
pub fn subsolution_defect(w: &ScalarField) -> Result<f64> {
    Ok(nodal_equation_residual(w)?.into_iter().fold(0.0, f64::max))
}

/// `((K w)_i - ∫ e^w φ_i) / m_i` at the interior nodes (lumped mass `m_i`).
/// Zero for an exact discrete solution of `-Δw = e^w`.
pub fn nodal_equation_residual(w: &ScalarField) -> Result<Vec<f64>> {
    let mesh = w.mesh();
    let op = DiscreteOperator::assemble(mesh.clone())?;
    let quad = QuadPoints::standard(mesh);
    let ew: Vec<f64> = quad.interpolate(mesh, w.values()).into_iter().map(f64::exp).collect();
    let load = quad.load(mesh, &ew);
    let kw = op.apply(w.values());
    let lumped = op.lumped_mass();
    Ok(op.interior().iter().map(|&i| (kw[i] - load[i]) / lumped[i]).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSample {
    pub radius: f64,
    /// `∫_{∂B_r} |∇ψ| = 2πr |ψ'(r)|`.
    pub flux: f64,
    /// `∫_{B_r} e^ψ`.
    pub mass: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialBolReport {
    pub radius: f64,
    pub hypothesis: Vec<HypothesisSample>,
    /// Smallest `mass - flux` over the samples.
    pub hypothesis_margin: f64,
    pub mass: f64,
    /// `(∫_{∂B_R} e^{ψ/2})²`.
    pub lhs: f64,
    /// `½ m (8π - m)`.
    pub rhs: f64,
    pub margin: f64,
    pub relative_margin: f64,
}

/// Radial Bol check on `B_R`: the hypothesis `2πr|ψ'| ≤ ∫_{B_r} e^ψ` at each
/// sample radius and the conclusion `(2πR e^{ψ(R)/2})² ≥ ½ m (8π - m)`.
pub fn radial_bol_check(psi: &impl Radial, radius: f64) -> Result<RadialBolReport> {
    if !psi.is_nonincreasing(radius) {
        return Err(Error::PreconditionViolated("radial profile is not non-increasing".into()));
    }
    let mass = psi.mass(radius);
    if mass > EIGHT_PI {
        return Err(Error::MassExceeds8Pi(mass));
    }
    let hypothesis: Vec<HypothesisSample> = psi
        .sample_radii(radius)
        .into_iter()
        .map(|r| {
            let flux = 2.0 * PI * r * psi.slope(r).abs();
            let m = psi.mass(r);
            HypothesisSample { radius: r, flux, mass: m, margin: m - flux }
        })
        .collect();
    let hypothesis_margin = hypothesis.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
    let lhs = (2.0 * PI * radius * (0.5 * psi.value(radius)).exp()).powi(2);
    let rhs = 0.5 * mass * (EIGHT_PI - mass);
    let margin = lhs - rhs;
    Ok(RadialBolReport {
        radius,
        hypothesis,
        hypothesis_margin,
        mass,
        lhs,
        rhs,
        margin,
        relative_margin: margin / lhs.max(rhs).max(f64::MIN_POSITIVE),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `m ≤ ∫_{B_R} e^{U_λ1}`.
    Lower,
    /// `m ≥ ∫_{B_R} e^{U_λ2}`.
    Upper,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub mass: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// `∫_{B_R} e^{U_λ1}`.
    pub lower: f64,
    /// `∫_{B_R} e^{U_λ2}`.
    pub upper: f64,
    pub branch: Branch,
    /// Distance into the chosen branch (`lower - m` or `m - upper`); near zero
    /// in the equality cases.
    pub margin: f64,
}

/// Decides which side of the bubble-pair dichotomy the radial mass of `ψ` on
/// `B_R` falls on. `ψ(R)` must equal `U_λ1(R)` to within `1e-6`.
pub fn mass_dichotomy_check(psi: &impl Radial, lambda1: f64, radius: f64) -> Result<DichotomyReport> {
    let b1 = BubbleParam::new(lambda1)?;
    let b2 = bubble_pair(lambda1, radius)?;
    let gap = (psi.value(radius) - b1.value(radius)).abs();
    if gap > 1e-6 * (1.0 + b1.value(radius).abs()) {
        return Err(Error::PreconditionViolated(format!("boundary value differs from the bubble value by {gap:e}")));
    }
    let mass = psi.mass(radius);
    let (lower, upper) = (b1.mass(radius), b2.mass(radius));
    let tol = 1e-9 * EIGHT_PI;
    let in_lower = mass <= lower + tol;
    let in_upper = mass >= upper - tol;
    let branch = match (in_lower, in_upper) {
        (true, true) => {
            if (mass - lower).abs() <= (mass - upper).abs() {
                Branch::Lower
            } else {
                Branch::Upper
            }
        }
        (true, false) => Branch::Lower,
        (false, true) => Branch::Upper,
        (false, false) => return Err(Error::NeitherBranch { mass, lower, upper }),
    };
    let margin = match branch {
        Branch::Lower => lower - mass,
        Branch::Upper => mass - upper,
    };
    Ok(DichotomyReport { mass, lambda1, lambda2: b2.lambda(), lower, upper, branch, margin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comparison::RadialProfile;

    #[test]
    fn bubble_is_the_equality_case() {
        let b = BubbleParam::new(1.3).unwrap();
        let rep = radial_bol_check(&b, 1.5).unwrap();
        assert!(rep.relative_margin.abs() < 1e-12);
        assert!(rep.hypothesis_margin.abs() < 1e-12);
    }

    #[test]
    fn constant_profile_has_zero_flux() {
        let p = RadialProfile::new(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let rep = radial_bol_check(&p, 1.0).unwrap();
        assert!(rep.hypothesis.iter().all(|s| s.flux == 0.0));
        // (2π)² against ½ π (8π - π)
        assert!((rep.lhs - 4.0 * PI * PI).abs() < 1e-12);
        assert!((rep.rhs - 3.5 * PI * PI).abs() < 1e-9);
    }

    #[test]
    fn dichotomy_on_pure_bubbles() {
        let b1 = BubbleParam::new(1.0).unwrap();
        let b2 = BubbleParam::new(2.0).unwrap();
        let r1 = mass_dichotomy_check(&b1, 1.0, 2.0).unwrap();
        assert_eq!(r1.branch, Branch::Lower);
        assert!(r1.margin.abs() < 1e-12);
        let r2 = mass_dichotomy_check(&b2, 1.0, 2.0).unwrap();
        assert_eq!(r2.branch, Branch::Upper);
        assert!(r2.margin.abs() < 1e-12);
        assert!(mass_dichotomy_check(&BubbleParam::new(1.5).unwrap(), 1.0, 2.0).is_err());
    }
}
