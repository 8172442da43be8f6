use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bubble::BubbleParam;
use super::profile::RadialProfile;
use crate::error::{Error, Result};
use crate::field::{coarea_flux, level_measure_derivative, superlevel_mass, LayerCake, ScalarField};

/// Equimeasurable radial rearrangement of `φ` from the measure `e^w dx` onto
/// the bubble measure `e^{U_λ1} dx`.
///
/// The profile passes through `(r(μ_k), t_k)` for the layer cake `μ_k` of `φ`,
/// where `r(m)` is the radius of the bubble ball of mass `m`; it ends at the
/// radius `R*` that carries the whole `e^w` mass.
pub fn rearrange(phi: &ScalarField, w: &ScalarField, lambda1: f64) -> Result<RadialProfile> {
    let bubble = BubbleParam::new(lambda1)?;
    let cake = LayerCake::build(phi, w)?;
    if cake.total() >= 8.0 * PI {
        return Err(Error::MeasureMismatch { mass: cake.total() });
    }
    let th = cake.thresholds();
    let mu = cake.masses();
    let mut radii = Vec::with_capacity(th.len() + 1);
    let mut values = Vec::with_capacity(th.len() + 1);
    for k in (0..th.len()).rev() {
        let r = bubble.radius_for_mass(mu[k])?;
        if radii.last().is_none_or(|&last| r > last) {
            radii.push(r);
            values.push(th[k]);
        }
    }
    if radii[0] != 0.0 {
        radii.insert(0, 0.0);
        values.insert(0, th[th.len() - 1]);
    }
    let outer = bubble.radius_for_mass(cake.total())?;
    if outer > radii[radii.len() - 1] {
        radii.push(outer);
        values.push(th[0]);
    }
    RadialProfile::new(radii, values)
}

/// [`rearrange`] after checking that `w` is a weak subsolution of
/// `Δw + e^w ≥ 0` up to `slack` at every interior node.
pub fn rearrange_checked(phi: &ScalarField, w: &ScalarField, lambda1: f64, slack: f64) -> Result<RadialProfile> {
    let defect = super::checks::subsolution_defect(w)?;
    if defect > slack {
        return Err(Error::PreconditionViolated(format!(
            "w is not a subsolution: nodal defect {defect:e} exceeds slack {slack:e}"
        )));
    }
    rearrange(phi, w, lambda1)
}

/// `sup_t |μ*(t) - μ(t)| / μ(min φ)` over the given levels, where `μ*` is the
/// bubble mass of the rearranged superlevel ball.
pub fn equimeasurability_defect(
    phi: &ScalarField,
    w: &ScalarField,
    star: &RadialProfile,
    lambda1: f64,
    levels: &[f64],
) -> Result<f64> {
    let bubble = BubbleParam::new(lambda1)?;
    let total = superlevel_mass(phi, w, f64::NEG_INFINITY)?;
    let mut worst: f64 = 0.0;
    for &t in levels {
        let direct = superlevel_mass(phi, w, t)?;
        let star_mass = bubble.mass(star.crossing_radius(t));
        worst = worst.max((star_mass - direct).abs());
    }
    Ok(worst / total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientSample {
    pub level: f64,
    /// `∫_{φ*=t} |∇φ*| dσ`.
    pub lhs: f64,
    /// `∫_{φ=t} |∇φ| dσ`.
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub samples: Vec<GradientSample>,
    /// Relative tolerance: a sample passes when `lhs ≤ rhs (1 + tolerance)`.
    pub tolerance: f64,
    /// Levels dropped because they do not exceed the boundary maximum of `φ`.
    pub skipped: usize,
    pub pass: bool,
}

/// Compares the level-line gradient integrals of `φ*` and `φ`.
///
/// On the rearranged side `|∇φ*|` on the circle of radius `r = r*(t)` follows
/// from the coarea formula: `2πr |∇φ*| = (2πr)² e^{U(r)} / |μ'(t)|`, with
/// `μ'(t)` computed exactly on the mesh as `-∫_{φ=t} e^w / |∇φ| dσ`.
/// Levels at or below the boundary maximum of a non-constant boundary trace
/// are skipped, since there the level set reaches the boundary.
pub fn gradient_comparison_check(
    phi: &ScalarField,
    w: &ScalarField,
    star: &RadialProfile,
    lambda1: f64,
    levels: &[f64],
    tolerance: f64,
) -> Result<GradientReport> {
    let bubble = BubbleParam::new(lambda1)?;
    let mesh = phi.mesh();
    let bvals: Vec<f64> = mesh.boundary_nodes().iter().map(|&b| phi.values()[b]).collect();
    let bmax = bvals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bmin = bvals.iter().copied().fold(f64::INFINITY, f64::min);
    let constant_boundary = bmax == bmin;
    let (lo, hi) = (phi.min(), phi.max());
    let mut samples = Vec::new();
    let mut skipped = 0;
    for &t in levels {
        if t < lo || t >= hi {
            samples.push(GradientSample { level: t, lhs: 0.0, rhs: 0.0, slack: 0.0 });
            continue;
        }
        if !constant_boundary && t <= bmax {
            skipped += 1;
            continue;
        }
        let rhs = coarea_flux(phi, t)?;
        let rate = level_measure_derivative(phi, w, t)?;
        let r = star.crossing_radius(t);
        let lhs = if rate > 0.0 { (2.0 * PI * r).powi(2) * bubble.value(r).exp() / rate } else { 0.0 };
        samples.push(GradientSample { level: t, lhs, rhs, slack: rhs - lhs });
    }
    let pass = samples.iter().all(|s| s.lhs <= s.rhs * (1.0 + tolerance));
    Ok(GradientReport { samples, tolerance, skipped, pass })
}
