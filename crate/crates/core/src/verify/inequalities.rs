use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::report::{digest_of, ExperimentReport, TheoremTag, Verdict};
use crate::comparison::{radial_bol_check, subsolution_defect, BubbleParam, Radial};
use crate::error::{Error, Result};
use crate::field::{
    boundary_exp_half_integral, level_lines, superlevel_mass, superlevel_mass_on, Polyline, ScalarField,
};
use crate::geometry::{Mesh, Point, Shape};

const EIGHT_PI: f64 = 8.0 * PI;

/// Subdomain `ω` for [`bol_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    /// The whole mesh.
    Whole,
    /// `{|x - center| < radius}`, cut along the level line of the interpolated distance.
    Ball { center: Point, radius: f64 },
    /// `{u > level}`.
    Superlevel { level: f64 },
}

/// Raw Bol quantities on `ω`: `(∫_{∂ω} e^{u/2})²`, `∫_ω e^u`, and whether
/// every boundary curve closed up.
fn bol_quantities(u: &ScalarField, region: &Region) -> Result<(f64, f64, bool)> {
    let mesh = u.mesh();
    let (mass, lines) = match region {
        Region::Whole => (superlevel_mass(u, u, f64::NEG_INFINITY)?, Polyline::from_boundary(mesh)),
        Region::Ball { center, radius } => {
            let phi = ScalarField::from_fn(mesh, |x| -(x[0] - center[0]).hypot(x[1] - center[1]))?;
            (superlevel_mass(&phi, u, -radius)?, level_lines(&phi, -radius)?)
        }
        Region::Superlevel { level } => (superlevel_mass(u, u, *level)?, level_lines(u, *level)?),
    };
    let closed = lines.iter().all(|l| l.closed);
    let mut boundary = 0.0;
    for line in lines.iter().filter(|l| l.closed) {
        boundary += boundary_exp_half_integral(u, line)?;
    }
    Ok((boundary * boundary, mass, closed))
}

fn relative(margin: f64, lhs: f64, rhs: f64) -> f64 {
    margin / lhs.max(rhs).max(f64::MIN_POSITIVE)
}

/// Reference point and radius of a ball that fits inside the mesh.
fn interior_ball(mesh: &Mesh) -> (Point, f64) {
    let center = match mesh.domain().map(|d| &d.shape) {
        Some(Shape::Annulus { inner, outer }) => [0.5 * (inner + outer), 0.0],
        Some(_) => mesh.domain().expect("domain").center(),
        None => {
            let n = mesh.num_nodes() as f64;
            let s = mesh.nodes().iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
            [s[0] / n, s[1] / n]
        }
    };
    let radius = mesh
        .boundary_nodes()
        .iter()
        .map(|&b| {
            let p = mesh.node(b);
            (p[0] - center[0]).hypot(p[1] - center[1])
        })
        .fold(f64::INFINITY, f64::min);
    (center, radius)
}

/// Discretization slack `ε_h` of a mesh: the largest relative violation of
/// the Bol equality over sampled bubbles `U_λ(|x - c|)` on balls `B_r(c)`,
/// where equality holds exactly in the continuum.
pub fn calibrate_slack(mesh: &Arc<Mesh>) -> Result<f64> {
    let (center, rmax) = interior_ball(mesh);
    let mut worst: f64 = 0.0;
    for scale in [1.0, 2.0, 4.0] {
        let b = BubbleParam::new(scale / rmax)?;
        let u = b.field(mesh, center)?;
        for frac in [0.6, 0.9] {
            let (lhs, mass, _) = bol_quantities(&u, &Region::Ball { center, radius: frac * rmax })?;
            let rhs = 0.5 * mass * (EIGHT_PI - mass);
            worst = worst.max(relative(lhs - rhs, lhs, rhs).abs());
        }
    }
    Ok(worst.max(1e-12))
}

/// Bol's inequality `(∫_{∂ω} e^{u/2})² ≥ ½ m (8π - m)`, `m = ∫_ω e^u`, on the mesh.
///
/// The hypotheses (`Δu + e^u ≥ -ε_h` nodally, total mass at most `8π + ε_h`,
/// `ω` compactly contained) are checked and reported; when one fails the
/// check still runs and the verdict is inconclusive.
pub fn bol_check(u: &ScalarField, region: &Region, slack: f64) -> Result<ExperimentReport> {
    let digest = digest_of(&(u.mesh().digest(), u.values(), region));
    let mut rep = ExperimentReport::new("bol", TheoremTag::P2_1, digest, slack);
    let (lhs, mass, closed) = bol_quantities(u, region)?;
    let rhs = 0.5 * mass * (EIGHT_PI - mass);
    let total = superlevel_mass(u, u, f64::NEG_INFINITY)?;
    let defect = subsolution_defect(u)?;
    let rel = relative(lhs - rhs, lhs, rhs);
    rep.mass("region", mass).mass("total", total);
    rep.threshold("total", EIGHT_PI);
    rep.margin("lhs", lhs).margin("rhs", rhs).margin("bol", rel);
    rep.margin("subsolution", -defect).margin("total-mass", EIGHT_PI - total);
    let mut hypotheses = true;
    if defect > slack {
        rep.note(format!("hypothesis: nodal subsolution defect {defect:e} exceeds the slack"));
        hypotheses = false;
    }
    if total > EIGHT_PI + slack {
        rep.note(format!("hypothesis: total mass {total} exceeds 8 pi"));
        hypotheses = false;
    }
    if !closed && *region != Region::Whole {
        rep.note("hypothesis: region touches the domain boundary");
        hypotheses = false;
    }
    let v = Verdict::from_margin(rel, slack);
    rep.judge(if hypotheses { v } else { v.and(Verdict::Inconclusive) });
    if rep.is_violated() {
        rep.keep("u", u);
    }
    Ok(rep)
}

/// Bol's inequality on `B_R` for a radial profile, with closed-form or
/// high-order one-dimensional quadrature.
pub fn bol_check_radial(psi: &impl Radial, radius: f64, slack: f64) -> Result<ExperimentReport> {
    let r = radial_bol_check(psi, radius)?;
    let digest = digest_of(&(radius, psi.value(0.0), psi.value(radius), r.mass));
    let mut rep = ExperimentReport::new("bol-radial", TheoremTag::P2_1, digest, slack);
    rep.mass("region", r.mass).threshold("total", EIGHT_PI);
    rep.margin("lhs", r.lhs).margin("rhs", r.rhs).margin("bol", r.relative_margin);
    rep.margin("hypothesis", r.hypothesis_margin);
    let mut v = Verdict::from_margin(r.relative_margin, slack);
    if r.hypothesis_margin < -slack {
        rep.note("hypothesis: flux exceeds the enclosed mass at some radius");
        v = v.and(Verdict::Inconclusive);
    }
    rep.judge(v);
    Ok(rep)
}

/// Connected components (through mesh edges) of the interior node set
/// `{w2 - w1 > eps}`, each sorted.
pub fn ordered_components(w1: &ScalarField, w2: &ScalarField, eps: f64) -> Result<Vec<Vec<usize>>> {
    let diff = w2.zip_with(w1, |a, b| a - b)?;
    let mesh = w1.mesh();
    let inside: Vec<bool> = (0..mesh.num_nodes()).map(|i| !mesh.is_boundary(i) && diff.values()[i] > eps).collect();
    let mut parent: Vec<usize> = (0..mesh.num_nodes()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for &[a, b] in &mesh.topology().edges {
        if inside[a] && inside[b] {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for i in (0..mesh.num_nodes()).filter(|&i| inside[i]) {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    Ok(groups.into_values().collect())
}

/// Where [`sci_check`] integrates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SciRegion {
    /// Each connected component of `{w2 - w1 > ε_h}` separately.
    Components,
    /// One user-provided set of interior nodes.
    Nodes { nodes: Vec<usize> },
}

/// Components smaller than this are numerical noise, not regions.
const MIN_COMPONENT_NODES: usize = 4;

/// Sphere Covering Inequality on computed fields: with `Δw_i + e^{w_i} = f_i`,
/// `f2 ≥ f1 ≥ 0`, `w2 ≥ w1`, `w2 ≢ w1` on a region where `w1 = w2` on the
/// boundary, `∫ (e^{w1} + e^{w2}) ≥ 8π`.
///
/// The mass of a component is integrated over `{w2 > w1}` inside the
/// triangles touching it, so the thin strip next to its boundary is included.
pub fn sci_check(
    w1: &ScalarField,
    w2: &ScalarField,
    f1: &ScalarField,
    f2: &ScalarField,
    region: &SciRegion,
    slack: f64,
) -> Result<ExperimentReport> {
    for f in [w2, f1, f2] {
        if !w1.same_mesh(f) {
            return Err(Error::MeshMismatch);
        }
    }
    let mesh = w1.mesh();
    let digest = digest_of(&(mesh.digest(), w1.values(), w2.values(), f1.values(), f2.values(), region));
    let mut rep = ExperimentReport::new("sci", TheoremTag::T2_5, digest, slack);
    let eps = slack;
    let regions = match region {
        SciRegion::Components => ordered_components(w1, w2, eps)?,
        SciRegion::Nodes { nodes } => vec![nodes.clone()],
    };
    let fscale = f1.sup_norm().max(f2.sup_norm()).max(1.0);
    let mut problems = Vec::new();
    let mut regions_used = Vec::new();
    for nodes in regions {
        if nodes.len() < MIN_COMPONENT_NODES && matches!(region, SciRegion::Components) {
            continue;
        }
        for &i in &nodes {
            let (a, b) = (f1.values()[i], f2.values()[i]);
            if a < -eps * fscale {
                problems.push(format!("f1 < 0 at node {i}"));
            }
            if b < a - eps * fscale {
                problems.push(format!("f2 < f1 at node {i}"));
            }
            if w2.values()[i] < w1.values()[i] - eps {
                problems.push(format!("w2 < w1 at node {i}"));
            }
        }
        if !nodes.iter().any(|&i| w2.values()[i] - w1.values()[i] > eps) {
            problems.push("w2 coincides with w1 on the region".into());
        }
        regions_used.push(nodes);
    }
    if regions_used.is_empty() {
        problems.push("w2 coincides with w1 (no region where w2 > w1)".into());
    }
    if !problems.is_empty() {
        problems.truncate(5);
        return Err(Error::HypothesesFail(problems.join("; ")));
    }
    let diff = w2.zip_with(w1, |a, b| a - b)?;
    let strict = f1.sup_norm() > eps * fscale || f2.sup_norm() > eps * fscale;
    let mut member = vec![false; mesh.num_nodes()];
    for (k, nodes) in regions_used.iter().enumerate() {
        member.iter_mut().for_each(|m| *m = false);
        for &i in nodes {
            member[i] = true;
        }
        let tris: Vec<usize> =
            (0..mesh.num_triangles()).filter(|&t| mesh.triangles()[t].iter().any(|&v| member[v])).collect();
        let mass = superlevel_mass_on(&diff, w1, 1.0, 0.0, &tris)? + superlevel_mass_on(&diff, w2, 1.0, 0.0, &tris)?;
        let rel = (mass - EIGHT_PI) / EIGHT_PI;
        let name = if regions_used.len() == 1 { String::from("region") } else { format!("region{k}") };
        rep.mass(name.clone(), mass).margin(name, rel);
        rep.judge(Verdict::from_margin(rel, slack));
    }
    rep.threshold("region", EIGHT_PI);
    if strict {
        let worst = rep.worst_margin().unwrap_or(f64::NAN);
        rep.note(if worst > slack {
            "strict: some f_i is nonzero and the margin exceeds the slack"
        } else {
            "strict case: some f_i is nonzero but the margin does not exceed the slack"
        });
    }
    if rep.is_violated() {
        for (name, f) in [("w1", w1), ("w2", w2), ("f1", f1), ("f2", f2)] {
            rep.keep(name, f);
        }
    }
    Ok(rep)
}

/// [`sci_check`] for two radial bubbles on `B_R`, with closed-form masses.
pub fn sci_check_bubbles(b1: &BubbleParam, b2: &BubbleParam, radius: f64, slack: f64) -> Result<ExperimentReport> {
    let (v1, v2) = (b1.value(radius), b2.value(radius));
    if (v1 - v2).abs() > 1e-9 * (1.0 + v1.abs()) {
        return Err(Error::HypothesesFail(format!("boundary values differ: {v1} vs {v2}")));
    }
    if b1.lambda() == b2.lambda() {
        return Err(Error::HypothesesFail("w2 coincides with w1".into()));
    }
    let digest = digest_of(&(b1.lambda(), b2.lambda(), radius));
    let mut rep = ExperimentReport::new("sci-radial", TheoremTag::T2_5, digest, slack);
    let mass = b1.mass(radius) + b2.mass(radius);
    let rel = (mass - EIGHT_PI) / EIGHT_PI;
    rep.mass("region", mass).threshold("region", EIGHT_PI).margin("region", rel);
    rep.judge(Verdict::from_margin(rel, slack));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec};

    #[test]
    fn zero_field_on_half_ball() {
        let mesh = Arc::new(build_mesh(&DomainSpec::unit_disk(), 0.05).unwrap());
        let u = ScalarField::constant(&mesh, 0.0).unwrap();
        let rep = bol_check(&u, &Region::Ball { center: [0.0, 0.0], radius: 0.5 }, 1e-3).unwrap();
        // (∫ e^0 dσ)² = π², ½ (π/4)(8π - π/4)
        assert!((rep.margins["lhs"] - PI * PI).abs() < 1e-2);
        assert!((rep.margins["rhs"] - 0.125 * PI * (8.0 * PI - 0.25 * PI)).abs() < 1e-2);
        assert_eq!(rep.verdict, Verdict::Consistent);
    }

    #[test]
    fn slack_is_small_and_shrinks() {
        let coarse = Arc::new(build_mesh(&DomainSpec::unit_disk(), 0.1).unwrap());
        let fine = Arc::new(coarse.refine().unwrap());
        let (a, b) = (calibrate_slack(&coarse).unwrap(), calibrate_slack(&fine).unwrap());
        assert!(a < 2e-2 && b < a, "{a} {b}");
    }

    #[test]
    fn identical_fields_fail_the_hypotheses() {
        let mesh = Arc::new(build_mesh(&DomainSpec::unit_disk(), 0.2).unwrap());
        let w = ScalarField::constant(&mesh, 0.3).unwrap();
        let f = ScalarField::constant(&mesh, 0.0).unwrap();
        assert!(matches!(sci_check(&w, &w, &f, &f, &SciRegion::Components, 1e-4), Err(Error::HypothesesFail(_))));
    }

    #[test]
    fn components_split_on_a_sign_change() {
        let mesh = Arc::new(build_mesh(&DomainSpec::unit_disk(), 0.1).unwrap());
        let w1 = ScalarField::constant(&mesh, 0.0).unwrap();
        let w2 = ScalarField::from_fn(&mesh, |x| (1.0 - x[0] * x[0] - x[1] * x[1]) * x[0].abs()).unwrap();
        let comps = ordered_components(&w1, &w2, 1e-9).unwrap();
        assert_eq!(comps.len(), 2);
    }
}
