use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::report::{digest_of, ExperimentReport, TheoremTag, Verdict};
use crate::error::{Error, Result};
use crate::field::{reflected, symmetry_defect, ScalarField};
use crate::geometry::Axis;
use crate::problems::{DerivedConstants, DiscreteProblem, ProblemSpec, Variant};
use crate::solver::linalg::norm2;
use crate::solver::{
    continuation, multi_start_on, ContinuationConfig, ContinuationTrace, DiscreteOperator, MultiStartConfig,
    MultiStartResult, NewtonConfig, SolveResult,
};

/// Solutions below this sup norm count as the zero field.
pub const ZERO_TOL: f64 = 1e-6;
/// Relative tolerance of the equal-mass filter.
pub const EQUAL_MASS_TOL: f64 = 1e-6;
/// Residual a supplied pair of fields must reach to count as solutions.
pub const SOLUTION_TOL: f64 = 1e-8;

/// Which statement a variant is tested against and how its solutions are filtered.
struct Admission {
    tag: TheoremTag,
    /// `(parameter, bound)` when the statement is conditioned on the parameter.
    parameter_bound: Option<(f64, f64)>,
    /// `(mass label, bound)` when it is conditioned on a solution mass.
    mass_bound: Option<(&'static str, f64)>,
    /// Solutions are compared only within classes of equal mass.
    equal_mass: Option<&'static str>,
    /// The unique solution must be the zero field.
    zero: bool,
}

fn admission(p: &ProblemSpec, c: &DerivedConstants) -> Admission {
    let rho_bound = |rho: f64| c.threshold("rho").map(|b| (rho, b));
    let base =
        Admission { tag: TheoremTag::T1_1, parameter_bound: None, mass_bound: None, equal_mass: None, zero: false };
    match &p.variant {
        Variant::MeanField { rho } => Admission { parameter_bound: rho_bound(*rho), ..base },
        Variant::SinhGordonPositive { rho, .. } => {
            Admission { parameter_bound: rho_bound(*rho), equal_mass: Some("normalization"), ..base }
        }
        Variant::SinhGordonSigned { rho, .. } => {
            Admission { tag: TheoremTag::T1_4, parameter_bound: rho_bound(*rho), zero: true, ..base }
        }
        Variant::NonNormalized { alpha } => {
            let label = if *alpha > 0.0 { "e^u" } else { "sum" };
            let tag = if *alpha > 0.0 { TheoremTag::T1_1 } else { TheoremTag::T1_4 };
            Admission { tag, mass_bound: c.threshold("mass").map(|b| (label, b)), zero: *alpha < 0.0, ..base }
        }
        Variant::CosmicString { .. } => {
            Admission { tag: TheoremTag::C1_8, mass_bound: c.threshold("mass").map(|b| ("gamma", b)), ..base }
        }
        Variant::Toda { .. } => {
            Admission { tag: TheoremTag::T1_10, mass_bound: c.threshold("pair-mass").map(|b| ("pair", b)), ..base }
        }
        Variant::SingularToda { .. } => {
            Admission { tag: TheoremTag::T1_12, mass_bound: c.threshold("pair-mass").map(|b| ("pair", b)), ..base }
        }
        Variant::Gelfand { .. } => Admission { tag: TheoremTag::T2_5, ..base },
    }
}

impl Admission {
    fn above_threshold(&self) -> bool {
        self.parameter_bound.is_some_and(|(v, b)| v > b)
    }

    /// Whether a solution falls under the mass hypothesis.
    fn admits(&self, s: &SolveResult, slack: f64) -> bool {
        match self.mass_bound {
            Some((label, bound)) => s.mass(label).is_some_and(|m| m <= bound * (1.0 + slack)),
            None => true,
        }
    }

    fn record(&self, rep: &mut ExperimentReport) {
        if let Some((v, b)) = self.parameter_bound {
            rep.threshold("parameter", b).threshold("parameter-value", v);
        }
        if let Some((label, b)) = self.mass_bound {
            rep.threshold(label, b);
        }
        if self.above_threshold() {
            rep.note("parameter above the threshold: exploratory, never a violation");
        }
    }
}

fn inputs_digest(p: &ProblemSpec, op: &DiscreteOperator, extra: &impl Serialize) -> String {
    digest_of(&(p, op.mesh().digest(), extra))
}

fn record_clusters(rep: &mut ExperimentReport, ms: &MultiStartResult) {
    for (k, c) in ms.clusters.iter().enumerate() {
        for (label, m) in &c.solution.masses {
            rep.mass(format!("cluster{k}/{label}"), *m);
        }
        rep.mass(format!("cluster{k}/sup"), c.solution.sup_norm());
    }
    rep.note(format!(
        "{} of {} starts converged into {} cluster(s)",
        ms.converged_count(),
        ms.starts.len(),
        ms.cluster_count()
    ));
}

fn keep_solutions(rep: &mut ExperimentReport, ms: &MultiStartResult, which: &[usize]) {
    for &k in which {
        for (i, f) in ms.clusters[k].solution.fields.iter().enumerate() {
            rep.keep(format!("cluster{k}/u{}", i + 1), f);
        }
    }
}

/// Above the parameter threshold nothing is claimed.
fn cap_exploratory(rep: &mut ExperimentReport, adm: &Admission) {
    if adm.above_threshold() && rep.verdict == Verdict::Violated {
        rep.verdict = Verdict::Inconclusive;
    }
}

/// Uniqueness (or triviality) verdict for the clusters of a finished multi-start.
pub fn uniqueness_from(problem: &DiscreteProblem, ms: &MultiStartResult, slack: f64) -> Result<ExperimentReport> {
    let spec = problem.spec();
    let constants = spec.validate()?;
    let adm = admission(spec, &constants);
    let digest = inputs_digest(spec, problem.operator(), &ms.starts.len());
    let mut rep = ExperimentReport::new(format!("uniqueness/{}", spec.variant.name()), adm.tag, digest, slack);
    adm.record(&mut rep);
    record_clusters(&mut rep, ms);
    if let Variant::Gelfand { .. } = spec.variant {
        rep.note("no uniqueness statement for this variant");
        rep.margin("clusters", -(ms.cluster_count() as f64 - 1.0).max(0.0));
        rep.judge(Verdict::Inconclusive);
        return Ok(rep);
    }
    let admitted: Vec<usize> =
        (0..ms.cluster_count()).filter(|&k| adm.admits(&ms.clusters[k].solution, slack)).collect();
    if admitted.len() < ms.cluster_count() {
        rep.note(format!("{} cluster(s) outside the mass hypothesis", ms.cluster_count() - admitted.len()));
    }
    if admitted.is_empty() {
        rep.note("no admissible solution found");
        rep.judge(Verdict::Inconclusive);
        return Ok(rep);
    }
    // classes of solutions the statement says must coincide
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &k in &admitted {
        let key = adm.equal_mass.and_then(|l| ms.clusters[k].solution.mass(l));
        let hit = classes.iter_mut().find(|cls| match key {
            None => true,
            Some(m) => {
                let other = adm.equal_mass.and_then(|l| ms.clusters[cls[0]].solution.mass(l)).unwrap_or(f64::NAN);
                (m - other).abs() <= EQUAL_MASS_TOL * m.abs().max(other.abs())
            }
        });
        match hit {
            Some(cls) => cls.push(k),
            None => classes.push(vec![k]),
        }
    }
    let largest = classes.iter().max_by_key(|c| c.len()).expect("non-empty");
    rep.margin("clusters", -(largest.len() as f64 - 1.0));
    if largest.len() > 1 {
        let mut separation: f64 = 0.0;
        for (i, &a) in largest.iter().enumerate() {
            for &b in &largest[i + 1..] {
                separation = separation.max(ms.clusters[a].solution.distance(&ms.clusters[b].solution));
            }
        }
        rep.margin("separation", -separation);
        rep.note(format!("{} distinct admissible solutions (sup distance up to {separation:e})", largest.len()));
        rep.judge(Verdict::from_margin(-separation, slack));
        if rep.is_violated() {
            keep_solutions(&mut rep, ms, largest);
        }
    }
    if adm.zero {
        let sup = admitted.iter().map(|&k| ms.clusters[k].solution.sup_norm()).fold(0.0, f64::max);
        rep.margin("zero", ZERO_TOL - sup);
        if sup > ZERO_TOL {
            rep.note(format!("non-trivial solution with sup norm {sup:e}"));
            rep.judge(Verdict::from_margin(-sup, slack));
            if rep.is_violated() {
                keep_solutions(&mut rep, ms, &admitted);
            }
        }
    }
    cap_exploratory(&mut rep, &adm);
    if adm.above_threshold() && rep.verdict == Verdict::Consistent {
        rep.verdict = Verdict::Inconclusive;
    }
    Ok(rep)
}

/// Multi-start with budget `cfg.starts`; consistent iff the admissible
/// solutions form at most one cluster (the zero field for the signed family).
pub fn uniqueness_experiment(
    p: &ProblemSpec,
    op: &DiscreteOperator,
    cfg: &MultiStartConfig,
    slack: f64,
) -> Result<ExperimentReport> {
    if matches!(p.variant, Variant::Toda { .. } | Variant::SingularToda { .. }) {
        return toda_collapse_experiment(p, op, cfg, slack);
    }
    let started = Instant::now();
    let problem = DiscreteProblem::new(p, op)?;
    let ms = multi_start_on(&problem, cfg)?;
    let mut rep = uniqueness_from(&problem, &ms, slack)?;
    rep.runtime = started.elapsed();
    Ok(rep)
}

fn check_symmetric_setup(problem: &DiscreteProblem, axis: &Axis) -> Result<()> {
    let mesh = problem.mesh();
    if let Some(d) = mesh.domain() {
        if !d.is_symmetric_about(axis) {
            return Err(Error::AsymmetricSetup(format!("domain is not symmetric about {axis:?}")));
        }
    }
    let g = ScalarField::new(mesh.clone(), problem.boundary().to_vec())?;
    let r = reflected(&g, axis).map_err(|e| Error::AsymmetricSetup(e.to_string()))?;
    let scale = g.sup_norm().max(1.0);
    for &b in mesh.boundary_nodes() {
        if (r[b] - g.values()[b]).abs() > 1e-9 * scale {
            return Err(Error::AsymmetricSetup(format!("boundary data is not symmetric at node {b}")));
        }
    }
    if problem.spec().variant.is_singular() {
        let pole = problem.spec().pole();
        let q = axis.reflect(pole);
        if (q[0] - pole[0]).hypot(q[1] - pole[1]) > 1e-12 {
            return Err(Error::AsymmetricSetup("singular pole is off the axis".into()));
        }
    }
    Ok(())
}

/// Symmetry verdict for the clusters of a finished multi-start: every
/// admissible solution must have symmetry defect at most `10 ε_h` about each axis.
pub fn symmetry_from(
    problem: &DiscreteProblem,
    ms: &MultiStartResult,
    axes: &[Axis],
    slack: f64,
) -> Result<ExperimentReport> {
    for axis in axes {
        check_symmetric_setup(problem, axis)?;
    }
    let spec = problem.spec();
    let constants = spec.validate()?;
    let adm = admission(spec, &constants);
    let tag = if matches!(spec.variant, Variant::CosmicString { .. }) { TheoremTag::C1_8 } else { TheoremTag::C1_2 };
    let digest = inputs_digest(spec, problem.operator(), &(axes, ms.starts.len()));
    let mut rep = ExperimentReport::new(format!("symmetry/{}", spec.variant.name()), tag, digest, slack);
    adm.record(&mut rep);
    record_clusters(&mut rep, ms);
    rep.threshold("defect", 10.0 * slack);
    let mut any = false;
    for (k, c) in ms.clusters.iter().enumerate() {
        if !adm.admits(&c.solution, slack) {
            continue;
        }
        any = true;
        let mut worst: f64 = 0.0;
        for (i, f) in c.solution.fields.iter().enumerate() {
            for (j, axis) in axes.iter().enumerate() {
                let d = symmetry_defect(f, axis)?;
                rep.margin(format!("cluster{k}/u{}/axis{j}", i + 1), -d);
                worst = worst.max(d);
            }
        }
        rep.judge(Verdict::from_margin(-worst, 10.0 * slack));
        if rep.is_violated() {
            keep_solutions(&mut rep, ms, &[k]);
        }
    }
    if !any {
        rep.note("no admissible solution found");
        rep.judge(Verdict::Inconclusive);
    }
    cap_exploratory(&mut rep, &adm);
    Ok(rep)
}

/// Multi-start, then [`symmetry_from`].
pub fn symmetry_experiment(
    p: &ProblemSpec,
    op: &DiscreteOperator,
    axes: &[Axis],
    cfg: &MultiStartConfig,
    slack: f64,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let problem = DiscreteProblem::new(p, op)?;
    for axis in axes {
        check_symmetric_setup(&problem, axis)?;
    }
    let ms = multi_start_on(&problem, cfg)?;
    let mut rep = symmetry_from(&problem, &ms, axes, slack)?;
    rep.runtime = started.elapsed();
    Ok(rep)
}

/// No-intersection check for two cosmic-string solutions: under the mass
/// hypothesis `u2 - u1` must keep one sign at the interior nodes.
pub fn intersection_check(
    p: &ProblemSpec,
    op: &DiscreteOperator,
    u1: &ScalarField,
    u2: &ScalarField,
    slack: f64,
) -> Result<ExperimentReport> {
    if !matches!(p.variant, Variant::CosmicString { .. }) {
        return Err(Error::PreconditionViolated("intersection_check needs a cosmic-string problem".into()));
    }
    let started = Instant::now();
    let problem = DiscreteProblem::new(p, op)?;
    let constants = p.validate()?;
    let digest = digest_of(&(p, op.mesh().digest(), u1.values(), u2.values()));
    let mut rep = ExperimentReport::new("intersection/cosmic-string", TheoremTag::T1_7, digest, slack);
    let m1 = problem.masses(&[u1.values().to_vec()])?["gamma"];
    let m2 = problem.masses(&[u2.values().to_vec()])?["gamma"];
    let bound = constants.threshold("pair-mass").expect("cosmic pair bound");
    let total = m1 + m2;
    rep.mass("gamma1", m1).mass("gamma2", m2).mass("pair", total).threshold("pair", bound);
    rep.margin("pair-mass", (bound - total) / bound);
    let diff = u2.zip_with(u1, |a, b| a - b)?;
    let mesh = u1.mesh();
    let (mut above, mut below) = (0.0f64, 0.0f64);
    for i in mesh.interior_nodes() {
        let d = diff.values()[i];
        above = above.max(d);
        below = below.max(-d);
    }
    let crossing = above.min(below);
    rep.margin("crossing", -crossing);
    let hypothesis = total <= bound * (1.0 + slack);
    if hypothesis {
        for (name, u) in [("u1", u1), ("u2", u2)] {
            let r = norm2(&problem.residual(std::slice::from_ref(u))?);
            if r > SOLUTION_TOL {
                return Err(Error::PreconditionViolated(format!("{name} is not a solution (residual {r:e})")));
            }
        }
    }
    if (total - bound).abs() <= slack * bound {
        rep.note("pair mass is at the bound (equality case treated as in-hypothesis)");
    }
    if hypothesis {
        rep.judge(Verdict::from_margin(-crossing, slack));
        if rep.is_violated() {
            rep.keep("u1", u1).keep("u2", u2);
        }
    } else {
        rep.note("mass hypothesis unmet");
        rep.judge(Verdict::Inconclusive);
    }
    if crossing <= slack {
        rep.note(if above.max(below) <= slack { "fields coincide" } else { "fields are ordered" });
    }
    rep.runtime = started.elapsed();
    Ok(rep)
}

/// Collapse check for a Toda-type system: every cluster under the mass bound
/// must have `u1 = u2` up to `10 ε_h`, and the common field must solve the
/// collapsed scalar equation `-Δu = D h e^u`.
pub fn toda_collapse_experiment(
    p: &ProblemSpec,
    op: &DiscreteOperator,
    cfg: &MultiStartConfig,
    slack: f64,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let problem = DiscreteProblem::new(p, op)?;
    let ms = multi_start_on(&problem, cfg)?;
    let mut rep = toda_collapse_from(&problem, &ms, slack)?;
    rep.runtime = started.elapsed();
    Ok(rep)
}

pub fn toda_collapse_from(problem: &DiscreteProblem, ms: &MultiStartResult, slack: f64) -> Result<ExperimentReport> {
    let spec = problem.spec();
    let singular = match spec.variant {
        Variant::Toda { .. } => false,
        Variant::SingularToda { .. } => true,
        _ => return Err(Error::PreconditionViolated("collapse experiment needs a Toda-type system".into())),
    };
    let constants = spec.validate()?;
    let adm = admission(spec, &constants);
    let d = constants.d.expect("Toda constants");
    let collapsed_bound = constants.threshold("collapsed-mass").expect("Toda constants");
    let digest = inputs_digest(spec, problem.operator(), &ms.starts.len());
    let mut rep = ExperimentReport::new(format!("collapse/{}", spec.variant.name()), adm.tag, digest, slack);
    adm.record(&mut rep);
    rep.threshold("collapsed-mass", collapsed_bound).threshold("difference", 10.0 * slack);
    record_clusters(&mut rep, ms);
    let mut any = false;
    for (k, c) in ms.clusters.iter().enumerate() {
        if !adm.admits(&c.solution, slack) {
            continue;
        }
        any = true;
        let [u1, u2] = [&c.solution.fields[0], &c.solution.fields[1]];
        let gap = u1.zip_with(u2, |a, b| (a - b).abs())?.max();
        let mean = u1.zip_with(u2, |a, b| 0.5 * (a + b))?;
        // both equations reduce to the collapsed one at (ū, ū)
        let residual = norm2(&problem.residual(&[mean.clone(), mean.clone()])?);
        let mass_label = if singular { "h e^u1" } else { "e^u1" };
        let collapsed = d * c.solution.mass(mass_label).unwrap_or(f64::NAN);
        rep.margin(format!("cluster{k}/difference"), -gap);
        rep.margin(format!("cluster{k}/collapsed-residual"), SOLUTION_TOL - residual);
        rep.margin(format!("cluster{k}/collapsed-mass"), (collapsed_bound - collapsed) / collapsed_bound);
        rep.mass(format!("cluster{k}/collapsed"), collapsed);
        rep.judge(Verdict::from_margin(-gap, 10.0 * slack));
        rep.judge(Verdict::from_margin((collapsed_bound - collapsed) / collapsed_bound, slack));
        if residual > SOLUTION_TOL {
            rep.note(format!("cluster {k}: collapsed residual {residual:e} above {SOLUTION_TOL:e}"));
            rep.judge(Verdict::Inconclusive);
        }
        if !singular {
            // independent solve of -Δu = D e^u from the collapsed field
            let gelfand = ProblemSpec { variant: Variant::Gelfand { rho: d }, ..spec.clone() };
            let gp = DiscreteProblem::new(&gelfand, problem.operator())?;
            match gp.solve(&[mean.values().to_vec()], &NewtonConfig::default()) {
                Ok(s) => {
                    let dist = s.field().zip_with(&mean, |a, b| (a - b).abs())?.max();
                    rep.margin(format!("cluster{k}/scalar-distance"), -dist);
                }
                Err(e) => {
                    rep.note(format!("cluster {k}: scalar solve failed: {e}"));
                }
            }
        }
        if rep.is_violated() {
            keep_solutions(&mut rep, ms, &[k]);
        }
    }
    if !any {
        rep.note("no cluster under the mass bound");
        rep.judge(Verdict::Inconclusive);
    }
    Ok(rep)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub parameter: f64,
    pub clusters: usize,
    pub exploratory: bool,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub variant: String,
    pub threshold: Option<f64>,
    pub points: Vec<SweepPoint>,
    /// Smallest parameter with more than one cluster.
    pub first_multiplicity: Option<f64>,
    pub trace: Option<ContinuationTrace>,
    #[serde(skip)]
    pub reports: Vec<ExperimentReport>,
}

/// Uniqueness experiment at every grid value of the primary parameter, plus a
/// continuation run across the grid range with steps no longer than the grid
/// spacing. Grid points above the threshold are exploratory.
pub fn threshold_sweep(
    p: &ProblemSpec,
    op: &DiscreteOperator,
    grid: &[f64],
    cfg: &MultiStartConfig,
    slack: f64,
) -> Result<SweepReport> {
    if grid.is_empty() {
        return Err(Error::PreconditionViolated("empty parameter grid".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    let mut reports = Vec::with_capacity(grid.len());
    let mut threshold = None;
    for &v in grid {
        let q = p.with_parameter(v);
        let constants = q.validate()?;
        let adm = admission(&q, &constants);
        threshold = threshold.or(adm.parameter_bound.map(|(_, b)| b));
        let started = Instant::now();
        let problem = DiscreteProblem::new(&q, op)?;
        let ms = multi_start_on(&problem, cfg)?;
        let mut rep = if matches!(q.variant, Variant::Toda { .. } | Variant::SingularToda { .. }) {
            toda_collapse_from(&problem, &ms, slack)?
        } else {
            uniqueness_from(&problem, &ms, slack)?
        };
        rep.runtime = started.elapsed();
        rep.id = format!("sweep/{}/{v}", q.variant.name());
        points.push(SweepPoint {
            parameter: v,
            clusters: ms.cluster_count(),
            exploratory: adm.above_threshold(),
            verdict: rep.verdict,
        });
        reports.push(rep);
    }
    let first_multiplicity = points.iter().find(|s| s.clusters > 1).map(|s| s.parameter);
    let trace = if grid.len() > 1 {
        let (lo, hi) = (grid[0], grid[grid.len() - 1]);
        let step = grid.windows(2).map(|w| (w[1] - w[0]).abs()).fold(f64::INFINITY, f64::min);
        let mut cc = ContinuationConfig::new(lo, hi, step);
        cc.max_step = Some(step);
        cc.newton = cfg.newton.clone();
        continuation(p, op, None, &cc).ok().map(|(t, _)| t)
    } else {
        None
    };
    Ok(SweepReport { variant: p.variant.name().into(), threshold, points, first_multiplicity, trace, reports })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::geometry::{build_mesh, DomainSpec};

    fn disk(h: f64) -> DiscreteOperator {
        DiscreteOperator::assemble(Arc::new(build_mesh(&DomainSpec::unit_disk(), h).unwrap())).unwrap()
    }

    fn small() -> MultiStartConfig {
        MultiStartConfig { starts: 8, ..MultiStartConfig::default() }
    }

    #[test]
    fn signed_family_is_trivial() {
        let op = disk(0.15);
        let p = ProblemSpec::new(Variant::SinhGordonSigned { rho: 0.9 * 4.0 * PI, a: 1.0 });
        let rep = uniqueness_experiment(&p, &op, &small(), 1e-3).unwrap();
        assert_eq!(rep.verdict, Verdict::Consistent, "{:?}", rep.notes);
        assert_eq!(rep.theorem, TheoremTag::T1_4);
        assert!(rep.margins["zero"] >= 0.0);
    }

    #[test]
    fn gelfand_is_never_judged() {
        let op = disk(0.15);
        let p = ProblemSpec::new(Variant::Gelfand { rho: 1.0 });
        let rep = uniqueness_experiment(&p, &op, &small(), 1e-3).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn reflection_does_not_cross() {
        let op = disk(0.15);
        let p = ProblemSpec::new(Variant::cosmic_string(1.0, 1.0));
        let problem = DiscreteProblem::new(&p, &op).unwrap();
        let u0 = vec![problem.boundary().to_vec()];
        let s = problem.solve(&u0, &NewtonConfig::default()).unwrap();
        let u = s.field().clone();
        let r = ScalarField::new(op.mesh().clone(), reflected(&u, &Axis::x_axis()).unwrap()).unwrap();
        let rep = intersection_check(&p, &op, &u, &r, 1e-4).unwrap();
        assert_eq!(rep.verdict, Verdict::Consistent, "{:?}", rep.notes);
    }

    #[test]
    fn synthetic_crossing_above_the_bound_is_inconclusive() {
        let op = disk(0.15);
        let p = ProblemSpec::new(Variant::cosmic_string(1.0, 1.0));
        let bump = |s: f64| {
            ScalarField::from_fn(op.mesh(), move |x| 3.0 * (1.0 - x[0] * x[0] - x[1] * x[1]) * (1.0 + s * x[0]))
                .unwrap()
        };
        let rep = intersection_check(&p, &op, &bump(0.5), &bump(-0.5), 1e-4).unwrap();
        assert!(rep.masses["pair"] > rep.thresholds["pair"]);
        assert!(rep.margins["crossing"] < -0.1);
        assert_eq!(rep.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn asymmetric_data_is_rejected() {
        let op = disk(0.2);
        let p = ProblemSpec::new(Variant::MeanField { rho: 1.0 })
            .with_boundary(crate::geometry::BoundaryData::from_fn(op.mesh(), |x| x[1].max(0.0)));
        assert!(matches!(
            symmetry_experiment(&p, &op, &[Axis::x_axis()], &small(), 1e-3),
            Err(Error::AsymmetricSetup(_))
        ));
    }
}
