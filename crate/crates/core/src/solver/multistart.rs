use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::newton::{NewtonConfig, SolveResult, SolveSummary};
use super::DiscreteOperator;
use crate::error::Result;
use crate::problems::{DiscreteProblem, ProblemSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct MultiStartConfig {
    pub starts: usize,
    pub seed: u64,
    /// Converged results closer than this in `‖·‖_∞` share a cluster.
    pub cluster_tol: f64,
    /// Worker threads; results are merged in start order either way.
    pub jobs: usize,
    pub newton: NewtonConfig,
}

impl Default for MultiStartConfig {
    fn default() -> Self {
        MultiStartConfig { starts: 20, seed: 0, cluster_tol: 1e-4, jobs: 1, newton: NewtonConfig::default() }
    }
}

/// How one start was generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StartKind {
    Constant { value: f64 },
    Bump { height: f64, width: f64, center: [f64; 2] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub index: usize,
    /// One entry per component.
    pub kinds: Vec<StartKind>,
    pub summary: Option<SolveSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Cluster of a converged start.
    pub cluster: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Cluster {
    /// Start indices, in order; the first is the representative.
    pub members: Vec<usize>,
    pub solution: SolveResult,
}

#[derive(Clone, Debug)]
pub struct MultiStartResult {
    pub starts: Vec<StartRecord>,
    pub clusters: Vec<Cluster>,
}

impl MultiStartResult {
    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn converged_count(&self) -> usize {
        self.starts.iter().filter(|s| s.cluster.is_some()).count()
    }
}

/// The constant part of the start menu: 0, ±1, ±3.
const CONSTANTS: [f64; 5] = [0.0, 1.0, -1.0, 3.0, -3.0];

/// Deterministic list of `k` start descriptions for a problem with
/// `components` unknown fields.
pub fn start_menu(problem: &DiscreteProblem, k: usize, seed: u64) -> Vec<Vec<StartKind>> {
    let mesh = problem.mesh();
    let nc = problem.components();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = bounding_box(mesh.nodes());
    let diam = mesh.domain().map(|d| d.diameter()).unwrap_or_else(|| (hi[0] - lo[0]).hypot(hi[1] - lo[1]));
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        if let Some(&c) = CONSTANTS.get(i) {
            out.push(vec![StartKind::Constant { value: c }; nc]);
            continue;
        }
        let kinds = (0..nc)
            .map(|_| {
                let height = rng.random_range(-4.0..=4.0);
                let width = rng.random_range(0.1..=0.5) * diam;
                let center = loop {
                    let p = [rng.random_range(lo[0]..=hi[0]), rng.random_range(lo[1]..=hi[1])];
                    if mesh.locator().locate(mesh, p).is_some() {
                        break p;
                    }
                };
                StartKind::Bump { height, width, center }
            })
            .collect();
        out.push(kinds);
    }
    out
}

fn bounding_box(nodes: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in nodes {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    (lo, hi)
}

/// Nodal initial field: the boundary data on the boundary, the start inside.
pub fn start_field(problem: &DiscreteProblem, kind: &StartKind) -> Vec<f64> {
    let mesh = problem.mesh();
    let mut u: Vec<f64> = match kind {
        StartKind::Constant { value } => vec![*value; mesh.num_nodes()],
        StartKind::Bump { height, width, center } => mesh
            .nodes()
            .iter()
            .map(|x| {
                let d2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                height * (-d2 / (2.0 * width * width)).exp()
            })
            .collect(),
    };
    for &b in mesh.boundary_nodes() {
        u[b] = problem.boundary()[b];
    }
    u
}

fn run_start(problem: &DiscreteProblem, kinds: &[StartKind], cfg: &NewtonConfig) -> Result<SolveResult> {
    let initial: Vec<Vec<f64>> = kinds.iter().map(|k| start_field(problem, k)).collect();
    problem.iterate(&initial, cfg)
}

/// Runs Newton from `cfg.starts` initial guesses (0, ±1, ±3, then seeded
/// Gaussian bumps) and clusters the converged results.
pub fn multi_start(p: &ProblemSpec, op: &DiscreteOperator, cfg: &MultiStartConfig) -> Result<MultiStartResult> {
    let problem = DiscreteProblem::new(p, op)?;
    multi_start_on(&problem, cfg)
}

pub fn multi_start_on(problem: &DiscreteProblem, cfg: &MultiStartConfig) -> Result<MultiStartResult> {
    if cfg.starts == 0 {
        return Err(crate::error::Error::PreconditionViolated("multi-start needs at least one start".into()));
    }
    let menu = start_menu(problem, cfg.starts, cfg.seed);
    let jobs = cfg.jobs.max(1).min(menu.len());
    let mut outcomes: Vec<Option<Result<SolveResult>>> = (0..menu.len()).map(|_| None).collect();
    if jobs == 1 {
        for (i, kinds) in menu.iter().enumerate() {
            outcomes[i] = Some(run_start(problem, kinds, &cfg.newton));
        }
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..jobs)
                .map(|j| {
                    let menu = &menu;
                    scope.spawn(move || {
                        (j..menu.len())
                            .step_by(jobs)
                            .map(|i| (i, run_start(problem, &menu[i], &cfg.newton)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (i, r) in h.join().expect("multi-start worker panicked") {
                    outcomes[i] = Some(r);
                }
            }
        });
    }
    let mut starts = Vec::with_capacity(menu.len());
    let mut clusters: Vec<Cluster> = Vec::new();
    for (index, (kinds, outcome)) in menu.into_iter().zip(outcomes).enumerate() {
        let mut record = StartRecord { index, kinds, summary: None, error: None, cluster: None };
        match outcome.expect("every start runs") {
            Ok(r) => {
                record.summary = Some(r.summary());
                if r.converged {
                    let hit = clusters.iter().position(|c| c.solution.distance(&r) <= cfg.cluster_tol);
                    match hit {
                        Some(c) => {
                            clusters[c].members.push(index);
                            record.cluster = Some(c);
                        }
                        None => {
                            record.cluster = Some(clusters.len());
                            clusters.push(Cluster { members: vec![index], solution: r });
                        }
                    }
                }
            }
            Err(e) => record.error = Some(e.to_string()),
        }
        starts.push(record);
    }
    Ok(MultiStartResult { starts, clusters })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::geometry::{build_mesh, DomainSpec};
    use crate::problems::Variant;

    #[test]
    fn gelfand_has_two_clusters_and_is_deterministic() {
        let op = DiscreteOperator::assemble(Arc::new(build_mesh(&DomainSpec::unit_disk(), 0.1).unwrap())).unwrap();
        let spec = ProblemSpec::new(Variant::Gelfand { rho: 1.0 });
        let cfg = MultiStartConfig { starts: 20, seed: 7, ..MultiStartConfig::default() };
        let a = multi_start(&spec, &op, &cfg).unwrap();
        assert_eq!(a.cluster_count(), 2);
        let b = multi_start(&spec, &op, &MultiStartConfig { jobs: 3, ..cfg }).unwrap();
        assert_eq!(a.starts, b.starts);
        let mut masses: Vec<f64> = a.clusters.iter().map(|c| c.solution.mass("e^u").unwrap()).collect();
        masses.sort_by(f64::total_cmp);
        assert!((masses[0] + masses[1] - 8.0 * std::f64::consts::PI).abs() < 0.2, "{masses:?}");
    }
}
