use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::time::Instant;

use liouville_core::field::{reflected, FieldSnapshot, ScalarField};
use liouville_core::geometry::{build_refined, Axis, Mesh, MeshDocument};
use liouville_core::problems::{DiscreteProblem, ProblemSpec};
use liouville_core::solver::{
    continuation, multi_start_on, ContinuationConfig, ContinuationTrace, DiscreteOperator, MultiStartConfig,
    SolveResult, SolveSummary,
};
use liouville_core::verify::{
    bol_check, calibrate_slack, digest_of, intersection_check, summary_csv, symmetry_experiment, threshold_sweep,
    toda_collapse_experiment, uniqueness_experiment, CriterionOutcome, ExperimentReport, Suite, SuiteConfig, Verdict,
    CRITERIA,
};
use serde::{Deserialize, Serialize};

use crate::config::{Experiment, ExperimentKind, RunConfig, SCHEMA_VERSION};
use crate::svg::{self, Series};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub id: String,
    pub theorem: String,
    pub verdict: Verdict,
    pub path: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub kind: String,
    pub reports: Vec<ReportEntry>,
    pub artifacts: Vec<String>,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshInfo {
    pub digest: String,
    pub nodes: usize,
    pub triangles: usize,
    pub h_max: f64,
    /// Discretization slack the verdicts were judged against.
    pub slack: f64,
    pub path: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Violated,
    Failed,
}

/// Index of a run. Wall-clock times live here and nowhere else.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub artifact_version: String,
    pub config_digest: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshInfo>,
    pub experiments: Vec<ManifestEntry>,
    pub summary: String,
    pub status: Status,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn report_count(&self) -> usize {
        self.experiments.iter().map(|e| e.reports.len()).sum()
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            _ => 1,
        }
    }
}

struct Artifact {
    path: String,
    bytes: Vec<u8>,
}

struct Outcome {
    index: usize,
    id: String,
    kind: &'static str,
    reports: Vec<ExperimentReport>,
    artifacts: Vec<Artifact>,
    error: Option<String>,
    wall: f64,
}

struct Shared {
    op: DiscreteOperator,
    slack: f64,
}

pub struct Runner {
    pub cfg: RunConfig,
    pub quiet: bool,
}

fn safe(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

fn json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

#[derive(Serialize)]
struct SolveDocument<'a> {
    problem: &'a ProblemSpec,
    summary: SolveSummary,
    fields: Vec<FieldSnapshot>,
}

pub fn load_mesh(cfg: &RunConfig) -> Result<Mesh, String> {
    let mut mesh = match &cfg.mesh.file {
        Some(f) => {
            let text = fs::read_to_string(f).map_err(|e| format!("{}: {e}", f.display()))?;
            let mesh = Mesh::from_json(&text).map_err(|e| format!("{}: {e}", f.display()))?;
            let mut m = mesh;
            for _ in 0..cfg.mesh.refinements {
                m = m.refine().map_err(|e| e.to_string())?;
            }
            return Ok(m);
        }
        None => build_refined(&cfg.domain, cfg.mesh.target_h, 0).map_err(|e| e.to_string())?,
    };
    for _ in 0..cfg.mesh.refinements {
        mesh = mesh.refine().map_err(|e| e.to_string())?;
    }
    Ok(mesh)
}

/// Samples `u` along the ray from the domain centre in the `+x` direction.
fn ray_profile(u: &ScalarField, center: [f64; 2]) -> Vec<(f64, f64)> {
    let reach = u.mesh().nodes().iter().map(|p| (p[0] - center[0]).hypot(p[1] - center[1])).fold(0.0, f64::max);
    (0..=128)
        .filter_map(|k| {
            let r = reach * k as f64 / 128.0;
            u.eval([center[0] + r, center[1]]).map(|v| (r, v))
        })
        .collect()
}

fn profile_csv(points: &[(f64, f64)]) -> String {
    let mut s = String::from("r,value\n");
    for (r, v) in points {
        s.push_str(&format!("{r},{v}\n"));
    }
    s
}

fn trace_plot(trace: &ContinuationTrace) -> String {
    let mut series = vec![Series::new("sup norm", trace.points.iter().map(|p| (p.parameter, p.norm)).collect())];
    if let Some(first) = trace.points.first() {
        for label in first.masses.keys() {
            series.push(Series::new(
                label.clone(),
                trace.points.iter().map(|p| (p.parameter, p.masses.get(label).copied().unwrap_or(f64::NAN))).collect(),
            ));
        }
    }
    svg::line_plot(&format!("{} continuation", trace.variant), "parameter", "norm / mass", &series)
}

impl Shared {
    fn problem<'a>(&'a self, spec: &ProblemSpec) -> liouville_core::Result<DiscreteProblem<'a>> {
        DiscreteProblem::new(spec, &self.op)
    }

    fn solve(&self, spec: &ProblemSpec, cfg: &RunConfig) -> liouville_core::Result<SolveResult> {
        let problem = self.problem(spec)?;
        let start = vec![problem.boundary().to_vec(); problem.components()];
        problem.solve(&start, &cfg.newton)
    }
}

impl Runner {
    fn multi_start(&self, jobs: usize) -> MultiStartConfig {
        MultiStartConfig {
            starts: self.cfg.budget.starts,
            seed: self.cfg.seed,
            cluster_tol: self.cfg.budget.cluster_tol,
            jobs,
            newton: self.cfg.newton.clone(),
        }
    }

    fn execute(
        &self,
        exp: &Experiment,
        id: &str,
        shared: Option<&Shared>,
        jobs: usize,
    ) -> Result<(Vec<ExperimentReport>, Vec<Artifact>), String> {
        let e = |x: liouville_core::Error| x.to_string();
        let ms = self.multi_start(jobs);
        let mut reports = Vec::new();
        let mut artifacts = Vec::new();
        if let ExperimentKind::Acceptance { criteria } = &exp.kind {
            let sc = SuiteConfig {
                target_h: self.cfg.mesh.target_h,
                refinements: self.cfg.mesh.refinements,
                starts: self.cfg.budget.starts,
                seed: self.cfg.seed,
                jobs,
            };
            let suite = Suite::new(sc).map_err(e)?;
            let ids: Vec<u8> = criteria.clone().unwrap_or_else(|| CRITERIA.iter().map(|c| c.0).collect());
            let mut outcomes: Vec<CriterionOutcome> = Vec::new();
            for c in ids {
                let out = suite.criterion(c);
                if !self.quiet {
                    println!("{}", out.line());
                }
                outcomes.push(out);
            }
            let text: String = outcomes.iter().map(|o| o.line() + "\n").collect();
            artifacts.push(Artifact { path: format!("{id}/acceptance.txt"), bytes: text.into_bytes() });
            artifacts.push(Artifact { path: format!("{id}/criteria.json"), bytes: json(&outcomes) });
            reports.extend(outcomes.into_iter().map(|o| o.report));
            return Ok((reports, artifacts));
        }
        let shared = shared.expect("mesh built for problem experiments");
        let spec = self.cfg.problem.as_ref().expect("checked by the config");
        match &exp.kind {
            ExperimentKind::Solve => {
                let sol = self.shared_solve(shared, spec)?;
                let mesh = shared.op.mesh();
                let doc = SolveDocument {
                    problem: spec,
                    summary: sol.summary(),
                    fields: sol.fields.iter().map(ScalarField::snapshot).collect(),
                };
                artifacts.push(Artifact { path: format!("{id}/solution.json"), bytes: json(&doc) });
                let center = self.cfg.domain.center();
                for (i, u) in sol.fields.iter().enumerate() {
                    let name = format!("u{}", i + 1);
                    artifacts.push(Artifact { path: format!("{id}/{name}.csv"), bytes: u.to_csv().into_bytes() });
                    artifacts.push(Artifact {
                        path: format!("{id}/{name}.svg"),
                        bytes: svg::field_plot(mesh, u.values(), &name).into_bytes(),
                    });
                    let prof = ray_profile(u, center);
                    artifacts.push(Artifact {
                        path: format!("{id}/{name}-profile.csv"),
                        bytes: profile_csv(&prof).into_bytes(),
                    });
                    artifacts.push(Artifact {
                        path: format!("{id}/{name}-profile.svg"),
                        bytes: svg::line_plot(
                            &format!("{name} along +x"),
                            "r",
                            &name,
                            &[Series::new(name.clone(), prof)],
                        )
                        .into_bytes(),
                    });
                }
            }
            ExperimentKind::Uniqueness => {
                reports.push(uniqueness_experiment(spec, &shared.op, &ms, shared.slack).map_err(e)?);
            }
            ExperimentKind::Symmetry { axes } => {
                reports.push(symmetry_experiment(spec, &shared.op, axes, &ms, shared.slack).map_err(e)?);
            }
            ExperimentKind::Collapse => {
                reports.push(toda_collapse_experiment(spec, &shared.op, &ms, shared.slack).map_err(e)?);
            }
            ExperimentKind::Bol { region } => {
                let sol = self.shared_solve(shared, spec)?;
                reports.push(bol_check(sol.field(), region, shared.slack).map_err(e)?);
            }
            ExperimentKind::Intersection => {
                let problem = shared.problem(spec).map_err(e)?;
                let found = multi_start_on(&problem, &ms).map_err(e)?;
                let first = found.clusters.first().ok_or("no converged solution")?.solution.field().clone();
                let second = match found.clusters.get(1) {
                    Some(c) => c.solution.field().clone(),
                    None => {
                        let values = reflected(&first, &Axis::x_axis()).map_err(e)?;
                        ScalarField::new(first.mesh().clone(), values).map_err(e)?
                    }
                };
                reports.push(intersection_check(spec, &shared.op, &first, &second, shared.slack).map_err(e)?);
            }
            ExperimentKind::Sweep { grid } => {
                let sweep = threshold_sweep(spec, &shared.op, grid, &ms, shared.slack).map_err(e)?;
                artifacts.push(Artifact { path: format!("{id}/sweep.json"), bytes: json(&sweep) });
                let clusters: Vec<(f64, f64)> = sweep.points.iter().map(|p| (p.parameter, p.clusters as f64)).collect();
                artifacts.push(Artifact {
                    path: format!("{id}/clusters.svg"),
                    bytes: svg::line_plot(
                        &format!("{} clusters", sweep.variant),
                        "parameter",
                        "clusters",
                        &[Series::new("clusters", clusters)],
                    )
                    .into_bytes(),
                });
                if let Some(t) = &sweep.trace {
                    artifacts.push(Artifact { path: format!("{id}/trace.csv"), bytes: t.to_csv().into_bytes() });
                    artifacts.push(Artifact { path: format!("{id}/trace.svg"), bytes: trace_plot(t).into_bytes() });
                }
                reports.extend(sweep.reports);
            }
            ExperimentKind::Continuation { start, end, step } => {
                let mut cc = ContinuationConfig::new(*start, *end, *step);
                cc.newton = self.cfg.newton.clone();
                let (trace, _) = continuation(&spec.with_parameter(*start), &shared.op, None, &cc).map_err(e)?;
                artifacts.push(Artifact { path: format!("{id}/trace.json"), bytes: json(&trace) });
                artifacts.push(Artifact { path: format!("{id}/trace.csv"), bytes: trace.to_csv().into_bytes() });
                artifacts.push(Artifact { path: format!("{id}/trace.svg"), bytes: trace_plot(&trace).into_bytes() });
            }
            ExperimentKind::Acceptance { .. } => unreachable!(),
        }
        Ok((reports, artifacts))
    }

    fn shared_solve(&self, shared: &Shared, spec: &ProblemSpec) -> Result<SolveResult, String> {
        shared.solve(spec, &self.cfg).map_err(|x| x.to_string())
    }

    fn run_one(&self, index: usize, id: &str, exp: &Experiment, shared: Option<&Shared>, jobs: usize) -> Outcome {
        let started = Instant::now();
        let (reports, artifacts, error) = match self.execute(exp, id, shared, jobs) {
            Ok((r, a)) => (r, a, None),
            Err(msg) => (Vec::new(), Vec::new(), Some(msg)),
        };
        Outcome {
            index,
            id: id.to_string(),
            kind: exp.kind.name(),
            reports,
            artifacts,
            error,
            wall: started.elapsed().as_secs_f64(),
        }
    }

    /// Runs the configured experiments and writes every output under the
    /// output directory. Only the calling thread touches the filesystem.
    pub fn run(&self) -> Result<RunManifest, String> {
        let started = Instant::now();
        let out = self.cfg.out.clone();
        fs::create_dir_all(&out).map_err(|e| format!("{}: {e}", out.display()))?;
        let write = |rel: &str, bytes: &[u8]| -> Result<(), String> {
            let p: PathBuf = out.join(rel);
            if let Some(dir) = p.parent() {
                fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            }
            fs::write(&p, bytes).map_err(|e| format!("{}: {e}", p.display()))
        };
        write("config.json", &json(&self.cfg))?;
        let needs_mesh = self.cfg.experiments.iter().any(|e| !matches!(e.kind, ExperimentKind::Acceptance { .. }));
        let mut mesh_info = None;
        let shared = if needs_mesh {
            let mesh = Arc::new(load_mesh(&self.cfg)?);
            let slack = calibrate_slack(&mesh).map_err(|e| e.to_string())?;
            write("mesh.json", &json(&mesh.to_document()))?;
            mesh_info = Some(MeshInfo {
                digest: mesh.digest(),
                nodes: mesh.num_nodes(),
                triangles: mesh.num_triangles(),
                h_max: mesh.h_max(),
                slack,
                path: "mesh.json".into(),
            });
            Some(Shared { op: DiscreteOperator::assemble(mesh).map_err(|e| e.to_string())?, slack })
        } else {
            None
        };
        let ids = self.cfg.experiment_ids();
        let n = self.cfg.experiments.len();
        let jobs = self.cfg.budget.jobs.max(1);
        let workers = jobs.min(n).max(1);
        let inner_jobs = (jobs / workers).max(1);
        let next = AtomicUsize::new(0);
        let (tx, rx) = mpsc::channel::<Outcome>();
        let mut outcomes: Vec<Outcome> = Vec::with_capacity(n);
        let mut write_error = None;
        std::thread::scope(|s| {
            for _ in 0..workers {
                let tx = tx.clone();
                let (next, ids, shared) = (&next, &ids, shared.as_ref());
                s.spawn(move || loop {
                    let k = next.fetch_add(1, Ordering::SeqCst);
                    if k >= n {
                        break;
                    }
                    let o = self.run_one(k, &ids[k], &self.cfg.experiments[k], shared, inner_jobs);
                    if tx.send(o).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            for o in rx {
                if !self.quiet {
                    match &o.error {
                        Some(msg) => eprintln!("{}: error: {msg}", o.id),
                        None => {
                            for r in &o.reports {
                                println!("{} {} {} [{}]", o.id, r.id, r.verdict, r.theorem);
                            }
                        }
                    }
                }
                for a in &o.artifacts {
                    if let Err(err) = write(&a.path, &a.bytes) {
                        write_error.get_or_insert(err);
                    }
                }
                outcomes.push(o);
            }
        });
        if let Some(err) = write_error {
            return Err(err);
        }
        outcomes.sort_by_key(|o| o.index);
        let mut entries = Vec::with_capacity(n);
        let mut all_reports = Vec::new();
        for o in outcomes {
            let mut reports = Vec::new();
            for r in &o.reports {
                let path = format!("{}/reports/{}.json", o.id, safe(&r.id));
                write(&path, &json(r))?;
                for ev in r.evidence_snapshots() {
                    write(&format!("{}/evidence/{}-{}.json", o.id, safe(&r.id), safe(&ev.label)), &json(&ev))?;
                }
                reports.push(ReportEntry {
                    id: r.id.clone(),
                    theorem: r.theorem.to_string(),
                    verdict: r.verdict,
                    path,
                });
            }
            all_reports.extend(o.reports);
            entries.push(ManifestEntry {
                id: o.id,
                kind: o.kind.to_string(),
                reports,
                artifacts: o.artifacts.into_iter().map(|a| a.path).collect(),
                wall_time_s: o.wall,
                error: o.error,
            });
        }
        write("summary.csv", summary_csv(&all_reports).as_bytes())?;
        let status = if entries.iter().any(|e| e.error.is_some()) {
            Status::Failed
        } else if all_reports.iter().any(|r| r.is_violated()) {
            Status::Violated
        } else {
            Status::Ok
        };
        let manifest = RunManifest {
            schema_version: SCHEMA_VERSION,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest: digest_of(&self.cfg),
            seed: self.cfg.seed,
            mesh: mesh_info,
            experiments: entries,
            summary: "summary.csv".into(),
            status,
            wall_time_s: started.elapsed().as_secs_f64(),
        };
        write("manifest.json", &json(&manifest))?;
        Ok(manifest)
    }
}

/// Writes a mesh document and its wireframe plot.
pub fn export_mesh(mesh: &Mesh, out: &Path) -> Result<Vec<PathBuf>, String> {
    fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
    let doc: MeshDocument = mesh.to_document();
    let (a, b) = (out.join("mesh.json"), out.join("mesh.svg"));
    fs::write(&a, json(&doc)).map_err(|e| format!("{}: {e}", a.display()))?;
    fs::write(&b, svg::mesh_plot(mesh)).map_err(|e| format!("{}: {e}", b.display()))?;
    Ok(vec![a, b])
}
