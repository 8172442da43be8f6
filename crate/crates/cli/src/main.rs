mod config;
mod plot;
mod run;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Experiment, ExperimentKind, RunConfig};
use run::{export_mesh, load_mesh, Runner};

/// Finite element experiments on Liouville-type equations.
#[derive(Parser)]
#[command(name = "liouville", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON, or TOML by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Uniform refinements applied after meshing; overrides the config.
    #[arg(long, global = true)]
    refine: Option<usize>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem once and write the field snapshot.
    Solve,
    /// Run the configured experiments, or only the one named by --experiment.
    Verify {
        #[arg(long)]
        experiment: Option<String>,
    },
    /// Run the acceptance battery.
    Suite {
        /// Criteria to run (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<u8>>,
    },
    /// Threshold sweep of the primary parameter.
    Sweep {
        /// Comma-separated parameter grid; defaults to the config's sweep experiments.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Option<Vec<f64>>,
    },
    /// Build (or load and refine) a mesh and export it.
    Mesh {
        /// Mesh document to refine instead of meshing the configured domain.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Plot a radial profile or trace CSV, or a solution document, as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        /// Mesh document for solution plots (default: mesh.json next to the input or above it).
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Output file (default: the input with an .svg extension, under --out if given).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("liouville: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let mut cfg = match &c.config {
        Some(p) => match RunConfig::load(p) {
            Ok(cfg) => cfg,
            Err(e) => return fail(2, e),
        },
        None => RunConfig::default(),
    };
    if let Some(o) = &c.out {
        cfg.out = o.clone();
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(r) = c.refine {
        cfg.mesh.refinements = r;
    }
    if let Some(j) = c.jobs {
        cfg.budget.jobs = j;
    }
    match &cli.command {
        Command::Solve => {
            if cfg.problem.is_none() {
                return fail(2, "solve needs a config with a problem section");
            }
            cfg.experiments = vec![Experiment { id: Some("solve".into()), kind: ExperimentKind::Solve }];
        }
        Command::Verify { experiment } => {
            if let Some(want) = experiment {
                let ids = cfg.experiment_ids();
                match ids.iter().position(|i| i == want) {
                    Some(k) => {
                        let mut e = cfg.experiments[k].clone();
                        e.id = Some(want.clone());
                        cfg.experiments = vec![e];
                    }
                    None => return fail(2, format!("no experiment {want:?}; the config has {ids:?}")),
                }
            }
        }
        Command::Suite { criteria } => {
            if c.config.is_none() && c.refine.is_none() {
                cfg.mesh.refinements = 1;
            }
            cfg.experiments = vec![Experiment {
                id: Some("acceptance".into()),
                kind: ExperimentKind::Acceptance { criteria: criteria.clone() },
            }];
        }
        Command::Sweep { grid } => {
            if cfg.problem.is_none() {
                return fail(2, "sweep needs a config with a problem section");
            }
            match grid {
                Some(g) => {
                    cfg.experiments =
                        vec![Experiment { id: Some("sweep".into()), kind: ExperimentKind::Sweep { grid: g.clone() } }]
                }
                None => {
                    cfg.experiments.retain(|e| matches!(e.kind, ExperimentKind::Sweep { .. }));
                    if cfg.experiments.is_empty() {
                        return fail(2, "no --grid given and the config has no sweep experiment");
                    }
                }
            }
        }
        Command::Mesh { input } => {
            if let Some(p) = input {
                cfg.mesh.file = Some(p.clone());
            }
            let mesh = match load_mesh(&cfg) {
                Ok(m) => m,
                Err(e) => return fail(1, e),
            };
            return match export_mesh(&mesh, &cfg.out) {
                Ok(paths) => {
                    if !c.quiet {
                        println!(
                            "{} nodes, {} triangles, h_max {:.4}",
                            mesh.num_nodes(),
                            mesh.num_triangles(),
                            mesh.h_max()
                        );
                        for p in paths {
                            println!("{}", p.display());
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(1, e),
            };
        }
        Command::Plot { input, mesh, output } => {
            let target = match output {
                Some(o) => o.clone(),
                None => {
                    let name = input.with_extension("svg");
                    match &c.out {
                        Some(dir) => dir.join(name.file_name().unwrap_or_default()),
                        None => name,
                    }
                }
            };
            return match plot::plot_file(input, mesh.as_deref(), &target) {
                Ok(()) => {
                    if !c.quiet {
                        println!("{}", target.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(1, e),
            };
        }
    }
    if let Err(e) = cfg.check() {
        return fail(2, e);
    }
    let runner = Runner { cfg, quiet: c.quiet };
    match runner.run() {
        Ok(m) => {
            if !c.quiet {
                println!(
                    "{} report(s), status {:?}, manifest {}",
                    m.report_count(),
                    m.status,
                    runner.cfg.out.join("manifest.json").display()
                );
            }
            ExitCode::from(m.exit_code() as u8)
        }
        Err(e) => fail(1, e),
    }
}
