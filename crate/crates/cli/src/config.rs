use std::fmt;
use std::path::{Path, PathBuf};

use liouville_core::geometry::{Axis, DomainSpec};
use liouville_core::problems::ProblemSpec;
use liouville_core::solver::NewtonConfig;
use liouville_core::verify::Region;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct MeshConfig {
    pub target_h: f64,
    pub refinements: usize,
    /// Mesh document to load instead of meshing `domain`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig { target_h: 0.05, refinements: 0, file: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Budget {
    /// Multi-start count `K`.
    pub starts: usize,
    pub cluster_tol: f64,
    /// Worker threads, shared between experiments and multi-start.
    pub jobs: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { starts: 20, cluster_tol: 1e-4, jobs: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// One Newton solve from the boundary data.
    Solve,
    Uniqueness,
    Symmetry {
        #[serde(default = "default_axes")]
        axes: Vec<Axis>,
    },
    /// Bol's inequality on the solution of a single Newton solve.
    Bol {
        #[serde(default = "default_region")]
        region: Region,
    },
    /// Toda collapse; `uniqueness` does the same for Toda systems.
    Collapse,
    /// Cosmic string no-crossing check between the first two clusters, or a
    /// solution and its mirror image.
    Intersection,
    Sweep {
        grid: Vec<f64>,
    },
    Continuation {
        start: f64,
        end: f64,
        step: f64,
    },
    /// The acceptance battery, one report per criterion.
    Acceptance {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        criteria: Option<Vec<u8>>,
    },
}

fn default_axes() -> Vec<Axis> {
    vec![Axis::x_axis(), Axis::y_axis()]
}

fn default_region() -> Region {
    Region::Whole
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::Uniqueness => "uniqueness",
            ExperimentKind::Symmetry { .. } => "symmetry",
            ExperimentKind::Bol { .. } => "bol",
            ExperimentKind::Collapse => "collapse",
            ExperimentKind::Intersection => "intersection",
            ExperimentKind::Sweep { .. } => "sweep",
            ExperimentKind::Continuation { .. } => "continuation",
            ExperimentKind::Acceptance { .. } => "acceptance",
        }
    }

    fn needs_problem(&self) -> bool {
        !matches!(self, ExperimentKind::Acceptance { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(flatten)]
    pub kind: ExperimentKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default = "DomainSpec::unit_disk")]
    pub domain: DomainSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemSpec>,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub experiments: Vec<Experiment>,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default)]
    pub newton: NewtonConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            domain: DomainSpec::unit_disk(),
            problem: None,
            mesh: MeshConfig::default(),
            experiments: Vec::new(),
            budget: Budget::default(),
            newton: NewtonConfig::default(),
            seed: 0,
            out: default_out(),
        }
    }
}

#[derive(Debug)]
pub struct ConfigError {
    pub path: PathBuf,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path.display(), self.message)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    /// Reads a JSON or (by extension) TOML config. Relative paths inside the
    /// config are resolved against its directory.
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let err = |message: String| ConfigError { path: path.to_path_buf(), message };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let mut cfg: RunConfig = if is_toml {
            toml::from_str(&text).map_err(|e| err(e.to_string()))?
        } else {
            serde_json::from_str(&text).map_err(|e| err(format!("line {} column {}: {e}", e.line(), e.column())))?
        };
        if let Some(dir) = path.parent() {
            if let Some(f) = cfg.mesh.file.as_mut() {
                if f.is_relative() {
                    *f = dir.join(&*f);
                }
            }
        }
        cfg.check().map_err(err)?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!("schema-version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version));
        }
        if let Some(f) = &self.mesh.file {
            if !f.is_file() {
                return Err(format!("mesh.file: {} does not exist", f.display()));
            }
        } else if !(self.mesh.target_h > 0.0) {
            return Err(format!("mesh.target-h must be positive, got {}", self.mesh.target_h));
        }
        if self.budget.starts == 0 {
            return Err("budget.starts must be at least 1".into());
        }
        for (k, e) in self.experiments.iter().enumerate() {
            if e.kind.needs_problem() && self.problem.is_none() {
                return Err(format!("experiments[{k}] ({}) needs a problem section", e.kind.name()));
            }
        }
        let mut ids: Vec<String> = self.experiment_ids();
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(format!("duplicate experiment id {:?}", w[0]));
        }
        Ok(())
    }

    /// Experiment ids, defaulting to `<kind>-<index>`.
    pub fn experiment_ids(&self) -> Vec<String> {
        self.experiments
            .iter()
            .enumerate()
            .map(|(k, e)| e.id.clone().unwrap_or_else(|| format!("{}-{k}", e.kind.name())))
            .collect()
    }
}
