use serde::{Deserialize, Serialize};

use super::mesh::Mesh;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundaryKind {
    Constant {
        value: f64,
    },
    /// One value per boundary node, in the order of `Mesh::boundary_nodes`.
    Values {
        values: Vec<f64>,
    },
}

/// Dirichlet data `u = g` on the boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    #[serde(flatten)]
    pub kind: BoundaryKind,
    #[serde(default)]
    pub nonneg: bool,
}

impl Default for BoundaryData {
    fn default() -> Self {
        BoundaryData::zero()
    }
}

impl BoundaryData {
    pub fn zero() -> Self {
        BoundaryData::constant(0.0)
    }

    pub fn constant(value: f64) -> Self {
        BoundaryData { kind: BoundaryKind::Constant { value }, nonneg: value >= 0.0 }
    }

    pub fn values(values: Vec<f64>) -> Self {
        let nonneg = values.iter().all(|&v| v >= 0.0);
        BoundaryData { kind: BoundaryKind::Values { values }, nonneg }
    }

    /// Samples `f` at the boundary nodes of `mesh`.
    pub fn from_fn(mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> Self {
        BoundaryData::values(mesh.boundary_nodes().iter().map(|&i| f(mesh.node(i))).collect())
    }

    pub fn is_constant(&self) -> bool {
        match &self.kind {
            BoundaryKind::Constant { .. } => true,
            BoundaryKind::Values { values } => values.windows(2).all(|w| w[0] == w[1]),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            BoundaryKind::Constant { value } => *value == 0.0,
            BoundaryKind::Values { values } => values.iter().all(|&v| v == 0.0),
        }
    }

    pub fn min(&self) -> f64 {
        match &self.kind {
            BoundaryKind::Constant { value } => *value,
            BoundaryKind::Values { values } => values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    /// Checks the data against the mesh and the non-negativity flag.
    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        let vals: &[f64] = match &self.kind {
            BoundaryKind::Constant { value } => std::slice::from_ref(value),
            BoundaryKind::Values { values } => {
                if values.len() != mesh.boundary_nodes().len() {
                    return Err(Error::FieldSize { expected: mesh.boundary_nodes().len(), got: values.len() });
                }
                values
            }
        };
        if let Some(k) = vals.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node: k });
        }
        if self.nonneg && vals.iter().any(|&v| v < 0.0) {
            return Err(Error::ConditionViolated(vec![
                "boundary data flagged non-negative has a negative value".into()
            ]));
        }
        if mesh.domain().is_some_and(|d| d.is_multiply_connected()) && !self.is_constant() {
            return Err(Error::ConditionViolated(vec![
                "multiply-connected domains require constant boundary data".into()
            ]));
        }
        Ok(())
    }

    /// Nodal vector that is `g` on the boundary and `fill` inside.
    pub fn nodal(&self, mesh: &Mesh, fill: f64) -> Vec<f64> {
        let mut u = vec![fill; mesh.num_nodes()];
        self.apply(mesh, &mut u);
        u
    }

    /// Overwrites the boundary entries of `u` with the data.
    pub fn apply(&self, mesh: &Mesh, u: &mut [f64]) {
        match &self.kind {
            BoundaryKind::Constant { value } => {
                for &b in mesh.boundary_nodes() {
                    u[b] = *value;
                }
            }
            BoundaryKind::Values { values } => {
                for (&b, &v) in mesh.boundary_nodes().iter().zip(values) {
                    u[b] = v;
                }
            }
        }
    }
}
