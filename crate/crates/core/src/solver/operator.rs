use std::sync::Arc;

use super::linalg::{Csr, SparseLu};
use crate::error::{Error, Result};
use crate::geometry::Mesh;

/// Piecewise-linear Galerkin discretization of `-Δ` on a mesh.
#[derive(Debug)]
pub struct DiscreteOperator {
    mesh: Arc<Mesh>,
    stiffness: Csr,
    lumped: Vec<f64>,
    interior: Vec<usize>,
    /// Position of each node in `interior`, `usize::MAX` on the boundary.
    slot: Vec<usize>,
}

impl DiscreteOperator {
    pub fn assemble(mesh: Arc<Mesh>) -> Result<DiscreteOperator> {
        let mut entries = Vec::with_capacity(9 * mesh.num_triangles());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let area = mesh.areas()[t];
            if !(area > 0.0) {
                return Err(Error::DegenerateTriangle { index: t, area });
            }
            let g = mesh.hat_gradients(t);
            for a in 0..3 {
                for b in 0..3 {
                    let k = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                    entries.push((tri[a], tri[b], k));
                }
            }
        }
        let stiffness = Csr::from_triplets(mesh.num_nodes(), entries);
        let lumped = mesh.lumped_mass();
        let interior: Vec<usize> = mesh.interior_nodes().collect();
        let mut slot = vec![usize::MAX; mesh.num_nodes()];
        for (k, &i) in interior.iter().enumerate() {
            slot[i] = k;
        }
        Ok(DiscreteOperator { mesh, stiffness, lumped, interior, slot })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn stiffness(&self) -> &Csr {
        &self.stiffness
    }

    pub fn lumped_mass(&self) -> &[f64] {
        &self.lumped
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Interior slot of node `i`, `None` for boundary nodes.
    pub fn slot(&self, i: usize) -> Option<usize> {
        let s = self.slot[i];
        (s != usize::MAX).then_some(s)
    }

    /// Stiffness product `K u` on all nodes.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.stiffness.mul(u)
    }

    /// Dirichlet energy `u^T K u = ∫ |∇u|^2`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        self.apply(u).iter().zip(u).map(|(a, b)| a * b).sum()
    }

    /// Triplets of the interior block `K_II` (in interior slots).
    pub fn interior_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.stiffness.nnz());
        for (r, &i) in self.interior.iter().enumerate() {
            for (j, v) in self.stiffness.row(i) {
                if let Some(c) = self.slot(j) {
                    out.push((r, c, v));
                }
            }
        }
        out
    }

    pub fn factor_interior(&self) -> Result<SparseLu> {
        SparseLu::factor(self.interior.len(), &self.interior_triplets())
    }

    /// Solves `K u = load` in the interior with `u = boundary` on boundary nodes.
    /// `load` and `boundary` are indexed by node; boundary entries of `load` are ignored.
    pub fn solve_dirichlet(&self, load: &[f64], boundary: &[f64]) -> Result<Vec<f64>> {
        let lu = self.factor_interior()?;
        self.solve_dirichlet_with(&lu, load, boundary)
    }

    pub fn solve_dirichlet_with(&self, lu: &SparseLu, load: &[f64], boundary: &[f64]) -> Result<Vec<f64>> {
        let mut lift: Vec<f64> = vec![0.0; self.mesh.num_nodes()];
        for &b in self.mesh.boundary_nodes() {
            lift[b] = boundary[b];
        }
        let k_lift = self.apply(&lift);
        let rhs: Vec<f64> = self.interior.iter().map(|&i| load[i] - k_lift[i]).collect();
        let x = lu.solve(&rhs)?;
        for (k, &i) in self.interior.iter().enumerate() {
            lift[i] = x[k];
        }
        Ok(lift)
    }

    /// Restricts a nodal vector to the interior slots.
    pub fn restrict(&self, u: &[f64]) -> Vec<f64> {
        self.interior.iter().map(|&i| u[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec};

    fn square(h: f64) -> Arc<Mesh> {
        Arc::new(build_mesh(&DomainSpec::rectangle(1.0, 1.0), h).unwrap())
    }

    #[test]
    fn linear_energy_is_exact_and_constants_are_in_the_kernel() {
        let m = square(0.1);
        let op = DiscreteOperator::assemble(m.clone()).unwrap();
        let u: Vec<f64> = m.nodes().iter().map(|p| p[0]).collect();
        assert!((op.energy(&u) - 1.0).abs() < 1e-10);
        let ones = vec![1.0; m.num_nodes()];
        assert!(op.apply(&ones).iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn quadratic_energy_converges() {
        // the rectangle is centred at the origin, so shift to get x in [0, 1]
        let err = |h: f64| {
            let m = square(h);
            let op = DiscreteOperator::assemble(m.clone()).unwrap();
            let u: Vec<f64> = m.nodes().iter().map(|p| (p[0] + 0.5).powi(2)).collect();
            (op.energy(&u) - 4.0 / 3.0).abs()
        };
        let (e1, e2) = (err(0.1), err(0.05));
        assert!(e1 < 1e-2 && e2 < e1 / 3.0, "{e1} {e2}");
    }

    #[test]
    fn stiffness_is_symmetric() {
        let m = Arc::new(build_mesh(&DomainSpec::unit_disk(), 0.2).unwrap());
        let op = DiscreteOperator::assemble(m).unwrap();
        let k = op.stiffness();
        for i in 0..k.n {
            for (j, v) in k.row(i) {
                let back = k.row(j).find(|&(c, _)| c == i).unwrap().1;
                assert!((v - back).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dirichlet_solve_reproduces_harmonic_linear() {
        let m = Arc::new(build_mesh(&DomainSpec::unit_disk(), 0.1).unwrap());
        let op = DiscreteOperator::assemble(m.clone()).unwrap();
        let g: Vec<f64> = m.nodes().iter().map(|p| 2.0 * p[0] - p[1] + 0.5).collect();
        let u = op.solve_dirichlet(&vec![0.0; m.num_nodes()], &g).unwrap();
        for i in 0..m.num_nodes() {
            assert!((u[i] - g[i]).abs() < 1e-10);
        }
    }
}
