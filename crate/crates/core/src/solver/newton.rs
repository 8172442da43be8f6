use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DiscreteOperator;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::problems::{DiscreteProblem, ProblemSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct NewtonConfig {
    /// Tolerance on the `ℓ²` norm of the nodal weak residual.
    pub residual_tol: f64,
    pub max_iters: usize,
    /// Step reduction factor of the backtracking line search.
    pub backtrack: f64,
    pub armijo: f64,
    pub min_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { residual_tol: 1e-10, max_iters: 60, backtrack: 0.5, armijo: 1e-4, min_step: 1e-8 }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.residual_tol > 0.0
            && self.residual_tol < 1.0
            && self.max_iters > 0
            && self.backtrack > 0.0
            && self.backtrack < 1.0
            && self.armijo > 0.0
            && self.min_step > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::PreconditionViolated(format!("invalid Newton configuration {self:?}")))
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub fields: Vec<ScalarField>,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    /// Residual norm before each iteration and at the end.
    pub history: Vec<f64>,
    pub masses: BTreeMap<String, f64>,
    /// Why the iteration stopped early, if it did.
    pub failure: Option<String>,
}

/// Serializable part of a [`SolveResult`]; the fields go to snapshot files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub sup_norm: f64,
    pub masses: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl SolveResult {
    pub fn field(&self) -> &ScalarField {
        &self.fields[0]
    }

    /// Largest `‖u_i‖_∞` over the components.
    pub fn sup_norm(&self) -> f64 {
        self.fields.iter().map(ScalarField::sup_norm).fold(0.0, f64::max)
    }

    pub fn mass(&self, label: &str) -> Option<f64> {
        self.masses.get(label).copied()
    }

    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            converged: self.converged,
            iterations: self.iterations,
            residual: self.residual,
            sup_norm: self.sup_norm(),
            masses: self.masses.clone(),
            failure: self.failure.clone(),
        }
    }

    /// `max_i ‖u_i - v_i‖_∞`.
    pub fn distance(&self, other: &SolveResult) -> f64 {
        self.fields
            .iter()
            .zip(&other.fields)
            .flat_map(|(a, b)| a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

impl DiscreteProblem<'_> {
    /// Damped Newton iteration from nodal `initial` fields. Always returns the
    /// last iterate; `converged` tells whether the tolerance was reached.
    pub fn iterate(&self, initial: &[Vec<f64>], cfg: &NewtonConfig) -> Result<SolveResult> {
        cfg.validate()?;
        if initial.len() != self.components() {
            return Err(Error::PreconditionViolated(format!(
                "expected {} initial field(s), got {}",
                self.components(),
                initial.len()
            )));
        }
        for u in initial {
            if u.len() != self.mesh().num_nodes() {
                return Err(Error::FieldSize { expected: self.mesh().num_nodes(), got: u.len() });
            }
            if !self.satisfies_boundary(u, 1e-12) {
                return Err(Error::PreconditionViolated("initial guess does not match the boundary data".into()));
            }
        }
        let parameter = self.spec().variant.parameter();
        let mut x = self.stack(initial);
        let mut fields = self.expand(&x);
        let mut eval = self.evaluate(&fields)?;
        let mut norm = eval.norm();
        let mut merit = self.dual_norm(&eval.residual)?;
        let mut history = vec![norm];
        let mut iterations = 0;
        let mut failure = None;
        while norm > cfg.residual_tol {
            if iterations == cfg.max_iters {
                failure = Some(format!("no convergence after {iterations} iterations"));
                break;
            }
            let jac = match self.jacobian(&fields, &eval) {
                Ok(j) => j,
                Err(Error::LinearAlgebra(_)) => return Err(Error::JacobianSingular { parameter }),
                Err(e) => return Err(e),
            };
            let dx = match jac.solve(&eval.residual) {
                Ok(d) => d,
                Err(Error::LinearAlgebra(_)) => return Err(Error::JacobianSingular { parameter }),
                Err(e) => return Err(e),
            };
            let mut step = 1.0;
            let accepted = loop {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a - step * d).collect();
                let trial_fields = self.expand(&trial);
                // overflow or non-finite values count as a failed trial step
                if let Ok(e) = self.evaluate(&trial_fields) {
                    let m = self.dual_norm(&e.residual)?;
                    if m <= (1.0 - cfg.armijo * step) * merit || e.norm() <= cfg.residual_tol {
                        break Some((trial, trial_fields, e, m));
                    }
                }
                step *= cfg.backtrack;
                if step < cfg.min_step {
                    break None;
                }
            };
            iterations += 1;
            match accepted {
                Some((t, f, e, m)) => {
                    x = t;
                    fields = f;
                    norm = e.norm();
                    eval = e;
                    merit = m;
                    history.push(norm);
                }
                None => {
                    failure = Some(format!("line search stalled at residual {norm:e}"));
                    break;
                }
            }
        }
        let converged = norm <= cfg.residual_tol;
        let masses = self.masses(&fields)?;
        let mesh = self.mesh();
        let fields = fields.into_iter().map(|u| ScalarField::new(mesh.clone(), u)).collect::<Result<Vec<_>>>()?;
        Ok(SolveResult { fields, converged, iterations, residual: norm, history, masses, failure })
    }

    /// [`iterate`](Self::iterate), failing with `NoConvergence` unless the
    /// tolerance is reached.
    pub fn solve(&self, initial: &[Vec<f64>], cfg: &NewtonConfig) -> Result<SolveResult> {
        let r = self.iterate(initial, cfg)?;
        if r.converged {
            Ok(r)
        } else {
            Err(Error::NoConvergence { iterations: r.iterations, best_residual: r.residual })
        }
    }
}

/// Solves `p` on `op` by damped Newton from `initial`, which must carry the
/// boundary data exactly.
pub fn newton_solve(
    p: &ProblemSpec,
    op: &DiscreteOperator,
    initial: &[ScalarField],
    cfg: &NewtonConfig,
) -> Result<SolveResult> {
    let problem = DiscreteProblem::new(p, op)?;
    let fields = problem.unwrap_fields(initial)?;
    problem.solve(&fields, cfg)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::geometry::{build_mesh, DomainSpec};
    use crate::problems::Variant;

    fn disk(h: f64) -> DiscreteOperator {
        DiscreteOperator::assemble(Arc::new(build_mesh(&DomainSpec::unit_disk(), h).unwrap())).unwrap()
    }

    #[test]
    fn gelfand_small_branch_coarse() {
        let op = disk(0.1);
        let spec = ProblemSpec::new(Variant::Gelfand { rho: 1.0 });
        let u0 = ScalarField::constant(op.mesh(), 0.0).unwrap();
        let r = newton_solve(&spec, &op, &[u0], &NewtonConfig::default()).unwrap();
        assert!(r.converged && r.residual <= 1e-10);
        let center = r.field().eval([0.0, 0.0]).unwrap();
        let exact = 2.0 * (4.0 - 2.0 * 2f64.sqrt()).ln();
        assert!((center - exact).abs() < 1e-2, "{center} vs {exact}");
        assert!((r.mass("e^u").unwrap() - PI * (4.0 - 2.0 * 2f64.sqrt())).abs() < 2e-2);
    }

    #[test]
    fn signed_trivial_solution_needs_no_iteration() {
        let op = disk(0.15);
        let spec = ProblemSpec::new(Variant::SinhGordonSigned { rho: 2.0 * PI, a: 1.0 });
        let u0 = ScalarField::constant(op.mesh(), 0.0).unwrap();
        let r = newton_solve(&spec, &op, &[u0], &NewtonConfig::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.residual <= 1e-12);
    }

    #[test]
    fn rejects_initial_off_the_boundary_data() {
        let op = disk(0.2);
        let spec = ProblemSpec::new(Variant::Gelfand { rho: 1.0 });
        let u0 = ScalarField::constant(op.mesh(), 1.0).unwrap();
        assert!(matches!(
            newton_solve(&spec, &op, &[u0], &NewtonConfig::default()),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn no_solution_beyond_the_fold() {
        let op = disk(0.15);
        let spec = ProblemSpec::new(Variant::Gelfand { rho: 3.0 });
        let u0 = ScalarField::constant(op.mesh(), 0.0).unwrap();
        let cfg = NewtonConfig { max_iters: 30, ..NewtonConfig::default() };
        assert!(newton_solve(&spec, &op, &[u0], &cfg).is_err());
    }
}
