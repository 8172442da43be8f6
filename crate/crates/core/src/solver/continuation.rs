use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::newton::{NewtonConfig, SolveResult};
use super::DiscreteOperator;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::problems::{DiscreteProblem, ProblemSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ContinuationConfig {
    pub start: f64,
    pub end: f64,
    /// First step; later steps grow by `growth` after each success up to `max_step`.
    pub initial_step: f64,
    #[serde(default)]
    pub max_step: Option<f64>,
    #[serde(default = "default_growth")]
    pub growth: f64,
    /// Steps shorter than this fraction of `|end - start|` end the run at a fold.
    #[serde(default = "default_min_fraction")]
    pub min_step_fraction: f64,
    #[serde(default)]
    pub newton: NewtonConfig,
}

fn default_growth() -> f64 {
    1.5
}

fn default_min_fraction() -> f64 {
    1e-4
}

impl ContinuationConfig {
    pub fn new(start: f64, end: f64, initial_step: f64) -> ContinuationConfig {
        ContinuationConfig {
            start,
            end,
            initial_step,
            max_step: None,
            growth: default_growth(),
            min_step_fraction: default_min_fraction(),
            newton: NewtonConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub parameter: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    /// `max_i ‖u_i‖_∞`.
    pub norm: f64,
    pub masses: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationTrace {
    pub variant: String,
    pub points: Vec<TracePoint>,
    /// Last converged parameter when the step size was exhausted before `end`.
    pub fold: Option<f64>,
    pub reached_end: bool,
}

impl ContinuationTrace {
    /// `param,norm,<masses...>,converged`.
    pub fn to_csv(&self) -> String {
        let labels: Vec<&String> = self.points.first().map(|p| p.masses.keys().collect()).unwrap_or_default();
        let mut out = String::from("param,norm");
        for l in &labels {
            let _ = write!(out, ",{}", csv_label(l));
        }
        out.push_str(",converged\n");
        for p in &self.points {
            let _ = write!(out, "{},{}", p.parameter, p.norm);
            for l in &labels {
                let _ = write!(out, ",{}", p.masses.get(*l).copied().unwrap_or(f64::NAN));
            }
            let _ = writeln!(out, ",{}", p.converged);
        }
        out
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.parameter).collect()
    }

    pub fn is_monotone(&self) -> bool {
        let p = self.parameters();
        p.windows(2).all(|w| w[1] > w[0]) || p.windows(2).all(|w| w[1] < w[0])
    }
}

fn csv_label(l: &str) -> String {
    let cleaned: String = l.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    format!("mass_{}", cleaned.trim_matches('_'))
}

fn point(parameter: f64, r: &SolveResult) -> TracePoint {
    TracePoint {
        parameter,
        converged: r.converged,
        iterations: r.iterations,
        residual: r.residual,
        norm: r.sup_norm(),
        masses: r.masses.clone(),
    }
}

/// Natural-parameter continuation of `p` in its primary parameter from
/// `cfg.start` towards `cfg.end`, starting from `initial` (or zero inside).
///
/// Each step is predicted by secant extrapolation of the last two solutions and
/// corrected by Newton. A failed step is halved; once it drops below
/// `min_step_fraction · |end - start|` the run stops and reports the last
/// converged parameter as the fold. Folds are located, not traversed.
pub fn continuation(
    p: &ProblemSpec,
    op: &DiscreteOperator,
    initial: Option<&[ScalarField]>,
    cfg: &ContinuationConfig,
) -> Result<(ContinuationTrace, Vec<SolveResult>)> {
    let range = (cfg.end - cfg.start).abs();
    if !(range > 0.0) || !(cfg.initial_step > 0.0) {
        return Err(Error::PreconditionViolated("continuation needs a non-empty range and a positive step".into()));
    }
    let dir = (cfg.end - cfg.start).signum();
    let min_step = cfg.min_step_fraction * range;
    let max_step = cfg.max_step.unwrap_or(range);
    let at = |value: f64| p.with_parameter(value);

    let first_spec = at(cfg.start);
    let problem = DiscreteProblem::new(&first_spec, op)
        .map_err(|e| Error::StartUnsolvable(format!("parameter {}: {e}", cfg.start)))?;
    let start_fields: Vec<Vec<f64>> = match initial {
        Some(u) => problem.unwrap_fields(u)?,
        None => vec![problem.boundary().to_vec(); problem.components()],
    };
    let first = problem
        .solve(&start_fields, &cfg.newton)
        .map_err(|e| Error::StartUnsolvable(format!("parameter {}: {e}", cfg.start)))?;

    let mut points = vec![point(cfg.start, &first)];
    let mut solutions = vec![first];
    let mut params = vec![cfg.start];
    let mut step = cfg.initial_step.min(max_step);
    let mut fold = None;
    loop {
        let last = *params.last().expect("non-empty");
        if (cfg.end - last) * dir <= 0.0 {
            break;
        }
        let next = if (cfg.end - last) * dir <= step { cfg.end } else { last + dir * step };
        let guess = predict(&params, &solutions, next);
        let outcome = DiscreteProblem::new(&at(next), op).and_then(|pb| pb.solve(&guess, &cfg.newton));
        match outcome {
            Ok(r) => {
                points.push(point(next, &r));
                solutions.push(r);
                params.push(next);
                step = (step * cfg.growth).min(max_step);
            }
            Err(_) => {
                step *= 0.5;
                if step < min_step {
                    fold = Some(last);
                    break;
                }
            }
        }
    }
    let reached_end = fold.is_none();
    let trace = ContinuationTrace { variant: p.variant.name().into(), points, fold, reached_end };
    Ok((trace, solutions))
}

/// Secant extrapolation to parameter `next` (the last solution when only one is known).
fn predict(params: &[f64], solutions: &[SolveResult], next: f64) -> Vec<Vec<f64>> {
    let n = solutions.len();
    let last = &solutions[n - 1];
    if n < 2 {
        return last.fields.iter().map(|f| f.values().to_vec()).collect();
    }
    let prev = &solutions[n - 2];
    let s = (next - params[n - 1]) / (params[n - 1] - params[n - 2]);
    last.fields
        .iter()
        .zip(&prev.fields)
        .map(|(a, b)| a.values().iter().zip(b.values()).map(|(x, y)| x + s * (x - y)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::geometry::{build_mesh, DomainSpec};
    use crate::problems::Variant;

    #[test]
    fn gelfand_fold_on_a_coarse_disk() {
        let op = DiscreteOperator::assemble(Arc::new(build_mesh(&DomainSpec::unit_disk(), 0.1).unwrap())).unwrap();
        let spec = ProblemSpec::new(Variant::Gelfand { rho: 0.1 });
        let cfg = ContinuationConfig::new(0.1, 3.0, 0.2);
        let (trace, _) = continuation(&spec, &op, None, &cfg).unwrap();
        let fold = trace.fold.expect("fold");
        assert!((fold - 2.0).abs() < 0.04, "{fold}");
        assert!(trace.is_monotone());
        let csv = trace.to_csv();
        assert!(csv.starts_with("param,norm,mass_e_u,converged\n"), "{csv}");
    }
}
