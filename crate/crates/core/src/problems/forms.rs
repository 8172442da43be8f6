use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use super::spec::{ProblemSpec, Variant};
use crate::error::{Error, Result};
use crate::field::{QuadPoints, ScalarField};
use crate::geometry::{green_function, GreenFunction, Mesh};
use crate::solver::linalg::SparseLu;
use crate::solver::DiscreteOperator;

/// `coef · h_weight · e^{exponent · u_source}`. Weight 0 is the unit weight;
/// weight `k ≥ 1` is `e^{-4π s_k G_0}` for the variant's `k`-th strength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub exponent: f64,
    pub source: usize,
    pub weight: usize,
}

impl Term {
    pub const fn new(coef: f64, exponent: f64, source: usize) -> Term {
        Term { coef, exponent, source, weight: 0 }
    }

    pub const fn weighted(self, weight: usize) -> Term {
        Term { weight, ..self }
    }
}

/// `ρ / Z` in front of every right-hand side, with `Z = ∫ Σ terms`.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalization {
    pub rho: f64,
    pub terms: Vec<Term>,
}

/// `-Δu_i = s · Σ_t (terms of equation i)` with `s = ρ/Z` or 1.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakForm {
    pub equations: Vec<Vec<Term>>,
    pub normalization: Option<Normalization>,
}

/// A named integral `∫ Σ terms`.
#[derive(Clone, Debug, PartialEq)]
pub struct MassFunctional {
    pub label: String,
    pub terms: Vec<Term>,
}

impl MassFunctional {
    fn new(label: &str, terms: Vec<Term>) -> MassFunctional {
        MassFunctional { label: label.into(), terms }
    }
}

fn normalized(rho: f64, numerator: Vec<Term>, denominator: Vec<Term>) -> WeakForm {
    WeakForm { equations: vec![numerator], normalization: Some(Normalization { rho, terms: denominator }) }
}

fn plain(equations: Vec<Vec<Term>>) -> WeakForm {
    WeakForm { equations, normalization: None }
}

impl Variant {
    pub fn weak_form(&self) -> WeakForm {
        match self {
            Variant::MeanField { rho } => normalized(*rho, vec![Term::new(1.0, 1.0, 0)], vec![Term::new(1.0, 1.0, 0)]),
            Variant::SinhGordonPositive { rho, exponents } => {
                let mut terms = vec![Term::new(1.0, 1.0, 0)];
                terms.extend(exponents.iter().map(|&a| Term::new(1.0, a, 0)));
                normalized(*rho, terms.clone(), terms)
            }
            Variant::SinhGordonSigned { rho, a } => normalized(
                *rho,
                vec![Term::new(1.0, 1.0, 0), Term::new(-1.0, -a, 0)],
                vec![Term::new(1.0, 1.0, 0), Term::new(1.0, -a, 0)],
            ),
            Variant::NonNormalized { alpha } => {
                plain(vec![vec![Term::new(1.0, 1.0, 0), Term::new(alpha.signum(), *alpha, 0)]])
            }
            Variant::CosmicString { terms } => {
                plain(vec![terms.iter().enumerate().map(|(k, t)| Term::new(1.0, t.a, 0).weighted(k + 1)).collect()])
            }
            Variant::Toda { coefficients: c } => plain(vec![
                vec![Term::new(c.a, 1.0, 0), Term::new(-c.b, 1.0, 1)],
                vec![Term::new(c.b_prime, 1.0, 1), Term::new(-c.a_prime, 1.0, 0)],
            ]),
            Variant::SingularToda { coefficients: c, .. } => plain(vec![
                vec![Term::new(c.a, 1.0, 0).weighted(1), Term::new(-c.b, 1.0, 1).weighted(1)],
                vec![Term::new(c.b_prime, 1.0, 1).weighted(1), Term::new(-c.a_prime, 1.0, 0).weighted(1)],
            ]),
            Variant::Gelfand { rho } => plain(vec![vec![Term::new(*rho, 1.0, 0)]]),
        }
    }

    /// The integrals reported with every solve. For the singular system the
    /// masses are those of `ũ`.
    pub fn mass_functionals(&self) -> Vec<MassFunctional> {
        let eu = || MassFunctional::new("e^u", vec![Term::new(1.0, 1.0, 0)]);
        match self {
            Variant::MeanField { .. } | Variant::Gelfand { .. } => vec![eu()],
            Variant::SinhGordonPositive { exponents, .. } => {
                let mut out = vec![eu()];
                for (k, &a) in exponents.iter().enumerate() {
                    out.push(MassFunctional::new(&format!("e^(a{} u)", k + 1), vec![Term::new(1.0, a, 0)]));
                }
                let mut all = vec![Term::new(1.0, 1.0, 0)];
                all.extend(exponents.iter().map(|&a| Term::new(1.0, a, 0)));
                out.push(MassFunctional::new("normalization", all));
                out
            }
            Variant::SinhGordonSigned { a, .. } => vec![
                eu(),
                MassFunctional::new("e^(-a u)", vec![Term::new(1.0, -a, 0)]),
                MassFunctional::new("normalization", vec![Term::new(1.0, 1.0, 0), Term::new(1.0, -a, 0)]),
            ],
            Variant::NonNormalized { alpha } => {
                let mut out = vec![eu(), MassFunctional::new("e^(alpha u)", vec![Term::new(1.0, *alpha, 0)])];
                if *alpha < 0.0 {
                    out.push(MassFunctional::new("sum", vec![Term::new(1.0, 1.0, 0), Term::new(1.0, *alpha, 0)]));
                }
                out
            }
            Variant::CosmicString { terms } => {
                let a_max = terms.iter().map(|t| t.a).fold(0.0, f64::max);
                let mut out = vec![eu(), MassFunctional::new("gamma", vec![Term::new(1.0, a_max, 0)])];
                for (k, t) in terms.iter().enumerate() {
                    out.push(MassFunctional::new(
                        &format!("term{}", k + 1),
                        vec![Term::new(1.0, t.a, 0).weighted(k + 1)],
                    ));
                }
                out
            }
            Variant::Toda { .. } | Variant::SingularToda { .. } => {
                let mut out = vec![
                    MassFunctional::new("e^u1", vec![Term::new(1.0, 1.0, 0)]),
                    MassFunctional::new("e^u2", vec![Term::new(1.0, 1.0, 1)]),
                    MassFunctional::new("pair", vec![Term::new(1.0, 1.0, 0), Term::new(1.0, 1.0, 1)]),
                ];
                if matches!(self, Variant::SingularToda { .. }) {
                    out.push(MassFunctional::new("h e^u1", vec![Term::new(1.0, 1.0, 0).weighted(1)]));
                    out.push(MassFunctional::new("h e^u2", vec![Term::new(1.0, 1.0, 1).weighted(1)]));
                }
                out
            }
        }
    }
}

/// Values of the components at the quadrature points.
pub(crate) struct QuadState {
    values: Vec<Vec<f64>>,
}

/// A problem bound to a mesh: quadrature, weights at the quadrature points and
/// the nodal boundary data.
pub struct DiscreteProblem<'a> {
    spec: ProblemSpec,
    op: &'a DiscreteOperator,
    form: WeakForm,
    quad: QuadPoints,
    /// `weights[k]` at every quadrature point; `weights[0]` is all ones.
    weights: Vec<Vec<f64>>,
    strengths: Vec<f64>,
    green: Option<GreenFunction>,
    boundary: Vec<f64>,
    stiffness_lu: OnceLock<Result<SparseLu>>,
}

/// Residual of the discrete system at one state.
pub struct Evaluation {
    /// Stacked interior residuals, component by component.
    pub residual: Vec<f64>,
    /// `ρ/Z` or 1.
    pub scale: f64,
    /// `Z` for normalized forms.
    pub normalization: Option<f64>,
    /// Unscaled right-hand side loads per component, on all nodes.
    loads: Vec<Vec<f64>>,
}

impl Evaluation {
    pub fn norm(&self) -> f64 {
        crate::solver::linalg::norm2(&self.residual)
    }
}

/// Factorized Jacobian, with the rank-one normalization term handled by the
/// Sherman–Morrison formula.
pub struct JacobianSolver {
    lu: SparseLu,
    rank_one: Option<(Vec<f64>, Vec<f64>, f64)>,
}

impl JacobianSolver {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = self.lu.solve(rhs)?;
        if let Some((ap, q, denom)) = &self.rank_one {
            let c = crate::solver::linalg::dot(q, &x) / denom;
            for (xi, api) in x.iter_mut().zip(ap) {
                *xi -= c * api;
            }
        }
        Ok(x)
    }
}

impl<'a> DiscreteProblem<'a> {
    pub fn new(spec: &ProblemSpec, op: &'a DiscreteOperator) -> Result<DiscreteProblem<'a>> {
        let mesh = op.mesh();
        spec.validate_on(mesh)?;
        let strengths = spec.variant.strengths();
        let singular = strengths.iter().any(|&s| s != 0.0);
        let quad = QuadPoints::with_pole(mesh, singular.then(|| spec.pole()));
        let mut weights = vec![vec![1.0; quad.len()]];
        let green = if singular { Some(green_function(mesh, spec.pole())?) } else { None };
        match &green {
            Some(g) => {
                let points = quad.points(mesh);
                for &s in &strengths {
                    weights.push(points.iter().map(|&x| g.weight_at(s, x)).collect());
                }
            }
            None => weights.extend(strengths.iter().map(|_| vec![1.0; quad.len()])),
        }
        Ok(DiscreteProblem {
            spec: spec.clone(),
            op,
            form: spec.variant.weak_form(),
            quad,
            weights,
            strengths,
            green,
            boundary: spec.boundary.nodal(mesh, 0.0),
            stiffness_lu: OnceLock::new(),
        })
    }

    /// Green's function of the pole, for the weighted variants.
    pub fn green(&self) -> Option<&GreenFunction> {
        self.green.as_ref()
    }

    /// Weight `k` at the nodes (zero at a pole node when the strength is positive).
    pub fn nodal_weight(&self, k: usize) -> Vec<f64> {
        let mesh = self.mesh();
        match (&self.green, k) {
            (Some(g), k) if k >= 1 => mesh.nodes().iter().map(|&x| g.weight_at(self.strengths[k - 1], x)).collect(),
            _ => vec![1.0; mesh.num_nodes()],
        }
    }

    /// `Σ terms` evaluated at the nodes.
    pub fn nodal_terms(&self, fields: &[Vec<f64>], terms: &[Term]) -> Vec<f64> {
        let mut out = vec![0.0; self.mesh().num_nodes()];
        for t in terms {
            let w = self.nodal_weight(t.weight);
            for (i, o) in out.iter_mut().enumerate() {
                *o += t.coef * w[i] * (t.exponent * fields[t.source][i]).exp();
            }
        }
        out
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn operator(&self) -> &DiscreteOperator {
        self.op
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.op.mesh()
    }

    pub fn components(&self) -> usize {
        self.form.equations.len()
    }

    pub fn form(&self) -> &WeakForm {
        &self.form
    }

    pub fn quadrature(&self) -> &QuadPoints {
        &self.quad
    }

    /// Nodal boundary data (zero at interior nodes).
    pub fn boundary(&self) -> &[f64] {
        &self.boundary
    }

    pub(crate) fn num_unknowns(&self) -> usize {
        self.components() * self.op.interior().len()
    }

    /// Nodal fields from stacked interior unknowns plus the boundary data.
    pub(crate) fn expand(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let ni = self.op.interior().len();
        (0..self.components())
            .map(|c| {
                let mut u = self.boundary.clone();
                for (k, &i) in self.op.interior().iter().enumerate() {
                    u[i] = x[c * ni + k];
                }
                u
            })
            .collect()
    }

    pub(crate) fn stack(&self, fields: &[Vec<f64>]) -> Vec<f64> {
        fields.iter().flat_map(|u| self.op.restrict(u)).collect()
    }

    /// Whether `u` matches the boundary data to `tol`.
    pub fn satisfies_boundary(&self, u: &[f64], tol: f64) -> bool {
        self.mesh().boundary_nodes().iter().all(|&b| (u[b] - self.boundary[b]).abs() <= tol)
    }

    pub(crate) fn state(&self, fields: &[Vec<f64>]) -> Result<QuadState> {
        let mesh = self.mesh();
        let values: Vec<Vec<f64>> = fields.iter().map(|u| self.quad.interpolate(mesh, u)).collect();
        Ok(QuadState { values })
    }

    fn term_values(&self, st: &QuadState, t: &Term) -> Result<Vec<f64>> {
        let u = &st.values[t.source];
        let w = &self.weights[t.weight];
        let mut out = Vec::with_capacity(u.len());
        for (q, &v) in u.iter().enumerate() {
            let e = t.exponent * v;
            if e > 700.0 || !e.is_finite() {
                return Err(Error::Overflow(e));
            }
            out.push(t.coef * w[q] * e.exp());
        }
        Ok(out)
    }

    fn sum_terms(&self, st: &QuadState, terms: &[Term]) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; self.quad.len()];
        for t in terms {
            for (a, v) in acc.iter_mut().zip(self.term_values(st, t)?) {
                *a += v;
            }
        }
        Ok(acc)
    }

    /// `∫ Σ terms` at the nodal fields.
    pub fn integral(&self, fields: &[Vec<f64>], terms: &[Term]) -> Result<f64> {
        let st = self.state(fields)?;
        Ok(self.quad.integrate(&self.sum_terms(&st, terms)?))
    }

    /// `sqrt(rᵀ K_II⁻¹ r)` summed over the component blocks: an `H⁻¹`-type norm
    /// of stacked interior residuals, used as the line-search merit.
    pub fn dual_norm(&self, residual: &[f64]) -> Result<f64> {
        let lu = match self.stiffness_lu.get_or_init(|| self.op.factor_interior()) {
            Ok(lu) => lu,
            Err(e) => return Err(Error::LinearAlgebra(e.to_string())),
        };
        let ni = self.op.interior().len();
        let mut total = 0.0;
        for block in residual.chunks(ni) {
            let y = lu.solve(block)?;
            total += crate::solver::linalg::dot(block, &y);
        }
        Ok(total.max(0.0).sqrt())
    }

    /// Nodal load `∫ (Σ terms) φ_i`.
    pub fn load(&self, fields: &[Vec<f64>], terms: &[Term]) -> Result<Vec<f64>> {
        let st = self.state(fields)?;
        Ok(self.quad.load(self.mesh(), &self.sum_terms(&st, terms)?))
    }

    pub fn evaluate(&self, fields: &[Vec<f64>]) -> Result<Evaluation> {
        let st = self.state(fields)?;
        let (scale, normalization) = match &self.form.normalization {
            Some(n) => {
                let z = self.quad.integrate(&self.sum_terms(&st, &n.terms)?);
                (n.rho / z, Some(z))
            }
            None => (1.0, None),
        };
        let mut loads = Vec::with_capacity(self.components());
        let mut residual = Vec::with_capacity(self.num_unknowns());
        for (c, eq) in self.form.equations.iter().enumerate() {
            let load = self.quad.load(self.mesh(), &self.sum_terms(&st, eq)?);
            let ku = self.op.apply(&fields[c]);
            residual.extend(self.op.interior().iter().map(|&i| ku[i] - scale * load[i]));
            loads.push(load);
        }
        if let Some(k) = residual.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node: k });
        }
        Ok(Evaluation { residual, scale, normalization, loads })
    }

    /// Factorizes the Jacobian of the residual at `fields`.
    pub fn jacobian(&self, fields: &[Vec<f64>], eval: &Evaluation) -> Result<JacobianSolver> {
        let mesh = self.mesh();
        let st = self.state(fields)?;
        let ni = self.op.interior().len();
        let mut entries =
            Vec::with_capacity(self.components() * (self.op.stiffness().nnz() + 9 * mesh.num_triangles()));
        for c in 0..self.components() {
            entries.extend(self.op.interior_triplets().into_iter().map(|(i, j, v)| (i + c * ni, j + c * ni, v)));
        }
        for (c, eq) in self.form.equations.iter().enumerate() {
            for t in eq {
                // d/du of coef·h·e^{a u} is a·coef·h·e^{a u}
                let vals = self.term_values(&st, t)?;
                let factor = -eval.scale * t.exponent;
                for (tri_index, tri) in mesh.triangles().iter().enumerate() {
                    let mut local = [[0.0; 3]; 3];
                    for q in self.quad.range(tri_index) {
                        let f = factor * vals[q] * self.quad.weight(q);
                        let l = self.quad.bary(q);
                        for a in 0..3 {
                            for b in 0..3 {
                                local[a][b] += f * l[a] * l[b];
                            }
                        }
                    }
                    for a in 0..3 {
                        let Some(r) = self.op.slot(tri[a]) else { continue };
                        for b in 0..3 {
                            if let Some(s) = self.op.slot(tri[b]) {
                                entries.push((r + c * ni, s + t.source * ni, local[a][b]));
                            }
                        }
                    }
                }
            }
        }
        let lu = SparseLu::factor(self.num_unknowns(), &entries)?;
        let rank_one = match (&self.form.normalization, eval.normalization) {
            (Some(n), Some(z)) => {
                // J = A + p qᵀ with p = stacked loads, q = (ρ/Z²) ∂Z/∂u
                let p: Vec<f64> = eval.loads.iter().flat_map(|l| self.op.restrict(l)).collect();
                let mut q = vec![0.0; self.num_unknowns()];
                for t in &n.terms {
                    let vals: Vec<f64> = self.term_values(&st, t)?.into_iter().map(|v| v * t.exponent).collect();
                    let dz = self.quad.load(mesh, &vals);
                    for (k, &i) in self.op.interior().iter().enumerate() {
                        q[t.source * ni + k] += n.rho / (z * z) * dz[i];
                    }
                }
                let ap = lu.solve(&p)?;
                let denom = 1.0 + crate::solver::linalg::dot(&q, &ap);
                if !(denom.abs() > 1e-14) {
                    return Err(Error::LinearAlgebra("rank-one update is singular".into()));
                }
                Some((ap, q, denom))
            }
            _ => None,
        };
        Ok(JacobianSolver { lu, rank_one })
    }

    /// The variant's named masses.
    pub fn masses(&self, fields: &[Vec<f64>]) -> Result<BTreeMap<String, f64>> {
        let st = self.state(fields)?;
        let mut out = BTreeMap::new();
        for m in self.spec.variant.mass_functionals() {
            out.insert(m.label.clone(), self.quad.integrate(&self.sum_terms(&st, &m.terms)?));
        }
        Ok(out)
    }

    /// Residual of nodal scalar fields.
    pub fn residual(&self, u: &[ScalarField]) -> Result<Vec<f64>> {
        let fields = self.unwrap_fields(u)?;
        Ok(self.evaluate(&fields)?.residual)
    }

    pub(crate) fn unwrap_fields(&self, u: &[ScalarField]) -> Result<Vec<Vec<f64>>> {
        if u.len() != self.components() {
            return Err(Error::PreconditionViolated(format!(
                "{} expects {} field(s), got {}",
                self.spec.variant.name(),
                self.components(),
                u.len()
            )));
        }
        let mut out = Vec::with_capacity(u.len());
        for f in u {
            if !Arc::ptr_eq(f.mesh(), self.mesh()) && f.mesh().num_nodes() != self.mesh().num_nodes() {
                return Err(Error::MeshMismatch);
            }
            out.push(f.values().to_vec());
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec};
    use crate::solver::linalg::norm2;

    fn disk(h: f64) -> DiscreteOperator {
        DiscreteOperator::assemble(Arc::new(build_mesh(&DomainSpec::unit_disk(), h).unwrap())).unwrap()
    }

    #[test]
    fn signed_zero_is_exact() {
        let op = disk(0.15);
        let p = DiscreteProblem::new(&ProblemSpec::new(Variant::SinhGordonSigned { rho: 2.0, a: 1.0 }), &op).unwrap();
        let zero = vec![vec![0.0; op.mesh().num_nodes()]];
        let e = p.evaluate(&zero).unwrap();
        assert!(e.residual.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn toda_with_equal_components_reduces_to_scalar() {
        let op = disk(0.15);
        let n = op.mesh().num_nodes();
        let u: Vec<f64> = op.mesh().nodes().iter().map(|x| 0.3 * (1.0 - x[0] * x[0] - x[1] * x[1])).collect();
        let sys = DiscreteProblem::new(&ProblemSpec::new(Variant::toda(2.0, 1.0, 1.0, 2.0)), &op).unwrap();
        let scalar = DiscreteProblem::new(&ProblemSpec::new(Variant::Gelfand { rho: 1.0 }), &op).unwrap();
        let rs = sys.evaluate(&[u.clone(), u.clone()]).unwrap().residual;
        let r1 = scalar.evaluate(&[u]).unwrap().residual;
        let ni = r1.len();
        assert_eq!(rs.len(), 2 * ni);
        for k in 0..ni {
            assert!((rs[k] - r1[k]).abs() < 1e-14 && (rs[ni + k] - r1[k]).abs() < 1e-14);
        }
        assert!(n > ni);
    }

    /// Directional derivative of the residual against the Jacobian, including
    /// the rank-one normalization part.
    fn check_jacobian(spec: ProblemSpec) {
        let op = disk(0.2);
        let p = DiscreteProblem::new(&spec, &op).unwrap();
        let nc = p.components();
        let fields: Vec<Vec<f64>> = (0..nc)
            .map(|c| {
                let mut u: Vec<f64> = op
                    .mesh()
                    .nodes()
                    .iter()
                    .map(|x| (1.0 + c as f64) * 0.4 * (1.0 - x[0] * x[0] - x[1] * x[1]) + 0.1 * x[0])
                    .collect();
                spec.boundary.apply(op.mesh(), &mut u);
                u
            })
            .collect();
        let e = p.evaluate(&fields).unwrap();
        let jac = p.jacobian(&fields, &e).unwrap();
        let x = p.stack(&fields);
        let dir: Vec<f64> = (0..x.len()).map(|k| ((k * 7919) % 13) as f64 / 13.0 - 0.5).collect();
        let eps = 1e-6;
        let shifted = |s: f64| {
            let y: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + s * b).collect();
            p.evaluate(&p.expand(&y)).unwrap().residual
        };
        let (rp, rm) = (shifted(eps), shifted(-eps));
        let jd: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
        // J⁻¹ (J d) should give back d
        let back = jac.solve(&jd).unwrap();
        let err: Vec<f64> = back.iter().zip(&dir).map(|(a, b)| a - b).collect();
        assert!(norm2(&err) < 1e-6 * norm2(&dir), "{} {}", spec.variant.name(), norm2(&err));
    }

    #[test]
    fn jacobians_match_finite_differences() {
        check_jacobian(ProblemSpec::new(Variant::MeanField { rho: 5.0 }));
        check_jacobian(ProblemSpec::new(Variant::SinhGordonPositive { rho: 9.0, exponents: vec![0.5, 1.7] }));
        check_jacobian(ProblemSpec::new(Variant::SinhGordonSigned { rho: 9.0, a: 0.5 }));
        check_jacobian(ProblemSpec::new(Variant::NonNormalized { alpha: -0.5 }));
        check_jacobian(ProblemSpec::new(Variant::cosmic_string(1.5, 1.0)));
        check_jacobian(ProblemSpec::new(Variant::toda(2.0, 1.0, 1.0, 2.0)));
        check_jacobian(ProblemSpec::new(Variant::singular_toda(2.0, 1.0, 1.0, 2.0, 1.0)));
    }

    #[test]
    fn singular_weight_on_the_disk() {
        let op = disk(0.1);
        let p = DiscreteProblem::new(&ProblemSpec::new(Variant::singular_toda(2.0, 1.0, 1.0, 2.0, 1.0)), &op).unwrap();
        let pts = p.quadrature().points(op.mesh());
        for (x, w) in pts.iter().zip(&p.weights[1]) {
            assert!((w - (x[0] * x[0] + x[1] * x[1])).abs() < 1e-12);
        }
        // ∫ |x|² over the polygonal disk, close to π/2
        let zero = vec![vec![0.0; op.mesh().num_nodes()]; 2];
        let m = p.masses(&zero).unwrap();
        assert!((m["h e^u1"] - std::f64::consts::FRAC_PI_2).abs() < 1e-2);
    }
}
