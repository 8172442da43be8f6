use std::f64::consts::PI;

use super::forms::{DiscreteProblem, Term};
use super::spec::Variant;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{green_function, singular_weight, Point};
use crate::solver::linalg::norm2;

/// Fields `ũ_i = u_i + 4πα G_0` together with the weight `h = e^{-4πα G_0}`.
#[derive(Clone, Debug)]
pub struct Desingularized {
    pub fields: Vec<ScalarField>,
    pub weight: ScalarField,
    /// The nodal shift `4πα G_0`, with the regular part in place of the pole value.
    pub shift: ScalarField,
}

/// Absorbs the source `4πα δ_pole` into the unknowns. A pole that falls on a
/// node takes the finite value `4πα H(pole)` there, so every field stays finite.
pub fn desingularize(u: &[ScalarField], alpha: f64, pole: Point) -> Result<Desingularized> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::NegativeStrength(alpha));
    }
    let mesh = u.first().ok_or_else(|| Error::PreconditionViolated("no fields to transform".into()))?.mesh();
    let g = green_function(mesh, pole)?;
    let shift: Vec<f64> = g.nodal_finite().into_iter().map(|v| 4.0 * PI * alpha * v).collect();
    let shift = ScalarField::new(mesh.clone(), shift)?;
    let fields = u.iter().map(|f| f.zip_with(&shift, |a, b| a + b)).collect::<Result<Vec<_>>>()?;
    Ok(Desingularized { fields, weight: singular_weight(&g, alpha)?, shift })
}

/// Inverse of [`desingularize`]: `u_i = ũ_i - 4πα G_0`.
pub fn resingularize(tilde: &Desingularized) -> Result<Vec<ScalarField>> {
    tilde.fields.iter().map(|f| f.zip_with(&tilde.shift, |a, b| a - b)).collect()
}

/// One lifted component `w = scale · u_source + shift` with
/// `Δw + e^w = f`, the forcing `f` given as a sum of terms in `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedComponent {
    pub source: usize,
    pub scale: f64,
    pub shift: f64,
    pub forcing: Vec<Term>,
}

/// The fields the uniqueness proofs build from a solution: `w_i` solving
/// `Δw_i + e^{w_i} = f_i`, the nodal forcings and the logarithmic shifts.
#[derive(Clone, Debug)]
pub struct SciLift {
    pub components: Vec<LiftedComponent>,
    pub w: Vec<ScalarField>,
    pub f: Vec<ScalarField>,
}

fn component(source: usize, scale: f64, shift: f64, forcing: Vec<Term>) -> LiftedComponent {
    LiftedComponent { source, scale, shift, forcing }
}

/// Change of variables into the form `Δw + e^w = f` for the variant of `p`,
/// evaluated at the solution `u`.
pub fn lift_to_sci_form(p: &DiscreteProblem, u: &[ScalarField]) -> Result<SciLift> {
    let fields = p.unwrap_fields(u)?;
    let components = match &p.spec().variant {
        Variant::MeanField { .. } => return Err(Error::VariantWithoutTransform("mean-field")),
        Variant::Gelfand { rho } => vec![component(0, 1.0, rho.ln(), vec![])],
        Variant::SinhGordonPositive { rho, exponents } => {
            // v = a_M u + ln((m+1) a_M ρ / Z), f = (a_M ρ/Z) Σ_i (e^{a_M u} - e^{a_i u})
            let z = p.integral(&fields, &p.form().normalization.as_ref().expect("normalized").terms)?;
            let a_max = exponents.iter().copied().fold(1.0, f64::max);
            let atoms = exponents.len() as f64 + 1.0;
            let c = a_max * rho / z;
            let mut forcing = Vec::new();
            for a in std::iter::once(1.0).chain(exponents.iter().copied()) {
                forcing.push(Term::new(c, a_max, 0));
                forcing.push(Term::new(-c, a, 0));
            }
            vec![component(0, a_max, (atoms * c).ln(), forcing)]
        }
        Variant::SinhGordonSigned { rho, a } => {
            let z = p.integral(&fields, &p.form().normalization.as_ref().expect("normalized").terms)?;
            let c = rho / z;
            let shift = ((1.0 + a) * c).ln();
            let forcing = vec![Term::new(c * a, 1.0, 0), Term::new(c, -a, 0)];
            vec![component(0, -a, shift, forcing.clone()), component(0, 1.0, shift, forcing)]
        }
        Variant::NonNormalized { alpha } if *alpha > 0.0 => {
            vec![component(0, 1.0, 2f64.ln(), vec![Term::new(1.0, 1.0, 0), Term::new(-1.0, *alpha, 0)])]
        }
        Variant::NonNormalized { alpha } => {
            let a = -alpha;
            let forcing = vec![Term::new(a, 1.0, 0), Term::new(1.0, -a, 0)];
            let shift = (1.0 + a).ln();
            vec![component(0, -a, shift, forcing.clone()), component(0, 1.0, shift, forcing)]
        }
        Variant::CosmicString { terms } => {
            // v = a_M u + ln((m+1) a_M), f = a_M Σ_i (e^{a_M u} - h_i e^{a_i u})
            let a_max = terms.iter().map(|t| t.a).fold(0.0, f64::max);
            let mut forcing = Vec::new();
            for (k, t) in terms.iter().enumerate() {
                forcing.push(Term::new(a_max, a_max, 0));
                forcing.push(Term::new(-a_max, t.a, 0).weighted(k + 1));
            }
            vec![component(0, a_max, (terms.len() as f64 * a_max).ln(), forcing)]
        }
        Variant::Toda { coefficients: c } => {
            let m = c.a + c.a_prime;
            let forcing = vec![Term::new(c.a_prime, 1.0, 0), Term::new(c.b, 1.0, 1)];
            vec![component(0, 1.0, m.ln(), forcing.clone()), component(1, 1.0, m.ln(), forcing)]
        }
        Variant::SingularToda { coefficients: c, .. } => {
            let m = c.a + c.a_prime;
            let f1 =
                vec![Term::new(m, 1.0, 0), Term::new(-c.a, 1.0, 0).weighted(1), Term::new(c.b, 1.0, 1).weighted(1)];
            let f2 = vec![
                Term::new(m, 1.0, 1),
                Term::new(-c.b_prime, 1.0, 1).weighted(1),
                Term::new(c.a_prime, 1.0, 0).weighted(1),
            ];
            vec![component(0, 1.0, m.ln(), f1), component(1, 1.0, m.ln(), f2)]
        }
    };
    let mesh = p.mesh();
    let mut w = Vec::with_capacity(components.len());
    let mut f = Vec::with_capacity(components.len());
    for c in &components {
        w.push(u[c.source].map(|v| c.scale * v + c.shift)?);
        f.push(ScalarField::new(mesh.clone(), p.nodal_terms(&fields, &c.forcing))?);
    }
    Ok(SciLift { components, w, f })
}

impl SciLift {
    /// `ℓ²` norm of the weak residual of `Δw_i + e^{w_i} = f_i` over all
    /// components, with `f_i` evaluated exactly at the quadrature points.
    pub fn identity_residual(&self, p: &DiscreteProblem, u: &[ScalarField]) -> Result<f64> {
        let fields = p.unwrap_fields(u)?;
        let op = p.operator();
        let mut all = Vec::new();
        for (c, w) in self.components.iter().zip(&self.w) {
            let kw = op.apply(w.values());
            let ew = p.load(&fields, &[Term::new(c.shift.exp(), c.scale, c.source)])?;
            let f = p.load(&fields, &c.forcing)?;
            all.extend(op.interior().iter().map(|&i| kw[i] - ew[i] + f[i]));
        }
        Ok(norm2(&all))
    }

    /// `∫ e^{w_i}` computed from the lifted field.
    pub fn mass(&self, p: &DiscreteProblem, i: usize) -> Result<f64> {
        p.integral(&[self.w[i].values().to_vec()], &[Term::new(1.0, 1.0, 0)])
    }

    /// `e^{shift_i} ∫ e^{scale_i u}`, the same mass through the bookkeeping constants.
    pub fn mass_from_shift(&self, p: &DiscreteProblem, u: &[ScalarField], i: usize) -> Result<f64> {
        let fields = p.unwrap_fields(u)?;
        let c = &self.components[i];
        Ok(c.shift.exp() * p.integral(&fields, &[Term::new(1.0, c.scale, c.source)])?)
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::geometry::{build_mesh, DomainSpec};
    use crate::problems::{ProblemSpec, Variant};
    use crate::solver::DiscreteOperator;

    fn disk(h: f64) -> DiscreteOperator {
        DiscreteOperator::assemble(Arc::new(build_mesh(&DomainSpec::unit_disk(), h).unwrap())).unwrap()
    }

    #[test]
    fn desingularize_examples() {
        let op = disk(0.1);
        let mesh = op.mesh();
        let u = ScalarField::from_fn(mesh, |x| x[0] * x[1] + 0.2).unwrap();
        let id = desingularize(std::slice::from_ref(&u), 0.0, [0.0, 0.0]).unwrap();
        assert_eq!(id.fields[0].values(), u.values());
        assert!(id.weight.values().iter().all(|&h| h == 1.0));
        let half = desingularize(std::slice::from_ref(&u), 0.5, [0.0, 0.0]).unwrap();
        for (x, h) in mesh.nodes().iter().zip(half.weight.values()) {
            assert!((h - x[0].hypot(x[1])).abs() < 1e-14);
        }
        for &b in mesh.boundary_nodes() {
            assert!((half.fields[0].values()[b] - u.values()[b]).abs() < 1e-14);
        }
        let back = resingularize(&half).unwrap();
        for (a, b) in back[0].values().iter().zip(u.values()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(matches!(desingularize(&[u], -1.0, [0.0, 0.0]), Err(Error::NegativeStrength(_))));
    }

    #[test]
    fn signed_zero_lift() {
        let op = disk(0.1);
        let (rho, a) = (3.0, 0.5);
        let p = DiscreteProblem::new(&ProblemSpec::new(Variant::SinhGordonSigned { rho, a }), &op).unwrap();
        let u = ScalarField::constant(op.mesh(), 0.0).unwrap();
        let lift = lift_to_sci_form(&p, std::slice::from_ref(&u)).unwrap();
        let area = op.mesh().area();
        let expect = (1.0 + a).ln() + rho.ln() - (2.0 * area).ln();
        for w in &lift.w {
            assert!(w.values().iter().all(|&v| (v - expect).abs() < 1e-12));
        }
        assert!(lift.identity_residual(&p, &[u]).unwrap() < 1e-12);
    }

    #[test]
    fn mean_field_has_no_lift() {
        let op = disk(0.2);
        let p = DiscreteProblem::new(&ProblemSpec::new(Variant::MeanField { rho: 1.0 }), &op).unwrap();
        let u = ScalarField::constant(op.mesh(), 0.0).unwrap();
        assert!(matches!(lift_to_sci_form(&p, &[u]), Err(Error::VariantWithoutTransform(_))));
    }
}
