use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryData, Mesh, Point};

/// One term `h_i e^{a_i u}` of the cosmic string right-hand side, with
/// `h_i = e^{-4π N_i G_0}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosmicTerm {
    pub a: f64,
    #[serde(default)]
    pub n: f64,
}

/// Coefficients of the two-component system
/// `-Δu1 = A e^{u1} - B e^{u2}`, `-Δu2 = B' e^{u2} - A' e^{u1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TodaCoefficients {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Variant {
    /// `-Δu = ρ e^u / ∫ e^u`.
    MeanField { rho: f64 },
    /// `-Δu = ρ (e^u + Σ e^{a_i u}) / ∫ (e^u + Σ e^{a_i u})`.
    SinhGordonPositive { rho: f64, exponents: Vec<f64> },
    /// `-Δu = ρ (e^u - e^{-a u}) / ∫ (e^u + e^{-a u})`, zero boundary data.
    SinhGordonSigned { rho: f64, a: f64 },
    /// `-Δu = e^u + sign(α) e^{α u}`.
    NonNormalized { alpha: f64 },
    /// `-Δu = Σ h_i e^{a_i u}`.
    CosmicString { terms: Vec<CosmicTerm> },
    Toda {
        #[serde(flatten)]
        coefficients: TodaCoefficients,
    },
    /// The system with a Dirac source `-4πα δ_0` in both equations, solved
    /// for `ũ_i = u_i + 4πα G_0` with weight `h = e^{-4πα G_0}`.
    SingularToda {
        #[serde(flatten)]
        coefficients: TodaCoefficients,
        alpha: f64,
    },
    /// `-Δu = ρ e^u`.
    Gelfand { rho: f64 },
}

impl Variant {
    /// The standard cosmic string `-Δu = e^{a u} + h e^u` with `h = e^{-4πN G_0}`.
    pub fn cosmic_string(a: f64, n: f64) -> Variant {
        Variant::CosmicString { terms: vec![CosmicTerm { a, n: 0.0 }, CosmicTerm { a: 1.0, n }] }
    }

    pub fn toda(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Variant {
        Variant::Toda { coefficients: TodaCoefficients { a, a_prime, b, b_prime } }
    }

    pub fn singular_toda(a: f64, a_prime: f64, b: f64, b_prime: f64, alpha: f64) -> Variant {
        Variant::SingularToda { coefficients: TodaCoefficients { a, a_prime, b, b_prime }, alpha }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::MeanField { .. } => "mean-field",
            Variant::SinhGordonPositive { .. } => "sinh-gordon-positive",
            Variant::SinhGordonSigned { .. } => "sinh-gordon-signed",
            Variant::NonNormalized { .. } => "non-normalized",
            Variant::CosmicString { .. } => "cosmic-string",
            Variant::Toda { .. } => "toda",
            Variant::SingularToda { .. } => "singular-toda",
            Variant::Gelfand { .. } => "gelfand",
        }
    }

    pub fn components(&self) -> usize {
        match self {
            Variant::Toda { .. } | Variant::SingularToda { .. } => 2,
            _ => 1,
        }
    }

    /// The parameter continuation and sweeps move: ρ where there is one,
    /// α for the non-normalized and singular forms, the first exponent of a
    /// cosmic string and `A` for the plain system.
    pub fn parameter(&self) -> f64 {
        match self {
            Variant::MeanField { rho }
            | Variant::SinhGordonPositive { rho, .. }
            | Variant::SinhGordonSigned { rho, .. }
            | Variant::Gelfand { rho } => *rho,
            Variant::NonNormalized { alpha } | Variant::SingularToda { alpha, .. } => *alpha,
            Variant::CosmicString { terms } => terms.first().map_or(f64::NAN, |t| t.a),
            Variant::Toda { coefficients } => coefficients.a,
        }
    }

    pub fn with_parameter(&self, value: f64) -> Variant {
        let mut v = self.clone();
        match &mut v {
            Variant::MeanField { rho }
            | Variant::SinhGordonPositive { rho, .. }
            | Variant::SinhGordonSigned { rho, .. }
            | Variant::Gelfand { rho } => *rho = value,
            Variant::NonNormalized { alpha } | Variant::SingularToda { alpha, .. } => *alpha = value,
            Variant::CosmicString { terms } => {
                if let Some(t) = terms.first_mut() {
                    t.a = value;
                }
            }
            Variant::Toda { coefficients } => coefficients.a = value,
        }
        v
    }

    /// Singular strengths of the weights `e^{-4π s G_0}` this variant uses.
    pub(crate) fn strengths(&self) -> Vec<f64> {
        match self {
            Variant::CosmicString { terms } => terms.iter().map(|t| t.n).collect(),
            Variant::SingularToda { alpha, .. } => vec![*alpha],
            _ => Vec::new(),
        }
    }

    pub fn is_singular(&self) -> bool {
        self.strengths().iter().any(|&s| s != 0.0)
    }
}

/// A mass bound from the theorem attached to a variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    /// What is bounded: `rho`, `mass`, `pair-mass` or `collapsed-mass`.
    pub quantity: String,
    /// The integral being bounded, in words.
    pub functional: String,
    pub bound: f64,
}

impl Threshold {
    fn new(quantity: &str, functional: &str, bound: f64) -> Threshold {
        Threshold { quantity: quantity.into(), functional: functional.into(), bound }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// `A + A'` for the systems.
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    /// `A - B` for the systems.
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    pub thresholds: Vec<Threshold>,
}

impl DerivedConstants {
    pub fn threshold(&self, quantity: &str) -> Option<f64> {
        self.thresholds.iter().find(|t| t.quantity == quantity).map(|t| t.bound)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub variant: Variant,
    #[serde(default)]
    pub boundary: BoundaryData,
    /// Pole of `G_0` for the weighted variants; the origin when absent.
    #[serde(default, rename = "singular-pole", skip_serializing_if = "Option::is_none")]
    pub singular_pole: Option<Point>,
}

impl ProblemSpec {
    /// Zero Dirichlet data, pole at the origin.
    pub fn new(variant: Variant) -> ProblemSpec {
        ProblemSpec { variant, boundary: BoundaryData::zero(), singular_pole: None }
    }

    pub fn with_boundary(mut self, boundary: BoundaryData) -> ProblemSpec {
        self.boundary = boundary;
        self
    }

    pub fn with_parameter(&self, value: f64) -> ProblemSpec {
        ProblemSpec { variant: self.variant.with_parameter(value), ..self.clone() }
    }

    pub fn pole(&self) -> Point {
        self.singular_pole.unwrap_or([0.0, 0.0])
    }

    /// Checks every coefficient condition and returns the derived constants.
    /// All violations are collected before failing.
    pub fn validate(&self) -> Result<DerivedConstants> {
        let mut bad: Vec<String> = Vec::new();
        let mut need = |ok: bool, msg: String| {
            if !ok {
                bad.push(msg);
            }
        };
        let positive = |x: f64| x > 0.0 && x.is_finite();
        let mut m = None;
        let mut d = None;
        let mut thresholds = Vec::new();
        match &self.variant {
            Variant::MeanField { rho } => {
                need(positive(*rho), format!("rho must be positive, got {rho}"));
                thresholds.push(Threshold::new("rho", "rho", 8.0 * PI));
            }
            Variant::SinhGordonPositive { rho, exponents } => {
                need(positive(*rho), format!("rho must be positive, got {rho}"));
                need(!exponents.is_empty(), "at least one exponent is required".into());
                for a in exponents {
                    need(positive(*a), format!("exponents must be positive, got {a}"));
                }
                need(self.boundary.nonneg, "boundary data must be flagged non-negative".into());
                let a_max = exponents.iter().copied().fold(1.0, f64::max);
                let atoms = exponents.len() as f64 + 1.0;
                thresholds.push(Threshold::new("rho", "rho", 8.0 * PI / (atoms * a_max)));
            }
            Variant::SinhGordonSigned { rho, a } => {
                need(positive(*rho), format!("rho must be positive, got {rho}"));
                need(positive(*a), format!("a must be positive, got {a}"));
                need(self.boundary.is_zero(), "the signed equation requires zero boundary data".into());
                thresholds.push(Threshold::new("rho", "rho", 8.0 * PI / (1.0 + a)));
            }
            Variant::NonNormalized { alpha } => {
                need(
                    (-1.0..1.0).contains(alpha) && *alpha != 0.0,
                    format!("alpha must lie in [-1, 1) and be non-zero, got {alpha}"),
                );
                need(self.boundary.nonneg, "boundary data must be flagged non-negative".into());
                if *alpha > 0.0 {
                    thresholds.push(Threshold::new("mass", "∫ e^u", 4.0 * PI));
                } else {
                    thresholds.push(Threshold::new("mass", "∫ (e^u + e^{-a u})", 8.0 * PI / (1.0 - alpha)));
                }
            }
            Variant::CosmicString { terms } => {
                need(!terms.is_empty(), "at least one term is required".into());
                for t in terms {
                    need(positive(t.a), format!("exponents must be positive, got {}", t.a));
                    need(t.n >= 0.0 && t.n.is_finite(), format!("N must be non-negative, got {}", t.n));
                }
                need(self.boundary.nonneg, "boundary data must be flagged non-negative".into());
                let a_max = terms.iter().map(|t| t.a).fold(0.0, f64::max);
                let atoms = terms.len() as f64;
                if a_max > 0.0 {
                    thresholds.push(Threshold::new(
                        "pair-mass",
                        "∫ (e^{a_M u1} + e^{a_M u2})",
                        16.0 * PI / (a_max * atoms),
                    ));
                    thresholds.push(Threshold::new("mass", "∫ e^{a_M u}", 8.0 * PI / (a_max * atoms)));
                }
            }
            Variant::Toda { coefficients: c } | Variant::SingularToda { coefficients: c, .. } => {
                for (name, v) in [("A", c.a), ("A'", c.a_prime), ("B", c.b), ("B'", c.b_prime)] {
                    need(v >= 0.0 && v.is_finite(), format!("{name} must be non-negative, got {v}"));
                }
                let (m1, m2) = (c.a + c.a_prime, c.b + c.b_prime);
                need(
                    (m1 - m2).abs() <= 1e-12 * m1.abs().max(m2.abs()).max(1.0),
                    format!("A + A' = {m1} differs from B + B' = {m2}"),
                );
                need(m1 > 0.0, format!("M = A + A' must be positive, got {m1}"));
                if let Variant::SingularToda { alpha, .. } = &self.variant {
                    need(*alpha >= 0.0 && alpha.is_finite(), format!("alpha must be non-negative, got {alpha}"));
                }
                let dd = c.a - c.b;
                if bad.is_empty() {
                    // A + A' = B + B' makes A - B = B' - A'
                    assert!((dd - (c.b_prime - c.a_prime)).abs() <= 1e-11 * m1.max(1.0));
                }
                if m1 > 0.0 {
                    thresholds.push(Threshold::new("pair-mass", "∫ (e^{u1} + e^{u2})", 8.0 * PI / m1));
                    thresholds.push(Threshold::new("collapsed-mass", "∫ D e^u", 4.0 * PI * dd / m1));
                }
                m = Some(m1);
                d = Some(dd);
            }
            Variant::Gelfand { rho } => {
                need(positive(*rho), format!("rho must be positive, got {rho}"));
            }
        }
        if bad.is_empty() {
            Ok(DerivedConstants { m, d, thresholds })
        } else {
            Err(Error::ConditionViolated(bad))
        }
    }

    /// [`validate`](Self::validate) plus the boundary data checks against `mesh`
    /// (length, finiteness, non-negativity, constant data on multiply-connected
    /// domains).
    pub fn validate_on(&self, mesh: &Mesh) -> Result<DerivedConstants> {
        let derived = self.validate()?;
        self.boundary.validate(mesh)?;
        Ok(derived)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toda_constants() {
        let d = ProblemSpec::new(Variant::toda(2.0, 1.0, 1.0, 2.0)).validate().unwrap();
        assert_eq!((d.m, d.d), (Some(3.0), Some(1.0)));
        assert!((d.threshold("pair-mass").unwrap() - 8.0 * PI / 3.0).abs() < 1e-15);
        let d = ProblemSpec::new(Variant::toda(1.0, 0.0, 0.0, 1.0)).validate().unwrap();
        assert_eq!((d.m, d.d), (Some(1.0), Some(1.0)));
        assert!((d.threshold("pair-mass").unwrap() - 8.0 * PI).abs() < 1e-15);
        match ProblemSpec::new(Variant::toda(2.0, 2.0, 1.0, 2.0)).validate() {
            Err(Error::ConditionViolated(v)) => assert!(v[0].contains("4") && v[0].contains("3")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn thresholds_per_variant() {
        let t = |v: Variant, q: &str| ProblemSpec::new(v).validate().unwrap().threshold(q).unwrap();
        let pos = |e: Vec<f64>| Variant::SinhGordonPositive { rho: 1.0, exponents: e };
        assert!((t(pos(vec![0.5]), "rho") - 4.0 * PI).abs() < 1e-15);
        assert!((t(pos(vec![2.0]), "rho") - 2.0 * PI).abs() < 1e-15);
        assert!((t(pos(vec![0.3, 0.6, 0.9]), "rho") - 2.0 * PI).abs() < 1e-15);
        assert!((t(Variant::SinhGordonSigned { rho: 1.0, a: 0.5 }, "rho") - 16.0 * PI / 3.0).abs() < 1e-14);
        assert!((t(Variant::cosmic_string(2.0, 1.0), "pair-mass") - 4.0 * PI).abs() < 1e-15);
        assert!((t(Variant::cosmic_string(2.0, 1.0), "mass") - 2.0 * PI).abs() < 1e-15);
        assert!((t(Variant::cosmic_string(0.5, 1.0), "pair-mass") - 8.0 * PI).abs() < 1e-15);
        assert!((t(Variant::cosmic_string(0.5, 1.0), "mass") - 4.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn boundary_conditions_are_enforced() {
        let signed =
            ProblemSpec::new(Variant::SinhGordonSigned { rho: 1.0, a: 1.0 }).with_boundary(BoundaryData::constant(1.0));
        assert!(matches!(signed.validate(), Err(Error::ConditionViolated(_))));
        let pos = ProblemSpec::new(Variant::SinhGordonPositive { rho: 1.0, exponents: vec![0.5] })
            .with_boundary(BoundaryData::constant(-1.0));
        assert!(matches!(pos.validate(), Err(Error::ConditionViolated(_))));
        let bad = ProblemSpec::new(Variant::MeanField { rho: -1.0 });
        assert!(bad.validate().is_err());
        assert!(ProblemSpec::new(Variant::NonNormalized { alpha: 1.0 }).validate().is_err());
        assert!(ProblemSpec::new(Variant::singular_toda(2.0, 1.0, 1.0, 2.0, -0.5)).validate().is_err());
    }

    #[test]
    fn json_shape() {
        let p = ProblemSpec::new(Variant::toda(2.0, 1.0, 1.0, 2.0));
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"kind\":\"toda\""), "{s}");
        let back: ProblemSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let q: ProblemSpec = serde_json::from_str(r#"{"variant": {"kind": "gelfand", "rho": 1.0}}"#).unwrap();
        assert!(q.boundary.is_zero());
    }
}
