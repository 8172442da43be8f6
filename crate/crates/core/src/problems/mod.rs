//! Equation families: coefficients and thresholds, discrete weak forms, and the
//! changes of variables used by the uniqueness arguments.

mod forms;
mod spec;
mod transforms;

pub use forms::{DiscreteProblem, Evaluation, JacobianSolver, MassFunctional, Normalization, Term, WeakForm};
pub use spec::{CosmicTerm, DerivedConstants, ProblemSpec, Threshold, TodaCoefficients, Variant};
pub use transforms::{desingularize, lift_to_sci_form, resingularize, Desingularized, LiftedComponent, SciLift};
