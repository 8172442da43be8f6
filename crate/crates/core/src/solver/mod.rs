//! Discrete Laplacian, Newton iteration, multi-start search and continuation.

mod continuation;
pub mod linalg;
mod multistart;
mod newton;
mod operator;

pub use continuation::{continuation, ContinuationConfig, ContinuationTrace, TracePoint};
pub use multistart::{
    multi_start, multi_start_on, start_field, start_menu, Cluster, MultiStartConfig, MultiStartResult, StartKind,
    StartRecord,
};
pub use newton::{newton_solve, NewtonConfig, SolveResult, SolveSummary};
pub use operator::DiscreteOperator;
