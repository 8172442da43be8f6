//! Domains, triangulations, boundary data and Green's functions.

mod boundary;
mod domain;
mod green;
mod locate;
mod mesh;
mod meshgen;

pub type Point = [f64; 2];

pub use boundary::{BoundaryData, BoundaryKind};
pub use domain::{Axis, DomainSpec, Shape};
pub use green::{green_function, green_function_lumped, green_function_numeric, singular_weight, GreenFunction};
pub use locate::Locator;
pub use mesh::{Mesh, MeshDocument, Topology};
pub use meshgen::{build_mesh, build_refined};

pub(crate) use locate::barycentric;

/// Uniform 1-to-4 refinement (see [`Mesh::refine`]).
pub fn refine_mesh(m: &Mesh) -> crate::error::Result<Mesh> {
    m.refine()
}
