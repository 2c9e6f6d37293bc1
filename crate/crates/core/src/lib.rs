//! Least-squares weak Galerkin discretization of the Cauchy problem for the
//! Helmholtz equation `Δu + k²u = f` on polygonal meshes of the unit square,
//! with Dirichlet and Neumann data prescribed on the same boundary part.

pub mod approx;
pub mod cli;
pub mod mesh;
pub mod system;
pub mod verify;
pub mod wgcore;
