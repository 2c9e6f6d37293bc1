//! Polynomial bases, quadrature and L2 projections on cells and edges.

pub mod basis;
pub mod projection;
pub mod quadrature;

use thiserror::Error;

pub use basis::{cell_dim, CellBasis, CellBasisEval, EdgeBasis};
pub use projection::{cell_mass_matrix, project_q0, project_qb, project_qg, project_qn};
pub use quadrature::{cell_quadrature, edge_quadrature, gauss_legendre, EdgeQuadrature, QuadratureRule};

#[derive(Debug, Error, PartialEq, Eq, Clone, Copy)]
pub enum ApproxError {
    #[error("polygon has no positive-area ear (degenerate cell)")]
    DegeneratePolygon,
    #[error("mass matrix is not positive definite")]
    SingularMass,
}
