//! L2 projections onto cell and edge polynomial spaces.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::mesh::{Point2, Segment};

use super::basis::{CellBasis, EdgeBasis};
use super::quadrature::{edge_quadrature, QuadratureRule};
use super::ApproxError;

pub fn cell_mass_matrix(basis: &CellBasis, rule: &QuadratureRule) -> DMatrix<f64> {
    let n = basis.dim();
    let mut m = DMatrix::zeros(n, n);
    for (&p, &w) in rule.points.iter().zip(&rule.weights) {
        let v = basis.values(p);
        for i in 0..n {
            for j in 0..=i {
                m[(i, j)] += w * v[i] * v[j];
            }
        }
    }
    m.fill_upper_triangle_with_lower_triangle();
    m
}

pub fn factor_mass(m: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>, ApproxError> {
    Cholesky::new(m).ok_or(ApproxError::SingularMass)
}

/// Coefficients of `Q0 f` in the cell basis.
pub fn project_q0(
    f: impl Fn(Point2) -> f64,
    basis: &CellBasis,
    rule: &QuadratureRule,
) -> Result<DVector<f64>, ApproxError> {
    let chol = factor_mass(cell_mass_matrix(basis, rule))?;
    let mut rhs = DVector::zeros(basis.dim());
    for (&p, &w) in rule.points.iter().zip(&rule.weights) {
        let fw = w * f(p);
        for (r, v) in rhs.iter_mut().zip(basis.values(p)) {
            *r += fw * v;
        }
    }
    Ok(chol.solve(&rhs))
}

/// Number of Gauss points used for edge integrals at a given edge degree:
/// exact for products of two degree-`degree` polynomials with two spare
/// degrees for smooth data.
pub fn edge_points(degree: usize) -> usize {
    degree + 3
}

/// L2 projection onto `P_degree(e)` in the `t^j` basis.
pub fn project_edge(
    f: impl Fn(Point2) -> f64,
    seg: &Segment,
    degree: usize,
    npoints: usize,
) -> Result<DVector<f64>, ApproxError> {
    let basis = EdgeBasis::new(degree, *seg);
    let q = edge_quadrature(seg, npoints);
    let n = basis.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for ((&t, &p), &w) in q.params.iter().zip(&q.points).zip(&q.weights) {
        let v = basis.values_at_param(t);
        let fw = w * f(p);
        for i in 0..n {
            rhs[i] += fw * v[i];
            for j in 0..n {
                m[(i, j)] += w * v[i] * v[j];
            }
        }
    }
    Ok(factor_mass(m)?.solve(&rhs))
}

/// `Q_b`: projection of a trace onto `P_m(e)`.
pub fn project_qb(f: impl Fn(Point2) -> f64, seg: &Segment, m: usize) -> Result<DVector<f64>, ApproxError> {
    project_edge(f, seg, m, edge_points(m))
}

/// `Q_n`: projection of a normal flux onto `P_{degree}(e)`; callers pass
/// `m - 1`.
pub fn project_qn(f: impl Fn(Point2) -> f64, seg: &Segment, degree: usize) -> Result<DVector<f64>, ApproxError> {
    project_edge(f, seg, degree, edge_points(degree + 1))
}

/// `Q_g`: componentwise projection of a vector field onto `[P_{degree}(e)]^2`.
pub fn project_qg(
    f: impl Fn(Point2) -> (f64, f64),
    seg: &Segment,
    degree: usize,
) -> Result<(DVector<f64>, DVector<f64>), ApproxError> {
    let n = edge_points(degree + 1);
    Ok((project_edge(|p| f(p).0, seg, degree, n)?, project_edge(|p| f(p).1, seg, degree, n)?))
}
