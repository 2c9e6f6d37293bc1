//! Error functionals comparing a discrete solution with an exact one.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::approx::project_q0;
use crate::approx::quadrature::triangulate;
use crate::mesh::Point2;
use crate::system::{Discretization, SystemError, WeakFunction};
use crate::wgcore::energy_norm;

use super::ManufacturedSolution;

fn cell_block<'a>(disc: &Discretization, u: &'a WeakFunction, c: usize) -> &'a [f64] {
    let off = disc.dofs.cell_offsets[c];
    &u.coeffs[off..off + disc.dofs.cell_dim]
}

fn check_len(disc: &Discretization, u: &WeakFunction) -> Result<(), SystemError> {
    if u.coeffs.len() != disc.dofs.total {
        return Err(SystemError::Dimension(format!(
            "weak function has {} coefficients, expected {}",
            u.coeffs.len(),
            disc.dofs.total
        )));
    }
    Ok(())
}

/// `‖u - u0‖` over the whole mesh, by cell quadrature.
pub fn l2_error(
    u_h: &WeakFunction,
    exact: impl Fn(Point2) -> f64 + Sync,
    disc: &Discretization,
) -> Result<f64, SystemError> {
    check_len(disc, u_h)?;
    let sum: f64 = (0..disc.mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let ctx = &disc.contexts[c];
            let coeffs = cell_block(disc, u_h, c);
            ctx.rule.integrate(|p| (exact(p) - ctx.basis.evaluate(coeffs, p)).powi(2))
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(sum.sqrt())
}

/// `‖Q0(Δu) - Δ_w u_h‖`, which equals `‖Δ_w(Q_h u - u_h)‖` since the weak
/// Laplacian commutes with the projections.
pub fn weak_laplacian_error(
    u_h: &WeakFunction,
    lap_u: impl Fn(Point2) -> f64 + Sync,
    disc: &Discretization,
) -> Result<f64, SystemError> {
    check_len(disc, u_h)?;
    let parts: Result<Vec<f64>, SystemError> = (0..disc.mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let ctx = &disc.contexts[c];
            let op = &disc.elements[c];
            let target = project_q0(&lap_u, &ctx.basis, &ctx.rule)?;
            let d: DVector<f64> = target - &op.weak_laplacian * disc.gather(c, &u_h.coeffs);
            Ok(d.dot(&(&op.mass * &d)).max(0.0))
        })
        .collect();
    Ok(parts?.iter().sum::<f64>().sqrt())
}

/// `|||u_h - Q_h u|||`.
pub fn energy_error(
    u_h: &WeakFunction,
    exact: &ManufacturedSolution,
    disc: &Discretization,
) -> Result<f64, SystemError> {
    check_len(disc, u_h)?;
    let qh = disc.interpolate(&*exact.u, &*exact.grad_u)?;
    Ok(energy_norm(&u_h.sub(&qh), disc)?)
}

/// `‖u - Q0 u‖`, the pure approximation error of the cell space.
pub fn projection_error(exact: impl Fn(Point2) -> f64 + Sync, disc: &Discretization) -> Result<f64, SystemError> {
    let parts: Result<Vec<f64>, SystemError> = disc
        .contexts
        .par_iter()
        .map(|ctx| {
            let q = project_q0(&exact, &ctx.basis, &ctx.rule)?;
            Ok(ctx.rule.integrate(|p| (exact(p) - ctx.basis.evaluate(q.as_slice(), p)).powi(2)))
        })
        .collect();
    Ok(parts?.iter().sum::<f64>().sqrt())
}

/// One evaluation point of a sampled solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub cell: usize,
    pub point: Point2,
    pub u_h: f64,
    pub exact: f64,
}

impl SamplePoint {
    pub fn error(&self) -> f64 {
        self.u_h - self.exact
    }
}

/// Evaluates `u0` and the exact solution on a regular lattice inside every
/// cell: each triangle of the cell's triangulation is split into
/// `per_side²` similar triangles and the centroids of the upward ones are
/// taken, so no point lies on an edge.
pub fn sample_solution(
    u_h: &WeakFunction,
    exact: impl Fn(Point2) -> f64,
    disc: &Discretization,
    per_side: usize,
) -> Result<Vec<SamplePoint>, SystemError> {
    check_len(disc, u_h)?;
    if per_side == 0 {
        return Err(SystemError::Dimension("at least one sample per side is required".into()));
    }
    let s = per_side as f64;
    let mut out = Vec::new();
    for (c, ctx) in disc.contexts.iter().enumerate() {
        let coeffs = cell_block(disc, u_h, c);
        for [i, j, k] in triangulate(&ctx.polygon)? {
            let (a, b, d) = (ctx.polygon[i], ctx.polygon[j], ctx.polygon[k]);
            for p in 0..per_side {
                for q in 0..per_side - p {
                    let l1 = (p as f64 + 1.0 / 3.0) / s;
                    let l2 = (q as f64 + 1.0 / 3.0) / s;
                    let x = a + (b - a).scale(l1) + (d - a).scale(l2);
                    out.push(SamplePoint { cell: c, point: x, u_h: ctx.basis.evaluate(coeffs, x), exact: exact(x) });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_figure_pattern, generate_uniform_triangular, left_side, tag_boundary, MeshKind};
    use crate::verify::{solution_quadratic, solution_s2};
    use crate::wgcore::WgConfig;

    fn disc(kind: MeshKind, n: usize, m: usize) -> Discretization {
        let mesh = match kind {
            MeshKind::TriUniform => generate_uniform_triangular(n),
            k => generate_figure_pattern(n, k),
        };
        let mesh = tag_boundary(&mesh, left_side).unwrap();
        Discretization::new(mesh, WgConfig::new(m, 10.0).unwrap()).unwrap()
    }

    #[test]
    fn interpolant_of_polynomial_has_no_error() {
        let d = disc(MeshKind::Pentagon, 2, 2);
        let s = solution_quadratic();
        let qh = d.interpolate(&*s.u, &*s.grad_u).unwrap();
        assert!(l2_error(&qh, &*s.u, &d).unwrap() < 1e-12);
        assert!(weak_laplacian_error(&qh, &*s.lap_u, &d).unwrap() < 1e-10);
        assert!(energy_error(&qh, &s, &d).unwrap() < 1e-10);
        assert!(projection_error(&*s.u, &d).unwrap() < 1e-12);
    }

    #[test]
    fn zero_field_measures_the_norm() {
        let d = disc(MeshKind::TriUniform, 2, 2);
        let zero = WeakFunction::zeros(d.dofs.total);
        // ∫(x² + y²)² over the unit square = 28/45.
        let e = l2_error(&zero, |p| p.x * p.x + p.y * p.y, &d).unwrap();
        assert!((e - (28.0f64 / 45.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn wlap_error_is_homogeneous() {
        let d = disc(MeshKind::TriFigure, 2, 2);
        let s = solution_s2();
        let qh = d.interpolate(&*s.u, &*s.grad_u).unwrap();
        let e1 = weak_laplacian_error(&WeakFunction::zeros(d.dofs.total), |_| 0.0, &d).unwrap();
        assert_eq!(e1, 0.0);
        let e = weak_laplacian_error(&qh, |_| 0.0, &d).unwrap();
        let e2 = weak_laplacian_error(&qh.scaled(2.0), |_| 0.0, &d).unwrap();
        assert!((e2 - 2.0 * e).abs() <= 1e-12 * e);
    }

    #[test]
    fn samples_stay_inside_cells() {
        let d = disc(MeshKind::Pentagon, 1, 2);
        let zero = WeakFunction::zeros(d.dofs.total);
        let pts = sample_solution(&zero, |p| p.x, &d, 3).unwrap();
        // 3 triangles per pentagon, 6 points each.
        assert_eq!(pts.len(), 2 * 3 * 6);
        assert!(pts.iter().all(|s| s.point.x > 0.0 && s.point.x < 1.0 && s.point.y > 0.0 && s.point.y < 1.0));
        assert!(sample_solution(&zero, |p| p.x, &d, 0).is_err());
    }
}
