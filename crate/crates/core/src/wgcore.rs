//! Element-local operators of the least-squares weak Galerkin scheme.
//!
//! A local weak function on cell `T` is the coefficient vector
//! `[v0 | vb(e_1) vgn(e_1) | vb(e_2) vgn(e_2) | ...]` where `v0` lives in the
//! scaled monomial basis of `P_m(T)`, `vb(e)` in `P_m(e)` and `vgn(e)` in
//! `P_{m-1}(e)`, both in the `t^j` basis of the edge's global
//! parametrization. `vgn` is the normal component of the boundary gradient
//! with respect to the global edge normal; the outward normal of `T` is
//! `sign * normal`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use thiserror::Error;

use crate::approx::projection::{cell_mass_matrix, edge_points, factor_mass};
use crate::approx::{
    cell_dim, cell_quadrature, edge_quadrature, ApproxError, CellBasis, EdgeBasis, EdgeQuadrature, QuadratureRule,
};
use crate::mesh::{Point2, PolyMesh, Segment};
use crate::system::{Discretization, WeakFunction};

#[derive(Debug, Error, PartialEq, Clone)]
pub enum WgError {
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("quadratic form is negative ({0:e}); element matrices are not positive semidefinite")]
    NotPositive(f64),
    #[error("weak function has {got} coefficients, layout expects {expected}")]
    LayoutMismatch { got: usize, expected: usize },
}

/// Polynomial degree `m` and squared wavenumber. The weak Laplacian is
/// computed in `P_m(T)`, the same space as `v0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WgConfig {
    pub degree: usize,
    pub k2: f64,
    /// Power `p` of the trace penalty weight `k² h_T^-p`; 3 for the scheme.
    /// Other values exist only to check that the test battery notices a
    /// mis-scaled stabilizer.
    pub trace_power: i32,
}

impl WgConfig {
    pub fn new(degree: usize, k2: f64) -> Result<Self, WgError> {
        if degree < 1 {
            return Err(WgError::InvalidConfig(format!("degree must be at least 1, got {degree}")));
        }
        if !(k2.is_finite() && k2 > 0.0) {
            return Err(WgError::InvalidConfig(format!("k2 must be positive and finite, got {k2}")));
        }
        Ok(Self { degree, k2, trace_power: 3 })
    }

    pub fn with_trace_power(self, trace_power: i32) -> Self {
        Self { trace_power, ..self }
    }

    pub fn weak_laplacian_degree(&self) -> usize {
        self.degree
    }

    pub fn cell_dim(&self) -> usize {
        cell_dim(self.degree)
    }

    pub fn trace_dim(&self) -> usize {
        self.degree + 1
    }

    pub fn flux_dim(&self) -> usize {
        self.degree
    }

    pub fn cell_quadrature_order(&self) -> usize {
        2 * self.degree + 4
    }

    pub fn edge_quadrature_points(&self) -> usize {
        edge_points(self.degree)
    }
}

/// Block offsets of a local coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalLayout {
    pub cell_dim: usize,
    pub trace_dim: usize,
    pub flux_dim: usize,
    pub n_edges: usize,
}

impl LocalLayout {
    pub fn new(config: &WgConfig, n_edges: usize) -> Self {
        Self { cell_dim: config.cell_dim(), trace_dim: config.trace_dim(), flux_dim: config.flux_dim(), n_edges }
    }

    pub fn len(&self) -> usize {
        self.cell_dim + self.n_edges * (self.trace_dim + self.flux_dim)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn trace_offset(&self, l: usize) -> usize {
        self.cell_dim + l * (self.trace_dim + self.flux_dim)
    }

    pub fn flux_offset(&self, l: usize) -> usize {
        self.trace_offset(l) + self.trace_dim
    }
}

/// Block view of a local weak function.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakFunctionLocal {
    pub v0: DVector<f64>,
    pub vb: Vec<DVector<f64>>,
    pub vgn: Vec<DVector<f64>>,
}

impl WeakFunctionLocal {
    pub fn zeros(layout: &LocalLayout) -> Self {
        Self {
            v0: DVector::zeros(layout.cell_dim),
            vb: vec![DVector::zeros(layout.trace_dim); layout.n_edges],
            vgn: vec![DVector::zeros(layout.flux_dim); layout.n_edges],
        }
    }

    pub fn from_vector(layout: &LocalLayout, x: &DVector<f64>) -> Result<Self, WgError> {
        if x.len() != layout.len() {
            return Err(WgError::LayoutMismatch { got: x.len(), expected: layout.len() });
        }
        Ok(Self {
            v0: x.rows(0, layout.cell_dim).into_owned(),
            vb: (0..layout.n_edges).map(|l| x.rows(layout.trace_offset(l), layout.trace_dim).into_owned()).collect(),
            vgn: (0..layout.n_edges).map(|l| x.rows(layout.flux_offset(l), layout.flux_dim).into_owned()).collect(),
        })
    }

    pub fn to_vector(&self, layout: &LocalLayout) -> DVector<f64> {
        let mut x = DVector::zeros(layout.len());
        x.rows_mut(0, layout.cell_dim).copy_from(&self.v0);
        for l in 0..layout.n_edges {
            x.rows_mut(layout.trace_offset(l), layout.trace_dim).copy_from(&self.vb[l]);
            x.rows_mut(layout.flux_offset(l), layout.flux_dim).copy_from(&self.vgn[l]);
        }
        x
    }
}

#[derive(Debug, Clone)]
pub struct LocalEdge {
    pub edge: usize,
    /// `+1` when the global edge normal is the outward normal of the cell.
    pub sign: f64,
    pub segment: Segment,
    /// Global edge normal.
    pub normal: Point2,
    pub quadrature: EdgeQuadrature,
    pub trace_basis: EdgeBasis,
    pub flux_basis: EdgeBasis,
}

impl LocalEdge {
    pub fn outward_normal(&self) -> Point2 {
        self.normal.scale(self.sign)
    }
}

/// Geometry, bases and quadrature of one cell.
#[derive(Debug, Clone)]
pub struct CellContext {
    pub cell: usize,
    pub polygon: Vec<Point2>,
    pub diameter: f64,
    pub basis: CellBasis,
    pub rule: QuadratureRule,
    pub edges: Vec<LocalEdge>,
    pub layout: LocalLayout,
}

impl CellContext {
    pub fn new(mesh: &PolyMesh, cell: usize, config: &WgConfig) -> Result<Self, WgError> {
        let c = &mesh.cells[cell];
        let polygon = mesh.cell_polygon(cell);
        let rule = cell_quadrature(&polygon, config.cell_quadrature_order())?;
        // Scaling by the centroid radius keeps the monomials of order one and
        // the local mass matrix well conditioned at high degree.
        let radius = polygon.iter().map(|v| v.dist(c.centroid)).fold(0.0, f64::max);
        let basis = CellBasis::new(config.degree, c.centroid, radius).orthonormalized(&rule)?;
        let edges: Vec<LocalEdge> = mesh.cell_to_edges[cell]
            .iter()
            .map(|side| {
                let segment = mesh.segment(side.edge);
                LocalEdge {
                    edge: side.edge,
                    sign: side.sign,
                    segment,
                    normal: mesh.edges[side.edge].normal,
                    quadrature: edge_quadrature(&segment, config.edge_quadrature_points()),
                    trace_basis: EdgeBasis::new(config.degree, segment),
                    flux_basis: EdgeBasis::new(config.degree - 1, segment),
                }
            })
            .collect();
        let layout = LocalLayout::new(config, edges.len());
        Ok(Self { cell, polygon, diameter: c.diameter, basis, rule, edges, layout })
    }

    pub fn mass_matrix(&self) -> DMatrix<f64> {
        cell_mass_matrix(&self.basis, &self.rule)
    }

    /// Moments `(f, psi_i)_T` by cell quadrature.
    pub fn moments(&self, f: impl Fn(Point2) -> f64) -> DVector<f64> {
        let mut out = DVector::zeros(self.basis.dim());
        for (&p, &w) in self.rule.points.iter().zip(&self.rule.weights) {
            let fw = w * f(p);
            for (o, v) in out.iter_mut().zip(self.basis.values(p)) {
                *o += fw * v;
            }
        }
        out
    }
}

/// Right-hand side matrix `B` of the weak Laplacian: row `i` holds
/// `(v0, Δψ_i)_T - <vb, ∇ψ_i·n>_∂T + <vg·n, ψ_i>_∂T` as a linear functional
/// of the local coefficients.
fn weak_laplacian_functional(ctx: &CellContext) -> DMatrix<f64> {
    let nb = ctx.basis.dim();
    let lay = ctx.layout;
    let mut b = DMatrix::zeros(nb, lay.len());
    for (&p, &w) in ctx.rule.points.iter().zip(&ctx.rule.weights) {
        let e = ctx.basis.eval(p);
        for i in 0..nb {
            let li = w * e.lap[i];
            for j in 0..nb {
                b[(i, j)] += li * e.value[j];
            }
        }
    }
    for (l, edge) in ctx.edges.iter().enumerate() {
        let n = edge.outward_normal();
        let q = &edge.quadrature;
        for ((&t, &p), &w) in q.params.iter().zip(&q.points).zip(&q.weights) {
            let e = ctx.basis.eval(p);
            let phi = edge.trace_basis.values_at_param(t);
            let chi = edge.flux_basis.values_at_param(t);
            for i in 0..nb {
                let gn = e.dx[i] * n.x + e.dy[i] * n.y;
                for (j, pj) in phi.iter().enumerate() {
                    b[(i, lay.trace_offset(l) + j)] -= w * pj * gn;
                }
                for (j, cj) in chi.iter().enumerate() {
                    b[(i, lay.flux_offset(l) + j)] += w * edge.sign * cj * e.value[i];
                }
            }
        }
    }
    b
}

/// `L_T` with `Δ_w v = L_T v` in cell-basis coefficients, and the mass matrix.
pub fn weak_laplacian_matrix(ctx: &CellContext) -> Result<(DMatrix<f64>, DMatrix<f64>), WgError> {
    let mass = ctx.mass_matrix();
    let chol: Cholesky<f64, Dyn> = factor_mass(mass.clone())?;
    let l = chol.solve(&weak_laplacian_functional(ctx));
    Ok((l, mass))
}

/// Weak Laplacian of a local weak function through the integrated-by-parts
/// form `(Δv0, w) + <v0 - vb, ∇w·n> + <(vg - ∇v0)·n, w>`, evaluated
/// directly from the blocks. Valid for polynomial `v0`.
pub fn weak_laplacian_by_parts(ctx: &CellContext, v: &WeakFunctionLocal) -> Result<DVector<f64>, WgError> {
    let nb = ctx.basis.dim();
    let coeffs = v.v0.as_slice();
    let mut rhs = DVector::zeros(nb);
    for (&p, &w) in ctx.rule.points.iter().zip(&ctx.rule.weights) {
        let e = ctx.basis.eval(p);
        let lap_v0: f64 = e.lap.iter().zip(coeffs).map(|(a, c)| a * c).sum();
        for i in 0..nb {
            rhs[i] += w * lap_v0 * e.value[i];
        }
    }
    for (l, edge) in ctx.edges.iter().enumerate() {
        let n = edge.outward_normal();
        let q = &edge.quadrature;
        for ((&t, &p), &w) in q.params.iter().zip(&q.points).zip(&q.weights) {
            let e = ctx.basis.eval(p);
            let v0: f64 = e.value.iter().zip(coeffs).map(|(a, c)| a * c).sum();
            let gn_v0: f64 = (0..nb).map(|j| (e.dx[j] * n.x + e.dy[j] * n.y) * coeffs[j]).sum();
            let vb = edge.trace_basis.evaluate(v.vb[l].as_slice(), t);
            let vg_n = edge.sign * edge.flux_basis.evaluate(v.vgn[l].as_slice(), t);
            for i in 0..nb {
                let gn_w = e.dx[i] * n.x + e.dy[i] * n.y;
                rhs[i] += w * ((v0 - vb) * gn_w + (vg_n - gn_v0) * e.value[i]);
            }
        }
    }
    Ok(factor_mass(ctx.mass_matrix())?.solve(&rhs))
}

/// Local stabilizer `k² h⁻³ <u0 - ub, v0 - vb>_∂T + k² h⁻¹ <(∇u0 - ug)·n, (∇v0 - vg)·n>_∂T`.
pub fn stabilizer_matrix(ctx: &CellContext, config: &WgConfig) -> DMatrix<f64> {
    let lay = ctx.layout;
    let nb = ctx.basis.dim();
    let n = lay.len();
    let h = ctx.diameter;
    let (w_trace, w_flux) = (config.k2 / h.powi(config.trace_power), config.k2 / h);
    let mut s = DMatrix::zeros(n, n);
    let mut r = DVector::zeros(n);
    for (l, edge) in ctx.edges.iter().enumerate() {
        let ne = edge.normal;
        let q = &edge.quadrature;
        for ((&t, &p), &w) in q.params.iter().zip(&q.points).zip(&q.weights) {
            let e = ctx.basis.eval(p);
            // value jump u0 - ub
            r.fill(0.0);
            for i in 0..nb {
                r[i] = e.value[i];
            }
            for (j, v) in edge.trace_basis.values_at_param(t).into_iter().enumerate() {
                r[lay.trace_offset(l) + j] = -v;
            }
            s.ger(w * w_trace, &r, &r, 1.0);
            // flux jump (∇u0 - ug)·n_e; the sign of n cancels in the product
            r.fill(0.0);
            for i in 0..nb {
                r[i] = e.dx[i] * ne.x + e.dy[i] * ne.y;
            }
            for (j, v) in edge.flux_basis.values_at_param(t).into_iter().enumerate() {
                r[lay.flux_offset(l) + j] = -v;
            }
            s.ger(w * w_flux, &r, &r, 1.0);
        }
    }
    symmetrize(&mut s);
    s
}

fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// All per-cell matrices of the scheme.
#[derive(Debug, Clone)]
pub struct ElementOperator {
    pub layout: LocalLayout,
    pub mass: DMatrix<f64>,
    /// `L_T`: local dofs to coefficients of the weak Laplacian.
    pub weak_laplacian: DMatrix<f64>,
    /// `L_T + k² E0`: local dofs to coefficients of `Δ_w v + k² v0`.
    pub residual: DMatrix<f64>,
    pub stabilizer: DMatrix<f64>,
    /// `A_T = (L_T + k² E0)ᵀ M_T (L_T + k² E0) + S_T`.
    pub ls_matrix: DMatrix<f64>,
}

impl ElementOperator {
    pub fn build(ctx: &CellContext, config: &WgConfig) -> Result<Self, WgError> {
        let (weak_laplacian, mass) = weak_laplacian_matrix(ctx)?;
        let mut residual = weak_laplacian.clone();
        for i in 0..ctx.layout.cell_dim {
            residual[(i, i)] += config.k2;
        }
        let stabilizer = stabilizer_matrix(ctx, config);
        let ls_matrix = local_ls_matrix(&residual, &mass, &stabilizer);
        Ok(Self { layout: ctx.layout, mass, weak_laplacian, residual, stabilizer, ls_matrix })
    }

    /// `b_T = (L_T + k² E0)ᵀ m_f` with `(m_f)_i = (f, ψ_i)_T`.
    pub fn local_rhs(&self, ctx: &CellContext, f: impl Fn(Point2) -> f64) -> DVector<f64> {
        self.residual.tr_mul(&ctx.moments(f))
    }

    pub fn quadratic_form(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.ls_matrix * x))
    }
}

pub fn local_ls_matrix(residual: &DMatrix<f64>, mass: &DMatrix<f64>, stabilizer: &DMatrix<f64>) -> DMatrix<f64> {
    let mut a = residual.tr_mul(&(mass * residual)) + stabilizer;
    symmetrize(&mut a);
    a
}

/// `|||u||| = sqrt(Σ_T u_Tᵀ A_T u_T)`.
pub fn energy_norm(u: &WeakFunction, disc: &Discretization) -> Result<f64, WgError> {
    let expected = disc.dofs.total;
    if u.coeffs.len() != expected {
        return Err(WgError::LayoutMismatch { got: u.coeffs.len(), expected });
    }
    let total: f64 =
        (0..disc.mesh.n_cells()).map(|c| disc.elements[c].quadratic_form(&disc.gather(c, &u.coeffs))).sum();
    if total < 0.0 {
        let scale: f64 = u.coeffs.iter().map(|v| v * v).sum::<f64>().max(1.0);
        if total < -1e-12 * scale {
            return Err(WgError::NotPositive(total));
        }
        return Ok(0.0);
    }
    Ok(total.sqrt())
}
