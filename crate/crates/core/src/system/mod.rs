//! Global degrees of freedom, assembly, Cauchy-data elimination and solves.

pub mod dofmap;
pub mod solver;
pub mod sparse;

use nalgebra::DVector;
use rayon::prelude::*;
use thiserror::Error;

use crate::approx::{project_q0, project_qb, project_qn, ApproxError};
use crate::mesh::{EdgeTag, Point2, PolyMesh};
use crate::wgcore::{CellContext, ElementOperator, WgConfig, WgError};

pub use dofmap::{build_dof_map, DofMap};
pub use solver::{solve, SolveReport, SolverMethod, SolverOptions};
pub use sparse::SparseSymmetric;

#[derive(Debug, Error, PartialEq, Clone)]
pub enum SystemError {
    #[error(transparent)]
    Element(#[from] WgError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error("boundary edge {0} is not tagged as accessible or inaccessible")]
    UntaggedBoundary(usize),
    #[error("no accessible boundary edges: Cauchy data cannot be imposed")]
    NoCauchyData,
    #[error("boundary data is not finite on edge {0}")]
    DataNotEvaluable(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("system is not symmetric positive definite: {0}")]
    NotSpd(String),
    #[error("CG did not converge in {iterations} iterations (last relative residual {:e})", history.last().copied().unwrap_or(f64::NAN))]
    MaxIterations { iterations: usize, history: Vec<f64> },
}

/// Global coefficient vector of a weak function, laid out by a [`DofMap`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeakFunction {
    pub coeffs: Vec<f64>,
}

impl WeakFunction {
    pub fn zeros(n: usize) -> Self {
        Self { coeffs: vec![0.0; n] }
    }

    pub fn sub(&self, other: &WeakFunction) -> WeakFunction {
        WeakFunction { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn scaled(&self, s: f64) -> WeakFunction {
        WeakFunction { coeffs: self.coeffs.iter().map(|a| a * s).collect() }
    }
}

/// A tagged mesh together with every element operator of the scheme.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: PolyMesh,
    pub config: WgConfig,
    pub dofs: DofMap,
    pub contexts: Vec<CellContext>,
    pub elements: Vec<ElementOperator>,
    cell_dofs: Vec<Vec<usize>>,
}

impl Discretization {
    /// Builds the element operators, in parallel over cells.
    pub fn new(mesh: PolyMesh, config: WgConfig) -> Result<Self, SystemError> {
        let dofs = build_dof_map(&mesh, &config)?;
        let built: Result<Vec<(CellContext, ElementOperator)>, WgError> = (0..mesh.n_cells())
            .into_par_iter()
            .map(|c| {
                let ctx = CellContext::new(&mesh, c, &config)?;
                let op = ElementOperator::build(&ctx, &config)?;
                Ok((ctx, op))
            })
            .collect();
        let (contexts, elements) = built?.into_iter().unzip();
        let cell_dofs = (0..mesh.n_cells()).map(|c| dofs.cell_dofs(&mesh, c)).collect();
        Ok(Self { mesh, config, dofs, contexts, elements, cell_dofs })
    }

    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        &self.cell_dofs[c]
    }

    pub fn gather(&self, c: usize, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.cell_dofs[c].len(), self.cell_dofs[c].iter().map(|&g| x[g]))
    }

    fn scatter_matrix(&self, pick: impl Fn(&ElementOperator) -> &nalgebra::DMatrix<f64>) -> SparseSymmetric {
        let nnz: usize = self.cell_dofs.iter().map(|d| d.len() * d.len()).sum();
        let mut trips = Vec::with_capacity(nnz);
        for (c, op) in self.elements.iter().enumerate() {
            let dofs = &self.cell_dofs[c];
            let a = pick(op);
            for (i, &gi) in dofs.iter().enumerate() {
                for (j, &gj) in dofs.iter().enumerate() {
                    trips.push((gi, gj, a[(i, j)]));
                }
            }
        }
        SparseSymmetric::from_triplets(self.dofs.total, trips)
    }

    /// Global matrix of `a(·,·)` over all dofs and the load vector of
    /// `Σ_T (f, Δ_w v + k² v0)_T`.
    pub fn assemble(&self, f: impl Fn(Point2) -> f64 + Sync) -> (SparseSymmetric, Vec<f64>) {
        (self.scatter_matrix(|op| &op.ls_matrix), self.assemble_load(f))
    }

    /// Global matrix of the stabilizer `s(·,·)` alone.
    pub fn assemble_stabilizer(&self) -> SparseSymmetric {
        self.scatter_matrix(|op| &op.stabilizer)
    }

    pub fn assemble_load(&self, f: impl Fn(Point2) -> f64 + Sync) -> Vec<f64> {
        let locals: Vec<DVector<f64>> = (0..self.mesh.n_cells())
            .into_par_iter()
            .map(|c| self.elements[c].local_rhs(&self.contexts[c], &f))
            .collect();
        let mut b = vec![0.0; self.dofs.total];
        for (c, local) in locals.iter().enumerate() {
            for (&g, v) in self.cell_dofs[c].iter().zip(local.iter()) {
                b[g] += v;
            }
        }
        b
    }

    /// `Q_h u = {Q0 u, Q_b u, Q_n(∇u·n_e)}`.
    pub fn interpolate(
        &self,
        u: impl Fn(Point2) -> f64 + Sync,
        grad: impl Fn(Point2) -> (f64, f64) + Sync,
    ) -> Result<WeakFunction, SystemError> {
        let m = self.config.degree;
        let d = &self.dofs;
        let mut x = vec![0.0; d.total];
        let cells: Result<Vec<DVector<f64>>, ApproxError> =
            self.contexts.par_iter().map(|ctx| project_q0(&u, &ctx.basis, &ctx.rule)).collect();
        for (c, v) in cells?.iter().enumerate() {
            x[d.cell_offsets[c]..d.cell_offsets[c] + d.cell_dim].copy_from_slice(v.as_slice());
        }
        for e in 0..self.mesh.n_edges() {
            let seg = self.mesh.segment(e);
            let n = self.mesh.edges[e].normal;
            let vb = project_qb(&u, &seg, m)?;
            let vgn = project_qn(
                |p| {
                    let g = grad(p);
                    g.0 * n.x + g.1 * n.y
                },
                &seg,
                m - 1,
            )?;
            x[d.trace_offsets[e]..d.trace_offsets[e] + d.trace_dim].copy_from_slice(vb.as_slice());
            x[d.flux_offsets[e]..d.flux_offsets[e] + d.flux_dim].copy_from_slice(vgn.as_slice());
        }
        Ok(WeakFunction { coeffs: x })
    }
}

/// Free-dof system after eliminating the Cauchy data.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: SparseSymmetric,
    pub rhs: Vec<f64>,
    /// Full-length vector holding `Q_b g1` and the flux data on the
    /// accessible edges, zero elsewhere.
    pub constrained_values: Vec<f64>,
}

/// Imposes `u_b = Q_b g1` and `u_g·n = Q_n g2` on the accessible boundary.
/// `g2(p, n)` is the flux with respect to the outward unit normal `n`; the
/// stored coefficient is converted to the global edge normal here.
pub fn apply_cauchy_bc(
    a: &SparseSymmetric,
    b: &[f64],
    disc: &Discretization,
    g1: impl Fn(Point2) -> f64,
    g2: impl Fn(Point2, Point2) -> f64,
) -> Result<ReducedSystem, SystemError> {
    let d = &disc.dofs;
    if a.dim != d.total || b.len() != d.total {
        return Err(SystemError::Dimension(format!("system has {} rows, dof map {}", a.dim, d.total)));
    }
    if d.constrained_count == 0 {
        return Err(SystemError::NoCauchyData);
    }
    let m = disc.config.degree;
    let mesh = &disc.mesh;
    let mut xc = vec![0.0; d.total];
    for e in 0..mesh.n_edges() {
        if mesh.edges[e].tag != EdgeTag::Gamma1 {
            continue;
        }
        let seg = mesh.segment(e);
        let sign = mesh.boundary_sign(e);
        let outward = mesh.edges[e].normal.scale(sign);
        let vb = project_qb(&g1, &seg, m)?;
        let flux = project_qn(|p| g2(p, outward), &seg, m - 1)?;
        if !(vb.iter().chain(flux.iter()).all(|v| v.is_finite())) {
            return Err(SystemError::DataNotEvaluable(e));
        }
        xc[d.trace_offsets[e]..d.trace_offsets[e] + d.trace_dim].copy_from_slice(vb.as_slice());
        for (j, v) in flux.iter().enumerate() {
            xc[d.flux_offsets[e] + j] = sign * v;
        }
    }
    let (matrix, coupling) = a.reduce(&d.free_index, d.free_count, &xc);
    let mut rhs = Vec::with_capacity(d.free_count);
    for (i, &bi) in b.iter().enumerate() {
        if let Some(fi) = d.free_index[i] {
            debug_assert_eq!(fi, rhs.len());
            rhs.push(bi - coupling[fi]);
        }
    }
    Ok(ReducedSystem { matrix, rhs, constrained_values: xc })
}

/// Merges free values and constrained values into one weak function.
pub fn reconstruct(free: &[f64], constrained: &[f64], map: &DofMap) -> Result<WeakFunction, SystemError> {
    if free.len() != map.free_count || constrained.len() != map.total {
        return Err(SystemError::Dimension(format!(
            "free {} / {}, constrained {} / {}",
            free.len(),
            map.free_count,
            constrained.len(),
            map.total
        )));
    }
    let coeffs = (0..map.total)
        .map(|i| match map.free_index[i] {
            Some(fi) => free[fi],
            None => constrained[i],
        })
        .collect();
    Ok(WeakFunction { coeffs })
}

/// Inverse of [`reconstruct`]: free values and the full-length constrained part.
pub fn split(u: &WeakFunction, map: &DofMap) -> (Vec<f64>, Vec<f64>) {
    let mut free = Vec::with_capacity(map.free_count);
    let mut constrained = vec![0.0; map.total];
    for (i, &v) in u.coeffs.iter().enumerate() {
        if map.constrained[i] {
            constrained[i] = v;
        } else {
            free.push(v);
        }
    }
    (free, constrained)
}

/// Problem data: source and Cauchy data on the accessible boundary.
pub struct CauchyData<'a> {
    pub f: &'a (dyn Fn(Point2) -> f64 + Sync),
    pub g1: &'a (dyn Fn(Point2) -> f64 + Sync),
    /// Flux with respect to the outward normal, `g2(p, n)`.
    pub g2: &'a (dyn Fn(Point2, Point2) -> f64 + Sync),
}

/// Assemble, eliminate, solve and reconstruct.
pub fn solve_cauchy(
    disc: &Discretization,
    data: &CauchyData<'_>,
    opts: &SolverOptions,
) -> Result<(WeakFunction, SolveReport), SystemError> {
    let (a, b) = disc.assemble(data.f);
    let reduced = apply_cauchy_bc(&a, &b, disc, data.g1, data.g2)?;
    drop(a);
    let (free, report) = solve(&reduced.matrix, &reduced.rhs, opts)?;
    Ok((reconstruct(&free, &reduced.constrained_values, &disc.dofs)?, report))
}
