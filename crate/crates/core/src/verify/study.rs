//! Refinement studies: solve on a sequence of meshes and compute observed rates.

use std::time::{Duration, Instant};

use crate::mesh::{tag_boundary, MeshKind, Point2, PolyMesh};
use crate::system::{solve_cauchy, CauchyData, Discretization, SolverMethod, SolverOptions, SystemError};
use crate::wgcore::WgConfig;

use super::{energy_error, l2_error, weak_laplacian_error, ManufacturedSolution};

/// Where the meshes of a study come from.
#[derive(Debug, Clone)]
pub enum MeshSource {
    /// Generated family; level `ℓ` uses `2^(ℓ-1)` macro squares per side.
    Family(MeshKind),
    /// A fixed mesh, used for every requested level.
    Fixed(PolyMesh),
}

/// Number of macro squares per side at a refinement level.
pub fn level_size(level: u32) -> usize {
    1usize << level.saturating_sub(1)
}

impl MeshSource {
    pub fn mesh(&self, level: u32) -> PolyMesh {
        match self {
            MeshSource::Family(kind) => kind.generate(level_size(level)),
            MeshSource::Fixed(mesh) => mesh.clone(),
        }
    }
}

/// Which boundary edges carry no data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gamma2 {
    /// The side `x = 0`.
    Left,
    /// Cauchy data on the whole boundary.
    None,
    /// Use the tags already stored in the mesh.
    Keep,
}

impl Gamma2 {
    pub fn contains(self, p: Point2) -> bool {
        match self {
            Gamma2::Left => crate::mesh::left_side(p),
            Gamma2::None | Gamma2::Keep => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub grid_level: u32,
    pub n_cells: usize,
    pub h: f64,
    pub dofs: usize,
    pub l2_err: f64,
    pub l2_rate: Option<f64>,
    pub wlap_err: f64,
    pub wlap_rate: Option<f64>,
    pub energy_err: f64,
    pub energy_rate: Option<f64>,
    pub solver: SolverMethod,
    /// CG iterations, or refinement steps for the direct solver.
    pub iterations: usize,
    pub residual: f64,
    pub time: Duration,
}

/// Observed order between a coarse and a fine measurement. With equal mesh
/// sizes the base-2 logarithm of the error ratio is returned, which is zero
/// for identical runs.
pub fn observed_rate(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> Option<f64> {
    if !(e_coarse > 0.0 && e_fine > 0.0) {
        return None;
    }
    let ratio = (e_coarse / e_fine).ln();
    let hr = (h_coarse / h_fine).ln();
    Some(if hr.abs() < 1e-12 { ratio / std::f64::consts::LN_2 } else { ratio / hr })
}

/// Fills the rate fields from consecutive reports.
pub fn fill_rates(reports: &mut [ErrorReport]) {
    for i in 1..reports.len() {
        let (c, f) = (&reports[i - 1], &reports[i]);
        let l2 = observed_rate(c.l2_err, f.l2_err, c.h, f.h);
        let wl = observed_rate(c.wlap_err, f.wlap_err, c.h, f.h);
        let en = observed_rate(c.energy_err, f.energy_err, c.h, f.h);
        reports[i].l2_rate = l2;
        reports[i].wlap_rate = wl;
        reports[i].energy_rate = en;
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub wg: WgConfig,
    pub gamma2: Gamma2,
    pub solver: SolverOptions,
}

/// Tags, discretizes, solves and measures one mesh.
pub fn solve_level(
    solution: &ManufacturedSolution,
    mesh: &PolyMesh,
    level: u32,
    cfg: &StudyConfig,
) -> Result<(ErrorReport, Discretization, crate::system::WeakFunction), SystemError> {
    let start = Instant::now();
    let gamma2 = cfg.gamma2;
    let tagged = match gamma2 {
        Gamma2::Keep => mesh.clone(),
        _ => tag_boundary(mesh, |p| gamma2.contains(p)).map_err(|_| SystemError::NoCauchyData)?,
    };
    let disc = Discretization::new(tagged, cfg.wg)?;
    let k2 = cfg.wg.k2;
    let f = |p: Point2| solution.source(k2, p);
    let g1 = |p: Point2| solution.value(p);
    let g2 = |p: Point2, n: Point2| solution.flux(p, n);
    let (u_h, rep) = solve_cauchy(&disc, &CauchyData { f: &f, g1: &g1, g2: &g2 }, &cfg.solver)?;
    let report = ErrorReport {
        grid_level: level,
        n_cells: disc.mesh.n_cells(),
        h: disc.mesh.h,
        dofs: disc.dofs.free_count,
        l2_err: l2_error(&u_h, &*solution.u, &disc)?,
        l2_rate: None,
        wlap_err: weak_laplacian_error(&u_h, &*solution.lap_u, &disc)?,
        wlap_rate: None,
        energy_err: energy_error(&u_h, solution, &disc)?,
        energy_rate: None,
        solver: rep.method,
        iterations: rep.iterations,
        residual: rep.relative_residual,
        time: start.elapsed(),
    };
    Ok((report, disc, u_h))
}

/// Runs every level in order. On failure the reports finished so far are
/// returned alongside the error.
pub fn convergence_study(
    solution: &ManufacturedSolution,
    source: &MeshSource,
    levels: &[u32],
    cfg: &StudyConfig,
) -> Result<Vec<ErrorReport>, (Vec<ErrorReport>, SystemError)> {
    let mut reports = Vec::with_capacity(levels.len());
    for &level in levels {
        match solve_level(solution, &source.mesh(level), level, cfg) {
            Ok((r, _, _)) => {
                reports.push(r);
                fill_rates(&mut reports);
            }
            Err(e) => return Err((reports, e)),
        }
    }
    Ok(reports)
}
