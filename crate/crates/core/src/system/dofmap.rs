use crate::mesh::{EdgeTag, PolyMesh};
use crate::wgcore::WgConfig;

use super::SystemError;

/// Global numbering: all interior blocks in cell order, then for every
/// edge its trace block followed by its normal-flux block. Trace and flux
/// dofs of accessible-boundary edges are constrained by the Cauchy data.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub cell_offsets: Vec<usize>,
    pub trace_offsets: Vec<usize>,
    pub flux_offsets: Vec<usize>,
    pub cell_dim: usize,
    pub trace_dim: usize,
    pub flux_dim: usize,
    pub constrained: Vec<bool>,
    /// Position of each dof in the reduced (free) numbering.
    pub free_index: Vec<Option<usize>>,
    pub free_count: usize,
    pub constrained_count: usize,
    pub total: usize,
}

pub fn build_dof_map(mesh: &PolyMesh, config: &WgConfig) -> Result<DofMap, SystemError> {
    let (cd, td, fd) = (config.cell_dim(), config.trace_dim(), config.flux_dim());
    let cell_offsets: Vec<usize> = (0..mesh.n_cells()).map(|c| c * cd).collect();
    let base = mesh.n_cells() * cd;
    let trace_offsets: Vec<usize> = (0..mesh.n_edges()).map(|e| base + e * (td + fd)).collect();
    let flux_offsets: Vec<usize> = trace_offsets.iter().map(|o| o + td).collect();
    let total = base + mesh.n_edges() * (td + fd);

    let mut constrained = vec![false; total];
    for (e, edge) in mesh.edges.iter().enumerate() {
        match edge.tag {
            EdgeTag::Boundary => return Err(SystemError::UntaggedBoundary(e)),
            EdgeTag::Gamma1 => constrained[trace_offsets[e]..trace_offsets[e] + td + fd].fill(true),
            EdgeTag::Interior | EdgeTag::Gamma2 => {}
        }
    }
    let mut next = 0;
    let free_index = constrained
        .iter()
        .map(|&c| {
            (!c).then(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    let free_count = next;
    Ok(DofMap {
        cell_offsets,
        trace_offsets,
        flux_offsets,
        cell_dim: cd,
        trace_dim: td,
        flux_dim: fd,
        constrained,
        free_index,
        free_count,
        constrained_count: total - free_count,
        total,
    })
}

impl DofMap {
    /// Local-to-global map of one cell, in the local block order.
    pub fn cell_dofs(&self, mesh: &PolyMesh, c: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (self.cell_offsets[c]..self.cell_offsets[c] + self.cell_dim).collect();
        for side in &mesh.cell_to_edges[c] {
            out.extend(self.trace_offsets[side.edge]..self.trace_offsets[side.edge] + self.trace_dim);
            out.extend(self.flux_offsets[side.edge]..self.flux_offsets[side.edge] + self.flux_dim);
        }
        out
    }
}
