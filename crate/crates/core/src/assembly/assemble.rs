use rayon::prelude::*;

use super::coefficients::CoefficientField;
use super::dofmap::{build_dof_map, BoundaryCondition, GlobalDofMap};
use super::sparse::CsrMatrix;
use crate::error::Result;
use crate::hp::DegreeMap;
use crate::mesh::PolyMesh;
use crate::vem::{local_matrices, DofLayout, LocalElement, LocalMatrices, StabChoice};

/// Element quadrature exactness `2p + extra`.
pub const DEFAULT_QUAD_EXTRA: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssemblyOptions {
    pub stab: StabChoice,
    pub bc: BoundaryCondition,
    pub quad_extra: usize,
}

impl AssemblyOptions {
    pub fn new(stab: StabChoice, bc: BoundaryCondition) -> Self {
        AssemblyOptions {
            stab,
            bc,
            quad_extra: DEFAULT_QUAD_EXTRA,
        }
    }
}

/// `A = Σ (A_K + B_K)` and `M = Σ C_K` on the free DOFs.
#[derive(Debug, Clone)]
pub struct SystemMatrices {
    pub a: CsrMatrix,
    pub m: CsrMatrix,
    pub dofs: GlobalDofMap,
}

/// Local element of cell `c` with edge degrees from `degrees`.
pub fn build_element(mesh: &PolyMesh, degrees: &DegreeMap, c: usize, quad_extra: usize) -> Result<LocalElement> {
    let p = degrees.cell_degree[c];
    let layout = DofLayout::new(c, p, &degrees.local_edge_degrees(mesh, c))?;
    LocalElement::new(c, mesh.cell_points(c), layout, 2 * p + quad_extra)
}

pub fn assemble(
    mesh: &PolyMesh,
    degrees: &DegreeMap,
    coeffs: &CoefficientField,
    stab: StabChoice,
    bc: BoundaryCondition,
) -> Result<SystemMatrices> {
    assemble_with(mesh, degrees, coeffs, AssemblyOptions::new(stab, bc))
}

pub fn assemble_with(
    mesh: &PolyMesh,
    degrees: &DegreeMap,
    coeffs: &CoefficientField,
    opts: AssemblyOptions,
) -> Result<SystemMatrices> {
    let dofs = build_dof_map(mesh, degrees, opts.bc)?;
    let locals: Vec<(Vec<usize>, LocalMatrices)> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let el = build_element(mesh, degrees, c, opts.quad_extra)?;
            let lm = local_matrices(&el, coeffs, opts.stab)?;
            Ok((dofs.local_to_global(mesh, degrees, c, &el.layout), lm))
        })
        .collect::<Result<_>>()?;

    // ordered merge keeps the summation order independent of thread scheduling
    let mut ta = Vec::new();
    let mut tm = Vec::new();
    for (g, lm) in &locals {
        let free: Vec<Option<usize>> = g.iter().map(|&i| dofs.free_index(i)).collect();
        for (i, fi) in free.iter().enumerate() {
            let Some(fi) = *fi else { continue };
            for (j, fj) in free.iter().enumerate() {
                let Some(fj) = *fj else { continue };
                let mut a = lm.stiffness[(i, j)];
                if let Some(b) = &lm.potential {
                    a += b[(i, j)];
                }
                ta.push((fi, fj, a));
                tm.push((fi, fj, lm.mass[(i, j)]));
            }
        }
    }
    let n = dofs.n_free();
    Ok(SystemMatrices {
        a: CsrMatrix::from_triplets(n, n, &ta),
        m: CsrMatrix::from_triplets(n, n, &tm),
        dofs,
    })
}
