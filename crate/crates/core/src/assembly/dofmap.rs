use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hp::DegreeMap;
use crate::mesh::PolyMesh;
use crate::polyspace::dim_signed;
use crate::vem::DofLayout;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// Homogeneous Dirichlet, eliminated from the system.
    DirichletZero,
    /// Homogeneous (natural) Neumann.
    Neumann,
}

impl FromStr for BoundaryCondition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" | "dirichlet_zero" => Ok(BoundaryCondition::DirichletZero),
            "neumann" => Ok(BoundaryCondition::Neumann),
            _ => Err(Error::argument(format!("unknown boundary condition '{s}'"))),
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCondition::DirichletZero => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
        })
    }
}

/// Global numbering: vertices, then edge-internal nodes edge by edge, then
/// cell moments cell by cell. Edge slots run from the lower to the higher
/// vertex index.
#[derive(Debug, Clone)]
pub struct GlobalDofMap {
    n_vertices: usize,
    edge_offset: Vec<usize>,
    cell_offset: Vec<usize>,
    n_total: usize,
    /// Free index of every global DOF, `None` when eliminated.
    free: Vec<Option<usize>>,
    n_free: usize,
    boundary: Vec<bool>,
    pub bc: BoundaryCondition,
}

impl GlobalDofMap {
    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn is_boundary(&self, g: usize) -> bool {
        self.boundary[g]
    }

    pub fn free_index(&self, g: usize) -> Option<usize> {
        self.free[g]
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn vertex(&self, v: usize) -> usize {
        debug_assert!(v < self.n_vertices);
        v
    }

    pub fn edge_slot(&self, e: usize, k: usize) -> usize {
        self.edge_offset[e] + k
    }

    pub fn moment(&self, c: usize, a: usize) -> usize {
        self.cell_offset[c] + a
    }

    /// Global index of each local DOF of cell `c`.
    pub fn local_to_global(&self, mesh: &PolyMesh, degrees: &DegreeMap, c: usize, layout: &DofLayout) -> Vec<usize> {
        let cell = mesh.cell(c);
        let k = cell.len();
        let mut g = vec![0; layout.n_dofs()];
        for i in 0..k {
            g[i] = self.vertex(cell[i]);
        }
        for (i, &e) in mesh.cell_edges(c).iter().enumerate() {
            let pe = degrees.edge_degree[e];
            let forward = cell[i] == mesh.edges()[e].vertices[0];
            for s in 0..pe - 1 {
                let slot = if forward { s } else { pe - 2 - s };
                g[layout.edge_dof(i, s)] = self.edge_slot(e, slot);
            }
        }
        for a in 0..layout.n_moments() {
            g[layout.moment_dof(a)] = self.moment(c, a);
        }
        g
    }
}

pub fn build_dof_map(mesh: &PolyMesh, degrees: &DegreeMap, bc: BoundaryCondition) -> Result<GlobalDofMap> {
    if degrees.cell_degree.len() != mesh.n_cells() || degrees.edge_degree.len() != mesh.n_edges() {
        return Err(Error::Consistency("degree map does not match the mesh".into()));
    }
    for (c, edges) in (0..mesh.n_cells()).map(|c| (c, mesh.cell_edges(c))) {
        if let Some(&e) = edges.iter().find(|&&e| degrees.edge_degree[e] < degrees.cell_degree[c]) {
            return Err(Error::Consistency(format!(
                "edge {e} has degree {} below the degree {} of cell {c}",
                degrees.edge_degree[e], degrees.cell_degree[c]
            )));
        }
    }
    let n_vertices = mesh.n_vertices();
    let mut boundary = mesh.boundary_vertices();
    let mut next = n_vertices;
    let mut edge_offset = Vec::with_capacity(mesh.n_edges());
    for (e, edge) in mesh.edges().iter().enumerate() {
        edge_offset.push(next);
        let k = degrees.edge_degree[e] - 1;
        next += k;
        boundary.extend(std::iter::repeat_n(edge.is_boundary(), k));
    }
    let mut cell_offset = Vec::with_capacity(mesh.n_cells());
    for &p in &degrees.cell_degree {
        cell_offset.push(next);
        let k = dim_signed(p as isize - 2);
        next += k;
        boundary.extend(std::iter::repeat_n(false, k));
    }
    let mut free = Vec::with_capacity(next);
    let mut n_free = 0;
    for &b in &boundary {
        if b && bc == BoundaryCondition::DirichletZero {
            free.push(None);
        } else {
            free.push(Some(n_free));
            n_free += 1;
        }
    }
    if n_free == 0 {
        return Err(Error::argument(
            "no free degrees of freedom: mesh too coarse for the Dirichlet problem",
        ));
    }
    Ok(GlobalDofMap {
        n_vertices,
        edge_offset,
        cell_offset,
        n_total: next,
        free,
        n_free,
        boundary,
        bc,
    })
}
