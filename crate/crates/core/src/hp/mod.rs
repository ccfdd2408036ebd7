//! Polynomial degree distributions for the p- and hp-versions.

use std::fmt;

use crate::error::{Error, Result};
use crate::mesh::{LayeredMesh, PolyMesh};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DegreeRegime {
    Uniform(usize),
    /// Cell degree `mu (j + 1)` in layer `j`.
    Hp {
        mu: usize,
    },
    /// Degrees read from a file or set by hand.
    Explicit,
}

impl fmt::Display for DegreeRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegreeRegime::Uniform(p) => write!(f, "uniform(p={p})"),
            DegreeRegime::Hp { mu } => write!(f, "hp(mu={mu})"),
            DegreeRegime::Explicit => f.write_str("explicit"),
        }
    }
}

/// Degree per cell and per edge; edges carry the maximum of the adjacent cells.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeMap {
    pub cell_degree: Vec<usize>,
    pub edge_degree: Vec<usize>,
    pub regime: DegreeRegime,
}

impl DegreeMap {
    /// Applies the maximum rule to given cell degrees.
    pub fn from_cell_degrees(mesh: &PolyMesh, cell_degree: Vec<usize>, regime: DegreeRegime) -> Result<Self> {
        if cell_degree.len() != mesh.n_cells() {
            return Err(Error::argument(format!(
                "{} cell degrees for {} cells",
                cell_degree.len(),
                mesh.n_cells()
            )));
        }
        if let Some(c) = cell_degree.iter().position(|&p| p < 1) {
            return Err(Error::argument(format!("cell {c} has degree 0")));
        }
        let edge_degree = mesh
            .edges()
            .iter()
            .map(|e| {
                let a = cell_degree[e.cells.0];
                e.cells.1.map_or(a, |b| a.max(cell_degree[b]))
            })
            .collect();
        Ok(DegreeMap {
            cell_degree,
            edge_degree,
            regime,
        })
    }

    /// Degrees of the edges of cell `c` in local order.
    pub fn local_edge_degrees(&self, mesh: &PolyMesh, c: usize) -> Vec<usize> {
        mesh.cell_edges(c).iter().map(|&e| self.edge_degree[e]).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.cell_degree.iter().copied().max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.cell_degree.iter().copied().min().unwrap_or(0)
    }
}

pub fn assign_uniform(mesh: &PolyMesh, p: usize) -> Result<DegreeMap> {
    if p < 1 {
        return Err(Error::argument("polynomial degree must be >= 1"));
    }
    DegreeMap::from_cell_degrees(mesh, vec![p; mesh.n_cells()], DegreeRegime::Uniform(p))
}

pub fn assign_hp(layered: &LayeredMesh, mu: usize) -> Result<DegreeMap> {
    if mu < 1 {
        return Err(Error::argument("mu must be >= 1"));
    }
    if layered.layer_of_cell.len() != layered.mesh.n_cells() {
        return Err(Error::argument("layer data does not match the mesh"));
    }
    let degrees = layered.layer_of_cell.iter().map(|j| mu * (j + 1)).collect();
    DegreeMap::from_cell_degrees(&layered.mesh, degrees, DegreeRegime::Hp { mu })
}
