//! Conforming polygonal meshes: storage, edge topology, generators, layers,
//! shape-regularity audits and the line-based mesh file format.

mod generate;
mod io;
mod layers;
pub mod polygon;
mod regularity;

use std::collections::HashMap;
use std::fmt;

pub use generate::{
    generate_cartesian, generate_cartesian_lshape, generate_graded, generate_voronoi, voronoi_from_seeds, GradedDomain,
    Rectangle,
};
pub use io::{read_mesh, read_mesh_str, write_mesh, write_mesh_string, MeshFile};
pub use layers::{compute_layers, LayeredMesh};
pub use polygon::Point;
pub use regularity::{
    chebyshev_center, check_regularity, kernel, star_center, subtriangulate, CellRegularity, RegularityReport,
};

use crate::error::{Error, Result};

/// Which benchmark domain a mesh discretizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainTag {
    /// Ω₁ = (0,1)²
    UnitSquare,
    /// Ω₂ = (−10,10)²
    OscillatorSquare,
    /// Ω₃ = (−1,1)² ∖ (−1,0]²
    LShape,
    /// Ω₄ = (−1,1)²
    Checkerboard,
    Custom(String),
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainTag::UnitSquare => f.write_str("unit_square"),
            DomainTag::OscillatorSquare => f.write_str("oscillator_square"),
            DomainTag::LShape => f.write_str("lshape"),
            DomainTag::Checkerboard => f.write_str("checkerboard"),
            DomainTag::Custom(s) => f.write_str(s),
        }
    }
}

/// An undirected mesh edge. `vertices` is stored with the smaller index first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub cells: (usize, Option<usize>),
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.cells.1.is_none()
    }

    pub fn other_cell(&self, cell: usize) -> Option<usize> {
        match self.cells {
            (a, Some(b)) if a == cell => Some(b),
            (a, Some(b)) if b == cell => Some(a),
            _ => None,
        }
    }
}

/// Edge table derived from cell loops.
#[derive(Debug, Clone)]
pub struct EdgeTable {
    pub edges: Vec<Edge>,
    /// `cell_edges[c][i]` is the edge joining local vertices `i` and `i + 1` of cell `c`.
    pub cell_edges: Vec<Vec<usize>>,
}

/// Enumerates the undirected edges of a set of cell loops, in order of first
/// appearance. Edges shared by three or more cells are rejected.
pub fn build_edges(cells: &[Vec<usize>], n_vertices: usize) -> Result<EdgeTable> {
    let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut cell_edges = Vec::with_capacity(cells.len());
    for (c, cell) in cells.iter().enumerate() {
        let k = cell.len();
        let mut local = Vec::with_capacity(k);
        for i in 0..k {
            let (a, b) = (cell[i], cell[(i + 1) % k]);
            if a >= n_vertices || b >= n_vertices {
                return Err(Error::Structural(format!(
                    "cell {c} references vertex {} but only {n_vertices} exist",
                    a.max(b)
                )));
            }
            if a == b {
                return Err(Error::Structural(format!("cell {c} repeats vertex {a}")));
            }
            let key = (a.min(b), a.max(b));
            let idx = match lookup.get(&key) {
                Some(&e) => {
                    let edge = &mut edges[e];
                    if edge.cells.1.is_some() || edge.cells.0 == c {
                        return Err(Error::Structural(format!(
                            "non-manifold edge ({}, {}) touched again by cell {c}",
                            key.0, key.1
                        )));
                    }
                    edge.cells.1 = Some(c);
                    e
                }
                None => {
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        cells: (c, None),
                    });
                    lookup.insert(key, edges.len() - 1);
                    edges.len() - 1
                }
            };
            local.push(idx);
        }
        cell_edges.push(local);
    }
    Ok(EdgeTable { edges, cell_edges })
}

/// Polygonal mesh with counterclockwise cells and a derived edge table.
///
/// Once built a mesh is never mutated, so it can be shared freely between threads.
#[derive(Debug, Clone)]
pub struct PolyMesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    edges: EdgeTable,
    domain: DomainTag,
}

impl PolyMesh {
    /// Validates the cell loops (simple, counterclockwise) and builds the edge table.
    pub fn new(vertices: Vec<Point>, cells: Vec<Vec<usize>>, domain: DomainTag) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Structural("mesh has no cells".into()));
        }
        let edges = build_edges(&cells, vertices.len())?;
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(Error::Structural(format!("cell {c} has fewer than 3 vertices")));
            }
            let pts: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            if !polygon::is_simple(&pts) {
                return Err(Error::Structural(format!("cell {c} is self-intersecting")));
            }
            if polygon::signed_area(&pts) <= 0.0 {
                return Err(Error::Structural(format!("cell {c} is not counterclockwise")));
            }
        }
        Ok(Self {
            vertices,
            cells,
            edges,
            domain,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c]
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.edges.len()
    }

    /// Edge indices of cell `c`, local edge `i` running from local vertex `i` to `i + 1`.
    pub fn cell_edges(&self, c: usize) -> &[usize] {
        &self.edges.cell_edges[c]
    }

    pub fn domain(&self) -> &DomainTag {
        &self.domain
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        polygon::signed_area(&self.cell_points(c))
    }

    pub fn cell_diameter(&self, c: usize) -> f64 {
        polygon::diameter(&self.cell_points(c))
    }

    pub fn cell_centroid(&self, c: usize) -> Point {
        polygon::centroid(&self.cell_points(c))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_area(c)).sum()
    }

    /// Mesh size `h = max diam(K)`.
    pub fn h(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_diameter(c)).fold(0.0, f64::max)
    }

    /// Whether vertex `v` lies on a boundary edge.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertices.len()];
        for e in self.edges().iter().filter(|e| e.is_boundary()) {
            flags[e.vertices[0]] = true;
            flags[e.vertices[1]] = true;
        }
        flags
    }

    /// Cells sharing at least one vertex with each cell (closure contact).
    pub fn vertex_neighbours(&self) -> Vec<Vec<usize>> {
        let mut by_vertex: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for (c, cell) in self.cells.iter().enumerate() {
            for &v in cell {
                by_vertex[v].push(c);
            }
        }
        let mut out = Vec::with_capacity(self.cells.len());
        for (c, cell) in self.cells.iter().enumerate() {
            let mut nb: Vec<usize> = cell
                .iter()
                .flat_map(|&v| by_vertex[v].iter().copied())
                .filter(|&o| o != c)
                .collect();
            nb.sort_unstable();
            nb.dedup();
            out.push(nb);
        }
        out
    }
}
