use super::polygon::{self, Point};
use super::PolyMesh;
use crate::error::{Error, Result};

/// Mesh with a layer index per cell, counted from a set of marked points.
#[derive(Debug, Clone)]
pub struct LayeredMesh {
    pub mesh: PolyMesh,
    pub layer_of_cell: Vec<usize>,
    /// Total number of layers `n + 1`.
    pub n_layers: usize,
    pub singular_points: Vec<Point>,
    /// Grading parameter, when the mesh came from a graded generator.
    pub sigma: Option<f64>,
}

impl LayeredMesh {
    pub fn cells_in_layer(&self, j: usize) -> Vec<usize> {
        (0..self.layer_of_cell.len())
            .filter(|&c| self.layer_of_cell[c] == j)
            .collect()
    }

    /// Largest cell diameter in layer `j` (0 for an empty layer).
    pub fn max_diameter(&self, j: usize) -> f64 {
        self.cells_in_layer(j)
            .into_iter()
            .map(|c| self.mesh.cell_diameter(c))
            .fold(0.0, f64::max)
    }
}

/// Layer 0 holds the cells whose closure touches a marked point; layer `j`
/// holds the untouched cells sharing a vertex with layer `j - 1`. Cells beyond
/// layer `n_layers - 1` are clamped into the last layer.
pub fn compute_layers(mesh: PolyMesh, singular_points: &[Point], n_layers: usize) -> Result<LayeredMesh> {
    if n_layers == 0 {
        return Err(Error::argument("at least one layer is required"));
    }
    let tol = 1e-10 * mesh.h();
    let mut layer: Vec<Option<usize>> = vec![None; mesh.n_cells()];
    let mut front = Vec::new();
    for c in 0..mesh.n_cells() {
        let pts = mesh.cell_points(c);
        if singular_points.iter().any(|p| polygon::contains_closed(&pts, p, tol)) {
            layer[c] = Some(0);
            front.push(c);
        }
    }
    if front.is_empty() {
        return Err(Error::argument("no cell touches a marked singular point"));
    }
    let neighbours = mesh.vertex_neighbours();
    let last = n_layers - 1;
    let mut j = 0;
    while !front.is_empty() {
        j += 1;
        let mut next = Vec::new();
        for &c in &front {
            for &o in &neighbours[c] {
                if layer[o].is_none() {
                    layer[o] = Some(j.min(last));
                    next.push(o);
                }
            }
        }
        front = next;
    }
    // cells in other connected components are saturated as well
    let layer_of_cell = layer.into_iter().map(|l| l.unwrap_or(last)).collect();
    Ok(LayeredMesh {
        mesh,
        layer_of_cell,
        n_layers,
        singular_points: singular_points.to_vec(),
        sigma: None,
    })
}
