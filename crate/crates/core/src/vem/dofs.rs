use crate::error::{Error, Result};
use crate::polyspace::dim_signed;

/// Kind of a local degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dof {
    /// Value at local vertex `i`.
    Vertex(usize),
    /// Value at the `k`-th internal Gauss–Lobatto node of local edge `e`,
    /// counted along the counterclockwise traversal of the cell.
    EdgeNode { edge: usize, k: usize },
    /// Scaled moment against the `a`-th orthonormal polynomial.
    Moment(usize),
}

/// Local ordering: vertex values, edge-internal values edge by edge, moments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofLayout {
    pub cell: usize,
    pub p: usize,
    pub edge_degrees: Vec<usize>,
    edge_offsets: Vec<usize>,
    n_moments: usize,
    n_dofs: usize,
}

impl DofLayout {
    /// Layout of a cell with `edge_degrees.len()` vertices; edge `i` joins
    /// local vertices `i` and `i + 1`.
    pub fn new(cell: usize, p: usize, edge_degrees: &[usize]) -> Result<Self> {
        if p < 1 {
            return Err(Error::argument(format!("cell {cell}: degree must be >= 1")));
        }
        if let Some(&pe) = edge_degrees.iter().find(|&&pe| pe < 1) {
            return Err(Error::argument(format!("cell {cell}: edge degree {pe} < 1")));
        }
        // edge integrals of trace times degree p - 1 data are exact on the
        // Gauss–Lobatto nodes only when p_e >= p
        if let Some(&pe) = edge_degrees.iter().find(|&&pe| pe < p) {
            return Err(Error::argument(format!(
                "cell {cell}: edge degree {pe} below the cell degree {p}"
            )));
        }
        let nv = edge_degrees.len();
        let mut edge_offsets = Vec::with_capacity(nv);
        let mut next = nv;
        for &pe in edge_degrees {
            edge_offsets.push(next);
            next += pe - 1;
        }
        let n_moments = dim_signed(p as isize - 2);
        Ok(DofLayout {
            cell,
            p,
            edge_degrees: edge_degrees.to_vec(),
            edge_offsets,
            n_moments,
            n_dofs: next + n_moments,
        })
    }

    pub fn uniform(cell: usize, p: usize, n_vertices: usize) -> Result<Self> {
        Self::new(cell, p, &vec![p; n_vertices])
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_vertices(&self) -> usize {
        self.edge_degrees.len()
    }

    pub fn n_moments(&self) -> usize {
        self.n_moments
    }

    pub fn n_boundary(&self) -> usize {
        self.n_dofs - self.n_moments
    }

    pub fn edge_dof(&self, edge: usize, k: usize) -> usize {
        debug_assert!(k + 1 < self.edge_degrees[edge]);
        self.edge_offsets[edge] + k
    }

    pub fn moment_dof(&self, a: usize) -> usize {
        self.n_dofs - self.n_moments + a
    }

    /// Local DOF carrying the value at node `k` (`0..=p_e`) of edge `e`,
    /// endpoints included.
    pub fn edge_node_dof(&self, edge: usize, k: usize) -> usize {
        let pe = self.edge_degrees[edge];
        match k {
            0 => edge,
            _ if k == pe => (edge + 1) % self.n_vertices(),
            _ => self.edge_dof(edge, k - 1),
        }
    }

    pub fn describe(&self, i: usize) -> Dof {
        let nv = self.n_vertices();
        if i < nv {
            return Dof::Vertex(i);
        }
        if i >= self.n_dofs - self.n_moments {
            return Dof::Moment(i - (self.n_dofs - self.n_moments));
        }
        let e = self.edge_offsets.partition_point(|&o| o <= i) - 1;
        Dof::EdgeNode {
            edge: e,
            k: i - self.edge_offsets[e],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_counts() {
        assert_eq!(DofLayout::uniform(0, 1, 4).unwrap().n_dofs(), 4);
        assert_eq!(DofLayout::uniform(0, 2, 4).unwrap().n_dofs(), 9);
        assert_eq!(DofLayout::uniform(0, 3, 5).unwrap().n_dofs(), 18);
        for p in 1..9 {
            for nv in 3..9 {
                let l = DofLayout::uniform(0, p, nv).unwrap();
                assert_eq!(l.n_dofs(), nv * p + p * (p - 1) / 2);
            }
        }
    }

    #[test]
    fn variable_edge_degrees() {
        let l = DofLayout::new(0, 2, &[2, 4, 3]).unwrap();
        assert_eq!(l.n_dofs(), 3 + 1 + 3 + 2 + 1);
        assert_eq!(l.edge_node_dof(1, 0), 1);
        assert_eq!(l.edge_node_dof(1, 4), 2);
        assert_eq!(l.edge_node_dof(2, 3), 0);
        assert_eq!(l.edge_node_dof(1, 2), l.edge_dof(1, 1));
        for i in 0..l.n_dofs() {
            let back = match l.describe(i) {
                Dof::Vertex(v) => v,
                Dof::EdgeNode { edge, k } => l.edge_dof(edge, k),
                Dof::Moment(a) => l.moment_dof(a),
            };
            assert_eq!(back, i);
        }
    }

    #[test]
    fn invalid_degrees_are_rejected() {
        assert!(DofLayout::new(0, 0, &[1, 1, 1]).is_err());
        assert!(DofLayout::new(0, 1, &[1, 0, 1]).is_err());
        assert!(DofLayout::new(0, 3, &[3, 2, 3]).is_err());
    }
}
