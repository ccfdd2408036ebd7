//! One polygon of the enhanced virtual element space: geometry, orthonormal
//! basis, quadrature and the computable projectors.

use nalgebra::{DMatrix, DVector, Vector2};

use super::dofs::DofLayout;
use crate::error::{Error, Result};
use crate::mesh::polygon::{self, Point};
use crate::polyspace::{
    dim, dim_signed, gauss_legendre, gauss_lobatto, orthonormalize, polygon_quadrature, EdgeNodes, OrthoBasis,
    QuadratureRule,
};

#[derive(Debug, Clone)]
pub struct EdgeGeometry {
    pub a: Point,
    pub b: Point,
    pub length: f64,
    pub normal: Vector2<f64>,
    pub nodes: EdgeNodes,
}

impl EdgeGeometry {
    pub fn point(&self, t: f64) -> Point {
        self.a + (self.b - self.a) * (0.5 * (t + 1.0))
    }
}

/// Projector matrices acting on local DOF vectors.
#[derive(Debug, Clone)]
pub struct ProjectorSet {
    /// `π_p × N`: coefficients of `Π∇_p v` in the orthonormal basis.
    pub pi_nabla: DMatrix<f64>,
    /// `π_{p-1} × N`: coefficients of `Π⁰_{p-1} v`.
    pub pi_zero: DMatrix<f64>,
    /// `π_{p-1} × N` each: coefficients of `Π⁰_{p-1} ∂_x v` and `Π⁰_{p-1} ∂_y v`.
    pub pi_zero_grad: [DMatrix<f64>; 2],
    /// `∫_{∂K} v` as a row functional on DOF vectors.
    pub boundary_integral: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct LocalElement {
    pub cell: usize,
    pub layout: DofLayout,
    pub points: Vec<Point>,
    pub area: f64,
    pub h: f64,
    pub centroid: Point,
    pub basis: OrthoBasis,
    pub rule: QuadratureRule,
    pub edges: Vec<EdgeGeometry>,
}

impl LocalElement {
    /// `points` counterclockwise; `quad_order` must be at least `2p`.
    pub fn new(cell: usize, points: Vec<Point>, layout: DofLayout, quad_order: usize) -> Result<Self> {
        let k = points.len();
        if layout.n_vertices() != k {
            return Err(Error::Consistency(format!(
                "cell {cell}: layout has {} vertices, polygon has {k}",
                layout.n_vertices()
            )));
        }
        let p = layout.p;
        let area = polygon::signed_area(&points);
        let h = polygon::diameter(&points);
        let centroid = polygon::centroid(&points);
        let rule = polygon_quadrature(&points, quad_order).map_err(|e| e.in_cell(cell))?;
        let basis = orthonormalize(cell, centroid, h, p, &rule)?;
        let edges = (0..k)
            .map(|i| {
                let a = points[i];
                let b = points[(i + 1) % k];
                let length = (b - a).norm();
                EdgeGeometry {
                    a,
                    b,
                    length,
                    normal: polygon::outward_normal(&a, &b),
                    nodes: gauss_lobatto(layout.edge_degrees[i]),
                }
            })
            .collect();
        Ok(LocalElement {
            cell,
            layout,
            points,
            area,
            h,
            centroid,
            basis,
            rule,
            edges,
        })
    }

    pub fn p(&self) -> usize {
        self.layout.p
    }

    pub fn n_dofs(&self) -> usize {
        self.layout.n_dofs()
    }

    /// Degrees of freedom of a smooth function: nodal values on the boundary
    /// and scaled moments `|K|^{-1/2} ∫_K f q_a` inside.
    pub fn dofs_of(&self, f: impl Fn(&Point) -> f64) -> DVector<f64> {
        let l = &self.layout;
        let mut v = DVector::zeros(l.n_dofs());
        for (i, p) in self.points.iter().enumerate() {
            v[i] = f(p);
        }
        for (e, edge) in self.edges.iter().enumerate() {
            for k in 1..edge.nodes.degree() {
                v[l.edge_dof(e, k - 1)] = f(&edge.point(edge.nodes.nodes[k]));
            }
        }
        let s = 1.0 / self.area.sqrt();
        for (pt, w) in self.rule.points.iter().zip(&self.rule.weights) {
            let fv = f(pt) * w * s;
            let q = self.basis.eval(pt);
            for a in 0..l.n_moments() {
                v[l.moment_dof(a)] += fv * q[a];
            }
        }
        v
    }

    /// `N × π_p`: DOF vectors of the orthonormal basis functions.
    pub fn polynomial_dofs(&self) -> DMatrix<f64> {
        let l = &self.layout;
        let np = self.basis.dim();
        let mut d = DMatrix::zeros(l.n_dofs(), np);
        for (i, p) in self.points.iter().enumerate() {
            d.set_row(i, &self.basis.eval(p).transpose());
        }
        for (e, edge) in self.edges.iter().enumerate() {
            for k in 1..edge.nodes.degree() {
                let q = self.basis.eval(&edge.point(edge.nodes.nodes[k]));
                d.set_row(l.edge_dof(e, k - 1), &q.transpose());
            }
        }
        // orthonormality makes the moment block diagonal
        let s = 1.0 / self.area.sqrt();
        for a in 0..l.n_moments() {
            d[(l.moment_dof(a), a)] = s;
        }
        d
    }

    /// Basis values and gradients at the quadrature points (rows = points).
    fn sampled_basis(&self) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let nq = self.rule.len();
        let np = self.basis.dim();
        let mut val = DMatrix::zeros(nq, np);
        let mut gx = DMatrix::zeros(nq, np);
        let mut gy = DMatrix::zeros(nq, np);
        let mut lap = DMatrix::zeros(nq, np);
        for (i, pt) in self.rule.points.iter().enumerate() {
            val.set_row(i, &self.basis.eval(pt).transpose());
            let (x, y) = self.basis.grad(pt);
            gx.set_row(i, &x.transpose());
            gy.set_row(i, &y.transpose());
            lap.set_row(i, &self.basis.laplacian(pt).transpose());
        }
        (val, gx, gy, lap)
    }

    fn weighted(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut w = m.clone();
        for (i, wt) in self.rule.weights.iter().enumerate() {
            w.row_mut(i).scale_mut(*wt);
        }
        w
    }

    /// `π_p × π_p`: `∫_K (K ∇q_b) · ∇q_c` with `K` given at the quadrature points.
    pub fn stiffness_gram(&self, diffusion: Option<&[nalgebra::Matrix2<f64>]>) -> DMatrix<f64> {
        let (_, gx, gy, _) = self.sampled_basis();
        match diffusion {
            None => {
                let wx = self.weighted(&gx);
                let wy = self.weighted(&gy);
                gx.transpose() * wx + gy.transpose() * wy
            }
            Some(k) => {
                let np = self.basis.dim();
                let mut g = DMatrix::zeros(np, np);
                for (i, w) in self.rule.weights.iter().enumerate() {
                    let kx = gx.row(i) * k[i][(0, 0)] + gy.row(i) * k[i][(0, 1)];
                    let ky = gx.row(i) * k[i][(1, 0)] + gy.row(i) * k[i][(1, 1)];
                    g += (gx.row(i).transpose() * kx + gy.row(i).transpose() * ky) * *w;
                }
                g
            }
        }
    }

    pub fn projectors(&self) -> Result<ProjectorSet> {
        let l = &self.layout;
        let p = l.p;
        let n = l.n_dofs();
        let np = dim(p);
        let np1 = dim(p - 1);
        let np2 = dim_signed(p as isize - 2);
        let sqrt_area = self.area.sqrt();

        let (val, gx, gy, lap) = self.sampled_basis();
        let wval = self.weighted(&val.columns(0, np2).into_owned());
        // expansions of Δq_b and ∂q_b in the degree p - 2 orthonormal functions
        let lap_c = lap.transpose() * &wval;
        let dx_c = gx.transpose() * &wval;
        let dy_c = gy.transpose() * &wval;

        let mut gram = self.stiffness_gram(None);
        let mut rhs = DMatrix::zeros(np, n);
        let mut grad_x = DMatrix::zeros(np1, n);
        let mut grad_y = DMatrix::zeros(np1, n);
        let mut boundary_q = DVector::zeros(np);

        for (e, edge) in self.edges.iter().enumerate() {
            let half = 0.5 * edge.length;
            for (k, (&t, &w)) in edge.nodes.nodes.iter().zip(&edge.nodes.weights).enumerate() {
                let x = edge.point(t);
                let wk = w * half;
                let dof = l.edge_node_dof(e, k);
                let q = self.basis.eval(&x);
                let (qx, qy) = self.basis.grad(&x);
                boundary_q += &q * wk;
                rhs[(0, dof)] += wk;
                for b in 1..np {
                    rhs[(b, dof)] += wk * (qx[b] * edge.normal.x + qy[b] * edge.normal.y);
                }
                for a in 0..np1 {
                    grad_x[(a, dof)] += wk * q[a] * edge.normal.x;
                    grad_y[(a, dof)] += wk * q[a] * edge.normal.y;
                }
            }
        }
        for a in 0..np2 {
            let m = l.moment_dof(a);
            for b in 1..np {
                rhs[(b, m)] -= sqrt_area * lap_c[(b, a)];
            }
            for b in 0..np1 {
                grad_x[(b, m)] -= sqrt_area * dx_c[(b, a)];
                grad_y[(b, m)] -= sqrt_area * dy_c[(b, a)];
            }
        }
        // the constant row of the Gram matrix is zero; it carries the
        // boundary-average condition instead
        gram.set_row(0, &boundary_q.transpose());
        let pi_nabla = gram.lu().solve(&rhs).ok_or(Error::Conditioning {
            cell: self.cell,
            condition: f64::INFINITY,
        })?;

        let mut pi_zero = DMatrix::zeros(np1, n);
        for a in 0..np2 {
            pi_zero[(a, l.moment_dof(a))] = sqrt_area;
        }
        for a in np2..np1 {
            pi_zero.set_row(a, &pi_nabla.row(a));
        }

        Ok(ProjectorSet {
            boundary_integral: rhs.row(0).transpose(),
            pi_nabla,
            pi_zero,
            pi_zero_grad: [grad_x, grad_y],
        })
    }

    /// `N × N` Gram matrix of `(u, v)_{∂K}`, each edge integrated exactly by
    /// a `(p_e + 1)`-point Gauss–Legendre rule.
    pub fn boundary_mass(&self) -> DMatrix<f64> {
        let l = &self.layout;
        let mut m = DMatrix::zeros(l.n_dofs(), l.n_dofs());
        for (e, edge) in self.edges.iter().enumerate() {
            let pe = edge.nodes.degree();
            let (t, w) = gauss_legendre(pe + 1);
            let dofs: Vec<usize> = (0..=pe).map(|k| l.edge_node_dof(e, k)).collect();
            for (tg, wg) in t.iter().zip(&w) {
                let phi = edge.nodes.lagrange(*tg);
                let wg = wg * 0.5 * edge.length;
                for (i, &di) in dofs.iter().enumerate() {
                    for (j, &dj) in dofs.iter().enumerate() {
                        m[(di, dj)] += wg * phi[i] * phi[j];
                    }
                }
            }
        }
        m
    }
}
