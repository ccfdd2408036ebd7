//! Gauss–Legendre and Gauss–Lobatto rules on `[-1, 1]`, collapsed-Gauss rules
//! on triangles and composite rules on star-shaped polygons.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mesh::polygon::{self, Point};
use crate::mesh::subtriangulate;

/// Legendre polynomial `P_n(x)` and its derivative.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    // derivative from the three-term identity; valid away from x = ±1
    let dp = if (x * x - 1.0).abs() > 1e-300 {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    } else {
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * 0.5 * (n * (n + 1)) as f64
    };
    (p1, dp)
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending. Exact to degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// The `p + 1` Gauss–Lobatto nodes on `[-1, 1]` (endpoints included) with weights.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeNodes {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl EdgeNodes {
    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Maps the nodes onto the segment `a -> b`.
    pub fn mapped(&self, a: &Point, b: &Point) -> Vec<Point> {
        self.nodes.iter().map(|t| a + (b - a) * (0.5 * (t + 1.0))).collect()
    }

    /// Values of the Lagrange basis on the nodes at `t ∈ [-1, 1]`.
    pub fn lagrange(&self, t: f64) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|k| {
                let mut v = 1.0;
                for m in 0..n {
                    if m != k {
                        v *= (t - self.nodes[m]) / (self.nodes[k] - self.nodes[m]);
                    }
                }
                v
            })
            .collect()
    }
}

/// Gauss–Lobatto rule with nodes at the roots of `(1 - x²) P'_p(x)`; exact to degree `2p - 1`.
pub fn gauss_lobatto(p: usize) -> EdgeNodes {
    assert!(p >= 1, "Gauss-Lobatto rule needs p >= 1");
    let n = p + 1;
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[p] = 1.0;
    for i in 1..p {
        // Chebyshev–Lobatto initial guess, Newton on P'_p
        let mut x = -(PI * i as f64 / p as f64).cos();
        for _ in 0..100 {
            let (pp, dp) = legendre(p, x);
            let d2p = (2.0 * x * dp - (p * (p + 1)) as f64 * pp) / (1.0 - x * x);
            let dx = dp / d2p;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
    }
    // enforce exact symmetry
    for i in 0..n / 2 {
        let s = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -s;
        nodes[n - 1 - i] = s;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            let (pp, _) = legendre(p, x);
            2.0 / ((p * (p + 1)) as f64 * pp * pp)
        })
        .collect();
    EdgeNodes { nodes, weights }
}

/// Points and positive weights with a declared polynomial exactness order.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Collapsed (Duffy) Gauss rule on a counterclockwise triangle, exact to `order`.
pub fn triangle_rule(tri: &[Point; 3], order: usize) -> QuadratureRule {
    // the Jacobian adds one power in the collapsed direction
    let n = (order + 3) / 2;
    let (x, w) = gauss_legendre(n);
    let area = polygon::orient(&tri[0], &tri[1], &tri[2]) * 0.5;
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for i in 0..n {
        let s = 0.5 * (x[i] + 1.0);
        for j in 0..n {
            let t = 0.5 * (x[j] + 1.0);
            let edge = tri[1] + (tri[2] - tri[1]) * t;
            points.push(tri[0] + (edge - tri[0]) * s);
            weights.push(w[i] * w[j] * 0.25 * 2.0 * area * s);
        }
    }
    QuadratureRule { points, weights, order }
}

/// Composite rule on the fan subtriangulation of a star-shaped polygon.
pub fn polygon_quadrature(pts: &[Point], order: usize) -> Result<QuadratureRule> {
    let tris = subtriangulate(pts)?;
    let mut rule = QuadratureRule {
        points: Vec::new(),
        weights: Vec::new(),
        order,
    };
    for t in &tris {
        let r = triangle_rule(t, order);
        rule.points.extend(r.points);
        rule.weights.extend(r.weights);
    }
    if rule.weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::geometry(usize::MAX, "non-positive quadrature weight"));
    }
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rules_are_exact() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            for d in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-14, "n {n} d {d}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn lobatto_low_orders() {
        let r1 = gauss_lobatto(1);
        assert_eq!(r1.nodes, vec![-1.0, 1.0]);
        assert_relative_eq!(r1.weights[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(r1.weights[1], 1.0, epsilon = 1e-15);

        let r2 = gauss_lobatto(2);
        assert_eq!(r2.nodes, vec![-1.0, 0.0, 1.0]);
        for (w, e) in r2.weights.iter().zip([1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]) {
            assert_relative_eq!(*w, e, epsilon = 1e-15);
        }

        let r3 = gauss_lobatto(3);
        let s = 1.0 / 5f64.sqrt();
        for (x, e) in r3.nodes.iter().zip([-1.0, -s, s, 1.0]) {
            assert_relative_eq!(*x, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn lobatto_invariants() {
        for p in 1..=16 {
            let r = gauss_lobatto(p);
            assert_eq!(r.nodes.len(), p + 1);
            assert_eq!(r.nodes[0], -1.0);
            assert_eq!(r.nodes[p], 1.0);
            for i in 0..=p {
                assert_eq!(r.nodes[i], -r.nodes[p - i]);
            }
            assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for d in 0..2 * p {
                let q: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(d as i32)).sum();
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "p {p} d {d}");
            }
        }
    }

    fn unit_square() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]
    }

    #[test]
    fn square_area_and_moment() {
        let r0 = polygon_quadrature(&unit_square(), 0).unwrap();
        assert_relative_eq!(r0.integrate(|_| 1.0), 1.0, epsilon = 1e-15);
        let r4 = polygon_quadrature(&unit_square(), 4).unwrap();
        assert_relative_eq!(r4.integrate(|p| p.x * p.x * p.y * p.y), 1.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn unit_triangle_first_moment() {
        let t = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        let r = triangle_rule(&t, 1);
        assert_relative_eq!(r.integrate(|p| p.x), 1.0 / 6.0, epsilon = 1e-15);
        assert!(r.weights.iter().all(|&w| w > 0.0));
    }
}
