//! Shape-regularity audit: minimum edge ratio, star-shapedness with respect to
//! a ball, and the fan subtriangulation about the star center.

use nalgebra::{Matrix3, Vector2, Vector3};

use super::polygon::{self, Point};
use super::PolyMesh;
use crate::error::{Error, Result};

/// Per-cell shape diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRegularity {
    pub cell: usize,
    pub diameter: f64,
    pub min_edge: f64,
    /// Radius of the largest ball inside the kernel of the cell.
    pub kernel_radius: f64,
    pub edge_ratio: f64,
    pub ball_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct RegularityReport {
    /// min over cells of (shortest edge / diameter)
    pub gamma_d1: f64,
    /// min over cells of (kernel ball radius / diameter)
    pub gamma_d2: f64,
    pub cells: Vec<CellRegularity>,
    /// Cells with either ratio below the requested threshold.
    pub flagged: Vec<usize>,
}

/// Inner half-planes `n · x <= c` of every edge of a counterclockwise polygon.
fn edge_halfplanes(pts: &[Point]) -> Vec<(Vector2<f64>, f64)> {
    let k = pts.len();
    (0..k)
        .filter_map(|i| {
            let a = pts[i];
            let b = pts[(i + 1) % k];
            if (b - a).norm() == 0.0 {
                return None;
            }
            let n = polygon::outward_normal(&a, &b);
            Some((n, n.dot(&a.coords)))
        })
        .collect()
}

/// Center and radius of the largest disc contained in the kernel of a
/// counterclockwise polygon, or `None` when the kernel is empty or degenerate.
///
/// The kernel is the intersection of the inner edge half-planes, so the disc
/// solves the linear program `max r` s.t. `n_i · x + r <= c_i`. The program has
/// three unknowns; its optimum sits on a vertex fixed by three active
/// constraints, which are enumerated directly.
pub fn chebyshev_center(pts: &[Point]) -> Option<(Point, f64)> {
    let hp = edge_halfplanes(pts);
    let scale = polygon::diameter(pts);
    let tol = 1e-12 * scale.max(1e-300);
    let m = hp.len();
    let mut best: Option<(Point, f64)> = None;
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let rows = [hp[i], hp[j], hp[k]];
                let a = Matrix3::from_fn(|r, c| match c {
                    0 => rows[r].0.x,
                    1 => rows[r].0.y,
                    _ => 1.0,
                });
                if a.determinant().abs() < 1e-12 {
                    continue;
                }
                let rhs = Vector3::new(rows[0].1, rows[1].1, rows[2].1);
                let Some(sol) = a.lu().solve(&rhs) else {
                    continue;
                };
                let (x, r) = (Point::new(sol[0], sol[1]), sol[2]);
                if r <= 0.0 {
                    continue;
                }
                let feasible = hp.iter().all(|(n, c)| n.dot(&x.coords) + r <= c + tol);
                if feasible && best.is_none_or(|(_, rb)| r > rb) {
                    best = Some((x, r));
                }
            }
        }
    }
    best
}

/// Kernel of a counterclockwise polygon as a convex polygon (possibly empty).
pub fn kernel(pts: &[Point]) -> Vec<Point> {
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in pts {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let mut k = vec![lo, Point::new(hi.x, lo.y), hi, Point::new(lo.x, hi.y)];
    for (n, c) in edge_halfplanes(pts) {
        k = polygon::clip_halfplane(&k, &n, c);
        if k.is_empty() {
            break;
        }
    }
    k
}

/// Center used for the fan subtriangulation: the centroid of convex cells,
/// the center of the largest kernel ball otherwise.
pub fn star_center(pts: &[Point]) -> Result<Point> {
    if polygon::is_convex(pts) {
        return Ok(polygon::centroid(pts));
    }
    match chebyshev_center(pts) {
        Some((c, r)) if r > 1e-8 * polygon::diameter(pts) => Ok(c),
        _ => Err(Error::geometry(
            usize::MAX,
            "polygon kernel is empty (cell is not star-shaped)",
        )),
    }
}

/// Fan of triangles joining each edge to the star center, all counterclockwise.
pub fn subtriangulate(pts: &[Point]) -> Result<Vec<[Point; 3]>> {
    let c = star_center(pts)?;
    let k = pts.len();
    let tris: Vec<[Point; 3]> = (0..k).map(|i| [c, pts[i], pts[(i + 1) % k]]).collect();
    let scale = polygon::diameter(pts).powi(2);
    if tris
        .iter()
        .any(|t| polygon::orient(&t[0], &t[1], &t[2]) <= 1e-14 * scale)
    {
        return Err(Error::geometry(
            usize::MAX,
            "star center is not strictly inside the kernel",
        ));
    }
    Ok(tris)
}

/// Audits assumptions (D1) and (D2) for every cell; cells with either ratio below
/// `gamma_threshold` are listed in `flagged`.
pub fn check_regularity(mesh: &PolyMesh, gamma_threshold: f64) -> RegularityReport {
    let mut cells = Vec::with_capacity(mesh.n_cells());
    let mut flagged = Vec::new();
    for c in 0..mesh.n_cells() {
        let pts = mesh.cell_points(c);
        let k = pts.len();
        let diameter = polygon::diameter(&pts);
        let min_edge = (0..k)
            .map(|i| (pts[(i + 1) % k] - pts[i]).norm())
            .fold(f64::INFINITY, f64::min);
        let kernel_radius = chebyshev_center(&pts).map_or(0.0, |(_, r)| r);
        let entry = CellRegularity {
            cell: c,
            diameter,
            min_edge,
            kernel_radius,
            edge_ratio: min_edge / diameter,
            ball_ratio: kernel_radius / diameter,
        };
        if entry.edge_ratio < gamma_threshold || entry.ball_ratio < gamma_threshold {
            flagged.push(c);
        }
        cells.push(entry);
    }
    RegularityReport {
        gamma_d1: cells.iter().map(|c| c.edge_ratio).fold(f64::INFINITY, f64::min),
        gamma_d2: cells.iter().map(|c| c.ball_ratio).fold(f64::INFINITY, f64::min),
        cells,
        flagged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_graded, DomainTag, GradedDomain};

    fn square() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]
    }

    fn hexagon(s: f64) -> Vec<Point> {
        (0..6)
            .map(|i| {
                let t = std::f64::consts::PI / 3.0 * i as f64;
                Point::new(s * t.cos(), s * t.sin())
            })
            .collect()
    }

    #[test]
    fn unit_square_ratios() {
        let mesh = PolyMesh::new(square(), vec![vec![0, 1, 2, 3]], DomainTag::UnitSquare).unwrap();
        let rep = check_regularity(&mesh, 0.1);
        assert!((rep.gamma_d1 - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((rep.gamma_d2 - 0.5 / 2f64.sqrt()).abs() < 1e-8);
        assert!(rep.flagged.is_empty());
    }

    #[test]
    fn regular_hexagon_ball_ratio() {
        let s = 0.7;
        let pts = hexagon(s);
        let (c, r) = chebyshev_center(&pts).unwrap();
        assert!(c.coords.norm() < 1e-8);
        let ratio = r / polygon::diameter(&pts);
        let expected = (3f64.sqrt() / 2.0 * s) / (2.0 * s);
        assert!((ratio - expected).abs() < 1e-8);
    }

    #[test]
    fn convex_kernel_is_polygon() {
        let pts = hexagon(1.3);
        let k = kernel(&pts);
        assert!((polygon::signed_area(&k) - polygon::signed_area(&pts)).abs() < 1e-12);
    }

    #[test]
    fn nonconvex_kernel_center_sees_everything() {
        // L-shaped hexagon with reflex vertex at (0.5, -0.5)
        let pts = vec![
            Point::new(0.0, -1.0),
            Point::new(1.0, -1.0),
            Point::new(1.0, 1.0),
            Point::new(0.5, 0.5),
            Point::new(0.5, -0.5),
            Point::new(0.0, -0.5),
        ];
        let c = star_center(&pts).unwrap();
        assert!(c.x > 0.5 && c.y < -0.5);
        let k = kernel(&pts);
        assert!(polygon::signed_area(&k) > 0.0);
    }

    #[test]
    fn star_center_fails_without_kernel() {
        // comb-like polygon with empty kernel
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(5.0, 0.0),
            Point::new(5.0, 3.0),
            Point::new(4.0, 3.0),
            Point::new(4.0, 1.0),
            Point::new(3.0, 1.0),
            Point::new(3.0, 3.0),
            Point::new(2.0, 3.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 3.0),
            Point::new(0.0, 3.0),
        ];
        assert!(matches!(star_center(&pts), Err(Error::Geometry { .. })));
    }

    #[test]
    fn square_fan_has_four_quarters() {
        let tris = subtriangulate(&square()).unwrap();
        assert_eq!(tris.len(), 4);
        for t in &tris {
            assert!((polygon::signed_area(t) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn triangle_fan_sums_to_area() {
        let t = vec![Point::new(0.0, 0.0), Point::new(2.0, 0.1), Point::new(0.3, 1.7)];
        let tris = subtriangulate(&t).unwrap();
        assert_eq!(tris.len(), 3);
        let s: f64 = tris.iter().map(|t| polygon::signed_area(t)).sum();
        assert!((s - polygon::signed_area(&t)).abs() < 1e-12);
    }

    #[test]
    fn lshape_frame_fan_sums_to_area() {
        let lm = generate_graded(GradedDomain::LShape, 2, 0.5).unwrap();
        for c in 0..lm.mesh.n_cells() {
            let pts = lm.mesh.cell_points(c);
            let tris = subtriangulate(&pts).unwrap();
            let s: f64 = tris.iter().map(|t| polygon::signed_area(t)).sum();
            assert!((s - polygon::signed_area(&pts)).abs() < 1e-12);
        }
    }
}
