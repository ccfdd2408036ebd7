//! Mesh generators: Cartesian grids, clipped Voronoi tessellations with Lloyd
//! relaxation, and the geometrically graded frame meshes used for hp refinement.

use std::collections::HashMap;

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layers::{compute_layers, LayeredMesh};
use super::polygon::{self, Point};
use super::{DomainTag, PolyMesh};
use crate::error::{Error, Result};

/// Axis-aligned rectangle `(x0, x1) × (y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rectangle {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::argument(format!(
                "degenerate rectangle ({x0}, {x1}) x ({y0}, {y1})"
            )));
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    pub fn unit() -> Self {
        Self {
            x0: 0.0,
            x1: 1.0,
            y0: 0.0,
            y1: 1.0,
        }
    }

    pub fn square(half: f64) -> Self {
        Self {
            x0: -half,
            x1: half,
            y0: -half,
            y1: half,
        }
    }

    pub fn corners(&self) -> Vec<Point> {
        vec![
            Point::new(self.x0, self.y0),
            Point::new(self.x1, self.y0),
            Point::new(self.x1, self.y1),
            Point::new(self.x0, self.y1),
        ]
    }

    pub fn diameter(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

/// Tolerance-based vertex deduplication on a hash grid.
struct VertexPool {
    tol: f64,
    points: Vec<Point>,
    grid: HashMap<(i64, i64), Vec<usize>>,
}

impl VertexPool {
    fn new(tol: f64) -> Self {
        Self {
            tol,
            points: Vec::new(),
            grid: HashMap::new(),
        }
    }

    fn key(&self, p: &Point) -> (i64, i64) {
        let cell = 4.0 * self.tol;
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    fn insert(&mut self, p: Point) -> usize {
        let (kx, ky) = self.key(&p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.grid.get(&(kx + dx, ky + dy)) {
                    for &id in ids {
                        if (self.points[id] - p).norm() <= self.tol {
                            return id;
                        }
                    }
                }
            }
        }
        self.points.push(p);
        let id = self.points.len() - 1;
        self.grid.entry((kx, ky)).or_default().push(id);
        id
    }

    /// Inserts a loop of points, dropping repeats created by merging.
    fn insert_loop(&mut self, pts: &[Point]) -> Vec<usize> {
        let mut ids: Vec<usize> = Vec::with_capacity(pts.len());
        for p in pts {
            let id = self.insert(*p);
            if ids.last() != Some(&id) {
                ids.push(id);
            }
        }
        while ids.len() > 1 && ids.first() == ids.last() {
            ids.pop();
        }
        ids
    }
}

/// Uniform `nx × ny` grid of axis-aligned rectangles.
pub fn generate_cartesian(nx: usize, ny: usize, rect: Rectangle, domain: DomainTag) -> Result<PolyMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::argument("Cartesian mesh needs nx, ny >= 1"));
    }
    let rect = Rectangle::new(rect.x0, rect.x1, rect.y0, rect.y1)?;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = rect.y0 + (rect.y1 - rect.y0) * j as f64 / ny as f64;
        for i in 0..=nx {
            let x = rect.x0 + (rect.x1 - rect.x0) * i as f64 / nx as f64;
            vertices.push(Point::new(x, y));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    PolyMesh::new(vertices, cells, domain)
}

/// Uniform Cartesian mesh of the L-shaped domain `(-1,1)² ∖ (-1,0]²` with `n`
/// cells per unit length.
pub fn generate_cartesian_lshape(n: usize) -> Result<PolyMesh> {
    let full = generate_cartesian(2 * n, 2 * n, Rectangle::square(1.0), DomainTag::LShape)?;
    let keep: Vec<Vec<usize>> = (0..full.n_cells())
        .filter(|&c| {
            let x = full.cell_centroid(c);
            !(x.x < 0.0 && x.y < 0.0)
        })
        .map(|c| full.cell(c).to_vec())
        .collect();
    let mut remap = vec![usize::MAX; full.n_vertices()];
    let mut vertices = Vec::new();
    let cells = keep
        .into_iter()
        .map(|cell| {
            cell.into_iter()
                .map(|v| {
                    if remap[v] == usize::MAX {
                        remap[v] = vertices.len();
                        vertices.push(full.vertices()[v]);
                    }
                    remap[v]
                })
                .collect()
        })
        .collect();
    PolyMesh::new(vertices, cells, DomainTag::LShape)
}

fn voronoi_cells(seeds: &[Point], rect: &Rectangle) -> Vec<Vec<Point>> {
    seeds
        .iter()
        .enumerate()
        .map(|(i, si)| {
            let mut poly = rect.corners();
            for (j, sj) in seeds.iter().enumerate() {
                if i == j || poly.is_empty() {
                    continue;
                }
                let n: Vector2<f64> = sj - si;
                let mid = (si.coords + sj.coords) * 0.5;
                poly = polygon::clip_halfplane(&poly, &n, n.dot(&mid));
            }
            poly
        })
        .collect()
}

/// Clipped Voronoi tessellation of explicit seeds after `lloyd_iterations`
/// centroid relaxations. Seeds are jittered by `1e-12 · diam` to break ties.
pub fn voronoi_from_seeds(
    seeds: &[Point],
    rect: Rectangle,
    lloyd_iterations: usize,
    rng_seed: u64,
    domain: DomainTag,
) -> Result<PolyMesh> {
    if seeds.is_empty() {
        return Err(Error::argument("Voronoi mesh needs at least one seed"));
    }
    let diam = rect.diameter();
    for (i, a) in seeds.iter().enumerate() {
        if !(a.x > rect.x0 && a.x < rect.x1 && a.y > rect.y0 && a.y < rect.y1) {
            return Err(Error::Generation(format!("seed {i} lies outside the rectangle")));
        }
        for b in &seeds[i + 1..] {
            if (a - b).norm() <= 1e-10 * diam {
                return Err(Error::Generation(format!("duplicate seed near ({}, {})", a.x, a.y)));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed ^ 0x5eed_5eed);
    let jitter = 1e-12 * diam;
    let mut current: Vec<Point> = seeds
        .iter()
        .map(|s| {
            Point::new(
                s.x + jitter * rng.gen_range(-1.0..1.0),
                s.y + jitter * rng.gen_range(-1.0..1.0),
            )
        })
        .collect();
    for _ in 0..lloyd_iterations {
        let cells = voronoi_cells(&current, &rect);
        for (s, cell) in current.iter_mut().zip(&cells) {
            if cell.len() >= 3 && polygon::signed_area(cell) > 0.0 {
                *s = polygon::centroid(cell);
            }
        }
    }
    let polys = voronoi_cells(&current, &rect);
    let mut pool = VertexPool::new(1e-9 * diam);
    let mut cells = Vec::with_capacity(polys.len());
    for (i, poly) in polys.iter().enumerate() {
        let ids = pool.insert_loop(poly);
        if ids.len() < 3 {
            return Err(Error::Generation(format!(
                "seed {i} produced a degenerate cell (collinear or coincident seeds)"
            )));
        }
        cells.push(ids);
    }
    let mesh = PolyMesh::new(pool.points, cells, domain)
        .map_err(|e| Error::Generation(format!("tessellation is not a valid mesh: {e}")))?;
    Ok(mesh)
}

/// Clipped Voronoi mesh of `n_seeds` uniformly drawn seeds.
pub fn generate_voronoi(
    n_seeds: usize,
    rect: Rectangle,
    lloyd_iterations: usize,
    rng_seed: u64,
    domain: DomainTag,
) -> Result<PolyMesh> {
    if n_seeds == 0 {
        return Err(Error::argument("Voronoi mesh needs at least one seed"));
    }
    let rect = Rectangle::new(rect.x0, rect.x1, rect.y0, rect.y1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let seeds: Vec<Point> = (0..n_seeds)
        .map(|_| Point::new(rng.gen_range(rect.x0..rect.x1), rng.gen_range(rect.y0..rect.y1)))
        .collect();
    voronoi_from_seeds(&seeds, rect, lloyd_iterations, rng_seed, domain)
}

/// Domains with a built-in geometrically graded mesh family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradedDomain {
    /// `(-1,1)² ∖ (-1,0]²`, refined towards the re-entrant corner.
    LShape,
    /// `(-1,1)²` split into quadrants, refined towards the origin.
    Checkerboard,
}

impl std::str::FromStr for GradedDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lshape" | "Lshape" | "l_shape" => Ok(GradedDomain::LShape),
            "checkerboard" | "square_checkerboard" => Ok(GradedDomain::Checkerboard),
            other => Err(Error::argument(format!("unsupported graded domain '{other}'"))),
        }
    }
}

fn rotate_quarter(p: Point, k: usize) -> Point {
    let mut q = p;
    for _ in 0..k {
        q = Point::new(-q.y, q.x);
    }
    q
}

/// Nested-frame graded mesh with `n + 1` layers: frame `k` spans scales
/// `σ^(k+1) .. σ^k` and the innermost region has scale `σ^n`.
///
/// The L-shape pieces are split by the diagonal through the re-entrant
/// corner; checkerboard frames are split by the axes, so every cell lies in one
/// quadrant. Frame cells are non-convex hexagons.
pub fn generate_graded(domain: GradedDomain, n: usize, sigma: f64) -> Result<LayeredMesh> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::argument(format!("grading parameter {sigma} not in (0, 1)")));
    }
    let scales: Vec<f64> = (0..=n).map(|k| sigma.powi(k as i32)).collect();
    let mut polys: Vec<Vec<Point>> = Vec::new();
    let tag = match domain {
        GradedDomain::LShape => {
            for k in 0..n {
                let (a, b) = (scales[k], scales[k + 1]);
                polys.push(vec![
                    Point::new(0.0, -b),
                    Point::new(0.0, -a),
                    Point::new(a, -a),
                    Point::new(a, a),
                    Point::new(b, b),
                    Point::new(b, -b),
                ]);
                polys.push(vec![
                    Point::new(b, b),
                    Point::new(a, a),
                    Point::new(-a, a),
                    Point::new(-a, 0.0),
                    Point::new(-b, 0.0),
                    Point::new(-b, b),
                ]);
            }
            let s = scales[n];
            polys.push(vec![
                Point::new(0.0, 0.0),
                Point::new(0.0, -s),
                Point::new(s, -s),
                Point::new(s, s),
            ]);
            polys.push(vec![
                Point::new(0.0, 0.0),
                Point::new(s, s),
                Point::new(-s, s),
                Point::new(-s, 0.0),
            ]);
            DomainTag::LShape
        }
        GradedDomain::Checkerboard => {
            for k in 0..n {
                let (a, b) = (scales[k], scales[k + 1]);
                let piece = [
                    Point::new(b, 0.0),
                    Point::new(a, 0.0),
                    Point::new(a, a),
                    Point::new(0.0, a),
                    Point::new(0.0, b),
                    Point::new(b, b),
                ];
                for q in 0..4 {
                    polys.push(piece.iter().map(|p| rotate_quarter(*p, q)).collect());
                }
            }
            let s = scales[n];
            let square = [
                Point::new(0.0, 0.0),
                Point::new(s, 0.0),
                Point::new(s, s),
                Point::new(0.0, s),
            ];
            for q in 0..4 {
                polys.push(square.iter().map(|p| rotate_quarter(*p, q)).collect());
            }
            DomainTag::Checkerboard
        }
    };
    let mut pool = VertexPool::new(1e-13);
    let cells: Vec<Vec<usize>> = polys.iter().map(|p| pool.insert_loop(p)).collect();
    let mesh = PolyMesh::new(pool.points, cells, tag)?;
    let mut layered = compute_layers(mesh, &[Point::origin()], n + 1)?;
    layered.sigma = Some(sigma);
    Ok(layered)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_single_cell() {
        let m = generate_cartesian(1, 1, Rectangle::unit(), DomainTag::UnitSquare).unwrap();
        assert_eq!(m.n_cells(), 1);
        assert_eq!(m.n_vertices(), 4);
    }

    #[test]
    fn cartesian_quadrants_meet_at_origin() {
        let m = generate_cartesian(2, 2, Rectangle::square(1.0), DomainTag::Checkerboard).unwrap();
        assert_eq!(m.n_cells(), 4);
        let origin = m
            .vertices()
            .iter()
            .position(|p| p.x == 0.0 && p.y == 0.0)
            .expect("origin is a vertex");
        assert!(m.cells().iter().all(|c| c.contains(&origin)));
    }

    #[test]
    fn degenerate_rectangle_is_rejected() {
        assert!(Rectangle::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(generate_cartesian(0, 2, Rectangle::unit(), DomainTag::UnitSquare).is_err());
    }

    #[test]
    fn cartesian_lshape_counts() {
        let m = generate_cartesian_lshape(1).unwrap();
        assert_eq!(m.n_cells(), 3);
        assert_eq!(m.n_edges(), 10);
        assert!((m.total_area() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn single_seed_gives_the_square() {
        let m = voronoi_from_seeds(&[Point::new(0.3, 0.6)], Rectangle::unit(), 0, 1, DomainTag::UnitSquare).unwrap();
        assert_eq!(m.n_cells(), 1);
        assert_eq!(m.cell(0).len(), 4);
        assert!((m.total_area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadrant_seeds_give_two_by_two_grid() {
        let seeds = [
            Point::new(0.25, 0.25),
            Point::new(0.75, 0.25),
            Point::new(0.75, 0.75),
            Point::new(0.25, 0.75),
        ];
        let m = voronoi_from_seeds(&seeds, Rectangle::unit(), 0, 3, DomainTag::UnitSquare).unwrap();
        assert_eq!(m.n_cells(), 4);
        assert_eq!(m.n_vertices(), 9);
        assert_eq!(m.n_edges(), 12);
        for c in 0..4 {
            assert_eq!(m.cell(c).len(), 4);
            assert!((m.cell_area(c) - 0.25).abs() < 1e-10);
        }
    }

    #[test]
    fn voronoi_partitions_the_square() {
        let m = generate_voronoi(25, Rectangle::unit(), 100, 42, DomainTag::UnitSquare).unwrap();
        assert_eq!(m.n_cells(), 25);
        assert!((m.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn voronoi_is_deterministic() {
        let a = generate_voronoi(30, Rectangle::unit(), 10, 7, DomainTag::UnitSquare).unwrap();
        let b = generate_voronoi(30, Rectangle::unit(), 10, 7, DomainTag::UnitSquare).unwrap();
        assert_eq!(a.cells(), b.cells());
        let bits =
            |m: &PolyMesh| -> Vec<(u64, u64)> { m.vertices().iter().map(|p| (p.x.to_bits(), p.y.to_bits())).collect() };
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn duplicate_seeds_are_rejected() {
        let s = [Point::new(0.5, 0.5), Point::new(0.5, 0.5)];
        assert!(matches!(
            voronoi_from_seeds(&s, Rectangle::unit(), 0, 0, DomainTag::UnitSquare),
            Err(Error::Generation(_))
        ));
    }

    #[test]
    fn graded_lshape_coarsest_mesh() {
        let lm = generate_graded(GradedDomain::LShape, 0, 0.5).unwrap();
        assert_eq!(lm.mesh.n_cells(), 2);
        assert_eq!(lm.n_layers, 1);
        assert!((lm.mesh.total_area() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn graded_lshape_layers_follow_frames() {
        let lm = generate_graded(GradedDomain::LShape, 2, 0.5).unwrap();
        assert_eq!(lm.mesh.n_cells(), 6);
        // frames are emitted outermost first
        assert_eq!(lm.layer_of_cell, vec![2, 2, 1, 1, 0, 0]);
        assert!((lm.mesh.total_area() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn graded_checkerboard_two_levels() {
        let lm = generate_graded(GradedDomain::Checkerboard, 2, 0.5).unwrap();
        assert_eq!(lm.mesh.n_cells(), 12);
        assert_eq!(lm.n_layers, 3);
        for j in 0..3 {
            assert_eq!(lm.cells_in_layer(j).len(), 4);
        }
        assert!((lm.mesh.total_area() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn graded_checkerboard_one_level_layers() {
        let lm = generate_graded(GradedDomain::Checkerboard, 1, 0.5).unwrap();
        let inner = lm.cells_in_layer(0);
        assert_eq!(inner.len(), 4);
        assert_eq!(lm.cells_in_layer(1).len(), 4);
        let d_inner = lm.max_diameter(0);
        let d_outer = lm.max_diameter(1);
        assert!((d_inner - 0.5 * d_outer).abs() < 1e-12);
    }

    #[test]
    fn graded_layer_law() {
        for &sigma in &[0.3, 0.5, 0.7] {
            for dom in [GradedDomain::LShape, GradedDomain::Checkerboard] {
                let lm = generate_graded(dom, 4, sigma).unwrap();
                for j in 0..4 {
                    let r = lm.max_diameter(j) / lm.max_diameter(j + 1);
                    assert!((r - sigma).abs() <= 0.1, "{dom:?} sigma {sigma} layer {j}: {r}");
                }
            }
        }
    }

    #[test]
    fn graded_rejects_bad_sigma() {
        assert!(generate_graded(GradedDomain::LShape, 2, 1.0).is_err());
        assert!("triangle".parse::<GradedDomain>().is_err());
    }
}
