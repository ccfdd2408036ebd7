//! Elementary planar polygon geometry.

use nalgebra::{Point2, Vector2};

pub type Point = Point2<f64>;

/// Twice the signed area of triangle `(a, b, c)`; positive when counterclockwise.
pub fn orient(a: &Point, b: &Point, c: &Point) -> f64 {
    (b - a).perp(&(c - a))
}

/// Shoelace signed area.
pub fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = &pts[i];
        let b = &pts[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s
}

/// Area centroid of a simple polygon.
pub fn centroid(pts: &[Point]) -> Point {
    let n = pts.len();
    let a = signed_area(pts);
    // shift to the first vertex to limit cancellation on far-away polygons
    let o = pts[0];
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = pts[i] - o;
        let q = pts[(i + 1) % n] - o;
        let cross = p.x * q.y - q.x * p.y;
        cx += (p.x + q.x) * cross;
        cy += (p.y + q.y) * cross;
    }
    Point::new(o.x + cx / (6.0 * a), o.y + cy / (6.0 * a))
}

/// Largest vertex-to-vertex distance.
pub fn diameter(pts: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max((pts[i] - pts[j]).norm());
        }
    }
    d
}

pub fn perimeter(pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n).map(|i| (pts[(i + 1) % n] - pts[i]).norm()).sum()
}

/// Whether a counterclockwise polygon is convex (collinear vertices allowed).
pub fn is_convex(pts: &[Point]) -> bool {
    let n = pts.len();
    let scale = diameter(pts).powi(2);
    (0..n).all(|i| orient(&pts[i], &pts[(i + 1) % n], &pts[(i + 2) % n]) >= -1e-12 * scale)
}

/// Outward unit normal of the counterclockwise edge `a -> b`.
pub fn outward_normal(a: &Point, b: &Point) -> Vector2<f64> {
    let t = (b - a).normalize();
    Vector2::new(t.y, -t.x)
}

fn segments_cross(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    (o1 * o2 < 0.0) && (o3 * o4 < 0.0)
}

/// Checks that no two non-adjacent edges cross.
pub fn is_simple(pts: &[Point]) -> bool {
    let n = pts.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(&pts[i], &pts[(i + 1) % n], &pts[j], &pts[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Distance from `p` to segment `[a, b]`.
pub fn segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Point in the closed polygon, with boundary points within `tol` counted as inside.
pub fn contains_closed(pts: &[Point], p: &Point, tol: f64) -> bool {
    let n = pts.len();
    for i in 0..n {
        if segment_distance(p, &pts[i], &pts[(i + 1) % n]) <= tol {
            return true;
        }
    }
    // crossing number
    let mut inside = false;
    for i in 0..n {
        let a = &pts[i];
        let b = &pts[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Sutherland–Hodgman clip of a convex polygon against the half-plane `n · x <= c`.
pub fn clip_halfplane(poly: &[Point], n: &Vector2<f64>, c: f64) -> Vec<Point> {
    let k = poly.len();
    let mut out = Vec::with_capacity(k + 1);
    for i in 0..k {
        let a = &poly[i];
        let b = &poly[(i + 1) % k];
        let da = n.dot(&a.coords) - c;
        let db = n.dot(&b.coords) - c;
        if da <= 0.0 {
            out.push(*a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            let t = da / (da - db);
            out.push(a + (b - a) * t);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]
    }

    #[test]
    fn square_measures() {
        let s = square();
        assert_eq!(signed_area(&s), 1.0);
        let c = centroid(&s);
        assert!((c.x - 0.5).abs() < 1e-15 && (c.y - 0.5).abs() < 1e-15);
        assert!((diameter(&s) - 2f64.sqrt()).abs() < 1e-15);
        assert!(is_convex(&s));
        assert!(is_simple(&s));
    }

    #[test]
    fn bowtie_is_not_simple() {
        let b = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!(!is_simple(&b));
    }

    #[test]
    fn closed_containment() {
        let s = square();
        assert!(contains_closed(&s, &Point::new(0.0, 0.0), 1e-12));
        assert!(contains_closed(&s, &Point::new(0.5, 0.5), 1e-12));
        assert!(!contains_closed(&s, &Point::new(1.5, 0.5), 1e-12));
    }
}
