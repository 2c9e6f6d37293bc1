//! Quadrature on segments and simple polygons.
//!
//! Polygons are ear-clipped into triangles; each triangle gets a collapsed
//! (Duffy) tensor Gauss-Legendre rule, which is exact to any requested
//! polynomial order.

use crate::mesh::{Point2, Segment};

use super::ApproxError;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
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

/// Points and weights over a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(Point2) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Gauss-Legendre rule mapped to a segment; `params` are the reference
/// abscissae in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeQuadrature {
    pub params: Vec<f64>,
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
}

impl EdgeQuadrature {
    pub fn integrate(&self, f: impl Fn(Point2) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

pub fn edge_quadrature(seg: &Segment, npoints: usize) -> EdgeQuadrature {
    let (t, w) = gauss_legendre(npoints);
    let half = 0.5 * seg.length();
    EdgeQuadrature {
        points: t.iter().map(|&t| seg.point_at(t)).collect(),
        weights: w.iter().map(|w| w * half).collect(),
        params: t,
    }
}

/// Rule on triangle `abc` exact for polynomials of total degree `order`.
pub fn triangle_quadrature(a: Point2, b: Point2, c: Point2, order: usize) -> QuadratureRule {
    // the collapse adds one degree in the first direction
    let n = (order + 3) / 2;
    let (t, w) = gauss_legendre(n);
    let area2 = (b - a).cross(c - a).abs();
    let mut rule = QuadratureRule { points: Vec::with_capacity(n * n), weights: Vec::with_capacity(n * n) };
    for (i, &ti) in t.iter().enumerate() {
        let s = 0.5 * (ti + 1.0);
        for (j, &tj) in t.iter().enumerate() {
            let eta = 0.5 * (tj + 1.0);
            let r = (1.0 - s) * eta;
            rule.points.push(a + (b - a).scale(s) + (c - a).scale(r));
            rule.weights.push(0.25 * w[i] * w[j] * (1.0 - s) * area2);
        }
    }
    rule
}

fn point_in_triangle(p: Point2, a: Point2, b: Point2, c: Point2, eps: f64) -> bool {
    let d1 = (b - a).cross(p - a);
    let d2 = (c - b).cross(p - b);
    let d3 = (a - c).cross(p - c);
    d1 >= -eps && d2 >= -eps && d3 >= -eps
}

/// Ear-clipping triangulation of a counterclockwise simple polygon.
/// Collinear corners are never clipped, so no zero-area triangle is emitted.
pub fn triangulate(poly: &[Point2]) -> Result<Vec<[usize; 3]>, ApproxError> {
    let n = poly.len();
    if n < 3 {
        return Err(ApproxError::DegeneratePolygon);
    }
    let scale = poly.iter().flat_map(|p| poly.iter().map(move |q| p.dist(*q))).fold(0.0, f64::max);
    let eps = 1e-12 * scale * scale;
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    while idx.len() > 3 {
        let k = idx.len();
        let ear = (0..k).find(|&i| {
            let (ia, ib, ic) = (idx[(i + k - 1) % k], idx[i], idx[(i + 1) % k]);
            let (a, b, c) = (poly[ia], poly[ib], poly[ic]);
            if (b - a).cross(c - b) <= eps {
                return false;
            }
            idx.iter().filter(|&&j| j != ia && j != ib && j != ic).all(|&j| !point_in_triangle(poly[j], a, b, c, eps))
        });
        let i = ear.ok_or(ApproxError::DegeneratePolygon)?;
        tris.push([idx[(i + k - 1) % k], idx[i], idx[(i + 1) % k]]);
        idx.remove(i);
    }
    let (a, b, c) = (poly[idx[0]], poly[idx[1]], poly[idx[2]]);
    if (b - a).cross(c - a) <= eps {
        return Err(ApproxError::DegeneratePolygon);
    }
    tris.push([idx[0], idx[1], idx[2]]);
    Ok(tris)
}

/// Rule on a simple polygon, exact for polynomials of total degree `order`.
pub fn cell_quadrature(poly: &[Point2], order: usize) -> Result<QuadratureRule, ApproxError> {
    let mut rule = QuadratureRule { points: Vec::new(), weights: Vec::new() };
    for [a, b, c] in triangulate(poly)? {
        let t = triangle_quadrature(poly[a], poly[b], poly[c], order);
        rule.points.extend(t.points);
        rule.weights.extend(t.weights);
    }
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> Vec<Point2> {
        vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)]
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..=12 {
            let (t, w) = gauss_legendre(n);
            for p in 0..2 * n {
                let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
                let q: f64 = t.iter().zip(&w).map(|(t, w)| w * t.powi(p as i32)).sum();
                assert!((q - exact).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn unit_triangle_area() {
        let r = cell_quadrature(&sq()[..3], 1).unwrap();
        assert!((r.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pentagon_area() {
        let p = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.75, 0.25), (0.25, 0.75)].map(|(x, y)| Point2::new(x, y));
        let r = cell_quadrature(&p, 2).unwrap();
        // shoelace
        assert!((r.weights.iter().sum::<f64>() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn square_x2y2() {
        let r = cell_quadrature(&sq(), 4).unwrap();
        assert!((r.integrate(|p| p.x * p.x * p.y * p.y) - 1.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn collinear_corner_is_skipped() {
        // quad of the figure pattern: (3/4, 1/4) lies on the segment (1,0)-(1/4,3/4)
        let p = [(0.0, 0.0), (1.0, 0.0), (0.75, 0.25), (0.25, 0.75)].map(|(x, y)| Point2::new(x, y));
        let tris = triangulate(&p).unwrap();
        assert_eq!(tris.len(), 2);
        let r = cell_quadrature(&p, 2).unwrap();
        assert!((r.weights.iter().sum::<f64>() - 0.375).abs() < 1e-14);
    }

    #[test]
    fn degenerate_polygon() {
        let p = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)].map(|(x, y)| Point2::new(x, y));
        assert_eq!(cell_quadrature(&p, 2), Err(ApproxError::DegeneratePolygon));
    }

    #[test]
    fn edge_rules() {
        let unit = Segment::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0));
        assert!((edge_quadrature(&unit, 1).integrate(|_| 1.0) - 1.0).abs() < 1e-15);
        assert!((edge_quadrature(&unit, 2).integrate(|p| p.x.powi(3)) - 0.25).abs() < 1e-15);
        let diag = Segment::new(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0));
        assert!((edge_quadrature(&diag, 3).integrate(|_| 1.0) - 2f64.sqrt()).abs() < 1e-15);
    }
}
