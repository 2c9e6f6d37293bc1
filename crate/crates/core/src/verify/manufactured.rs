//! Closed-form solutions with their gradients and Laplacians.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::mesh::Point2;

pub type ScalarFn = Arc<dyn Fn(Point2) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Point2) -> (f64, f64) + Send + Sync>;

/// Exact solution `u` from which the data `f = Δu + k²u`, `g1 = u` and
/// `g2 = ∇u·n` are derived.
#[derive(Clone)]
pub struct ManufacturedSolution {
    pub name: String,
    pub u: ScalarFn,
    pub grad_u: VectorFn,
    pub lap_u: ScalarFn,
}

impl fmt::Debug for ManufacturedSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedSolution").field("name", &self.name).finish_non_exhaustive()
    }
}

impl ManufacturedSolution {
    pub fn new(
        name: impl Into<String>,
        u: impl Fn(Point2) -> f64 + Send + Sync + 'static,
        grad_u: impl Fn(Point2) -> (f64, f64) + Send + Sync + 'static,
        lap_u: impl Fn(Point2) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), u: Arc::new(u), grad_u: Arc::new(grad_u), lap_u: Arc::new(lap_u) }
    }

    pub fn value(&self, p: Point2) -> f64 {
        (self.u)(p)
    }

    pub fn gradient(&self, p: Point2) -> (f64, f64) {
        (self.grad_u)(p)
    }

    pub fn laplacian(&self, p: Point2) -> f64 {
        (self.lap_u)(p)
    }

    /// `f = Δu + k²u`.
    pub fn source(&self, k2: f64, p: Point2) -> f64 {
        self.laplacian(p) + k2 * self.value(p)
    }

    /// `g2 = ∇u·n` for the outward normal `n`.
    pub fn flux(&self, p: Point2, n: Point2) -> f64 {
        let g = self.gradient(p);
        g.0 * n.x + g.1 * n.y
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "s2" => Some(solution_s2()),
            "s3" => Some(solution_s3()),
            "s5" => Some(solution_s5()),
            "quadratic" => Some(solution_quadratic()),
            "linear" => Some(solution_linear()),
            _ => None,
        }
    }
}

/// `u = -(2x³ + y + 1)²`.
pub fn solution_s2() -> ManufacturedSolution {
    let q = |p: Point2| 2.0 * p.x.powi(3) + p.y + 1.0;
    ManufacturedSolution::new(
        "s2",
        move |p| -q(p).powi(2),
        move |p| (-12.0 * p.x * p.x * q(p), -2.0 * q(p)),
        move |p| -24.0 * p.x * q(p) - 72.0 * p.x.powi(4) - 2.0,
    )
}

/// `u = sin(4πx) sin(4πy)`.
pub fn solution_s3() -> ManufacturedSolution {
    let w = 4.0 * PI;
    ManufacturedSolution::new(
        "s3",
        move |p| (w * p.x).sin() * (w * p.y).sin(),
        move |p| (w * (w * p.x).cos() * (w * p.y).sin(), w * (w * p.x).sin() * (w * p.y).cos()),
        move |p| -2.0 * w * w * (w * p.x).sin() * (w * p.y).sin(),
    )
}

/// `u = (y² - 2y)(1 + tanh(20x - 10))`, an internal layer along `x = 1/2`.
pub fn solution_s5() -> ManufacturedSolution {
    let g = |p: Point2| p.y * p.y - 2.0 * p.y;
    let th = |p: Point2| (20.0 * p.x - 10.0).tanh();
    let sech2 = move |p: Point2| 1.0 - th(p).powi(2);
    ManufacturedSolution::new(
        "s5",
        move |p| g(p) * (1.0 + th(p)),
        move |p| (20.0 * g(p) * sech2(p), (2.0 * p.y - 2.0) * (1.0 + th(p))),
        move |p| 2.0 * (1.0 + th(p)) - 800.0 * g(p) * sech2(p) * th(p),
    )
}

/// `u = x² + y²`.
pub fn solution_quadratic() -> ManufacturedSolution {
    ManufacturedSolution::new("quadratic", |p| p.x * p.x + p.y * p.y, |p| (2.0 * p.x, 2.0 * p.y), |_| 4.0)
}

/// `u = 1 + 2x - 3y`.
pub fn solution_linear() -> ManufacturedSolution {
    ManufacturedSolution::new("linear", |p| 1.0 + 2.0 * p.x - 3.0 * p.y, |_| (2.0, -3.0), |_| 0.0)
}

/// Polynomial `Σ c_ab x^a y^b` in global coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial2 {
    pub terms: Vec<(usize, usize, f64)>,
}

impl Polynomial2 {
    /// Coefficients uniform in `[-1, 1]` for every monomial of degree at most `degree`.
    pub fn random(degree: usize, rng: &mut impl Rng) -> Self {
        let terms = (0..=degree)
            .flat_map(|d| (0..=d).map(move |b| (d - b, b)))
            .map(|(a, b)| (a, b, rng.random_range(-1.0..=1.0)))
            .collect();
        Self { terms }
    }

    pub fn value(&self, p: Point2) -> f64 {
        self.terms.iter().map(|&(a, b, c)| c * p.x.powi(a as i32) * p.y.powi(b as i32)).sum()
    }

    pub fn gradient(&self, p: Point2) -> (f64, f64) {
        let mut g = (0.0, 0.0);
        for &(a, b, c) in &self.terms {
            if a > 0 {
                g.0 += c * a as f64 * p.x.powi(a as i32 - 1) * p.y.powi(b as i32);
            }
            if b > 0 {
                g.1 += c * b as f64 * p.x.powi(a as i32) * p.y.powi(b as i32 - 1);
            }
        }
        g
    }

    pub fn laplacian(&self, p: Point2) -> f64 {
        let mut l = 0.0;
        for &(a, b, c) in &self.terms {
            if a > 1 {
                l += c * (a * (a - 1)) as f64 * p.x.powi(a as i32 - 2) * p.y.powi(b as i32);
            }
            if b > 1 {
                l += c * (b * (b - 1)) as f64 * p.x.powi(a as i32) * p.y.powi(b as i32 - 2);
            }
        }
        l
    }

    pub fn into_solution(self, name: impl Into<String>) -> ManufacturedSolution {
        let (a, b, c) = (self.clone(), self.clone(), self);
        ManufacturedSolution::new(name, move |p| a.value(p), move |p| b.gradient(p), move |p| c.laplacian(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn check_derivatives(s: &ManufacturedSolution, points: &[Point2]) {
        let h = 1e-5;
        for &p in points {
            let at = |dx: f64, dy: f64| s.value(Point2::new(p.x + dx, p.y + dy));
            let (gx, gy) = s.gradient(p);
            let fx = (at(h, 0.0) - at(-h, 0.0)) / (2.0 * h);
            let fy = (at(0.0, h) - at(0.0, -h)) / (2.0 * h);
            let scale = 1.0 + gx.abs().max(gy.abs());
            assert!((fx - gx).abs() <= 1e-6 * scale, "{} d/dx at {p:?}: {fx} vs {gx}", s.name);
            assert!((fy - gy).abs() <= 1e-6 * scale, "{} d/dy at {p:?}: {fy} vs {gy}", s.name);
            let hh = 1e-4;
            let at2 = |dx: f64, dy: f64| s.value(Point2::new(p.x + dx, p.y + dy));
            let lap = (at2(hh, 0.0) + at2(-hh, 0.0) + at2(0.0, hh) + at2(0.0, -hh) - 4.0 * at2(0.0, 0.0)) / (hh * hh);
            let exact = s.laplacian(p);
            assert!((lap - exact).abs() <= 1e-4 * (1.0 + exact.abs()), "{} lap at {p:?}: {lap} vs {exact}", s.name);
        }
    }

    #[test]
    fn point_values() {
        assert_eq!(solution_s2().value(Point2::new(0.0, 0.0)), -1.0);
        assert!((solution_s3().value(Point2::new(0.125, 0.125)) - 1.0).abs() < 1e-15);
        assert_eq!(solution_s5().value(Point2::new(0.5, 1.0)), -1.0);
        assert_eq!(solution_s2().laplacian(Point2::new(0.0, 0.0)), -2.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = StdRng::seed_from_u64(42);
        let pts: Vec<Point2> =
            (0..25).map(|_| Point2::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0))).collect();
        for s in [solution_s2(), solution_s3(), solution_s5(), solution_quadratic(), solution_linear()] {
            check_derivatives(&s, &pts);
        }
        let poly = Polynomial2::random(5, &mut rng).into_solution("p5");
        check_derivatives(&poly, &pts);
    }

    #[test]
    fn lookup() {
        assert_eq!(ManufacturedSolution::by_name("s3").unwrap().name, "s3");
        assert!(ManufacturedSolution::by_name("s4").is_none());
    }
}
