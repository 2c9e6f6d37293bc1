use nalgebra::{DMatrix, DVector};

use crate::mesh::{Point2, Segment};

use super::quadrature::QuadratureRule;
use super::ApproxError;

/// Scaled monomials `((x - xc) / h)^a ((y - yc) / h)^b`, `a + b <= degree`,
/// ordered by total degree. After [`CellBasis::orthonormalized`] the
/// functions are lower-triangular combinations of these monomials that are
/// orthonormal on one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellBasis {
    pub degree: usize,
    pub center: Point2,
    pub scale: f64,
    exponents: Vec<(usize, usize)>,
    transform: Option<DMatrix<f64>>,
}

/// Values, gradients and Laplacians of every basis function at one point.
#[derive(Debug, Clone, Default)]
pub struct CellBasisEval {
    pub value: Vec<f64>,
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
    pub lap: Vec<f64>,
}

pub fn cell_dim(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

impl CellBasis {
    pub fn new(degree: usize, center: Point2, scale: f64) -> Self {
        let exponents = (0..=degree).flat_map(|d| (0..=d).map(move |b| (d - b, b))).collect();
        Self { degree, center, scale, exponents, transform: None }
    }

    /// Orthonormalizes the basis in `L2` over the region of `rule`. Two
    /// Cholesky passes are used so the result is orthonormal to rounding even
    /// when the monomial Gram matrix is poorly conditioned.
    pub fn orthonormalized(mut self, rule: &QuadratureRule) -> Result<Self, ApproxError> {
        for _ in 0..2 {
            let gram = super::projection::cell_mass_matrix(&self, rule);
            let l = gram.cholesky().ok_or(ApproxError::SingularMass)?.l();
            let inv = l
                .solve_lower_triangular(&DMatrix::identity(self.dim(), self.dim()))
                .ok_or(ApproxError::SingularMass)?;
            self.transform = Some(match self.transform.take() {
                Some(t) => inv * t,
                None => inv,
            });
        }
        Ok(self)
    }

    fn apply(&self, raw: Vec<f64>) -> Vec<f64> {
        match &self.transform {
            Some(t) => (t * DVector::from_vec(raw)).data.into(),
            None => raw,
        }
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[(usize, usize)] {
        &self.exponents
    }

    fn powers(&self, p: Point2) -> (Vec<f64>, Vec<f64>) {
        let xi = (p.x - self.center.x) / self.scale;
        let eta = (p.y - self.center.y) / self.scale;
        let mut px = vec![1.0; self.degree + 1];
        let mut py = vec![1.0; self.degree + 1];
        for k in 1..=self.degree {
            px[k] = px[k - 1] * xi;
            py[k] = py[k - 1] * eta;
        }
        (px, py)
    }

    pub fn values(&self, p: Point2) -> Vec<f64> {
        let (px, py) = self.powers(p);
        self.apply(self.exponents.iter().map(|&(a, b)| px[a] * py[b]).collect())
    }

    pub fn eval(&self, p: Point2) -> CellBasisEval {
        let (px, py) = self.powers(p);
        let h = self.scale;
        let n = self.dim();
        let mut out = CellBasisEval {
            value: Vec::with_capacity(n),
            dx: Vec::with_capacity(n),
            dy: Vec::with_capacity(n),
            lap: Vec::with_capacity(n),
        };
        for &(a, b) in &self.exponents {
            let (af, bf) = (a as f64, b as f64);
            out.value.push(px[a] * py[b]);
            out.dx.push(if a > 0 { af * px[a - 1] * py[b] / h } else { 0.0 });
            out.dy.push(if b > 0 { bf * px[a] * py[b - 1] / h } else { 0.0 });
            let mut l = 0.0;
            if a > 1 {
                l += af * (af - 1.0) * px[a - 2] * py[b];
            }
            if b > 1 {
                l += bf * (bf - 1.0) * px[a] * py[b - 2];
            }
            out.lap.push(l / (h * h));
        }
        if self.transform.is_some() {
            out.value = self.apply(out.value);
            out.dx = self.apply(out.dx);
            out.dy = self.apply(out.dy);
            out.lap = self.apply(out.lap);
        }
        out
    }

    /// Evaluates the polynomial with the given coefficients.
    pub fn evaluate(&self, coeffs: &[f64], p: Point2) -> f64 {
        self.values(p).iter().zip(coeffs).map(|(v, c)| v * c).sum()
    }
}

/// Monomials `t^j` of the reference parameter `t` in `[-1, 1]` of a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeBasis {
    pub degree: usize,
    pub segment: Segment,
}

impl EdgeBasis {
    pub fn new(degree: usize, segment: Segment) -> Self {
        Self { degree, segment }
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn values_at_param(&self, t: f64) -> Vec<f64> {
        let mut v = vec![1.0; self.dim()];
        for j in 1..v.len() {
            v[j] = v[j - 1] * t;
        }
        v
    }

    /// Reference parameter of a point on the segment.
    pub fn param_of(&self, p: Point2) -> f64 {
        let s = &self.segment;
        let d = s.b - s.a;
        2.0 * (p - s.a).dot(d) / d.dot(d) - 1.0
    }

    pub fn evaluate(&self, coeffs: &[f64], t: f64) -> f64 {
        self.values_at_param(t).iter().zip(coeffs).map(|(v, c)| v * c).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims() {
        assert_eq!(CellBasis::new(1, Point2::default(), 1.0).dim(), 3);
        assert_eq!(CellBasis::new(4, Point2::default(), 1.0).dim(), 15);
        assert_eq!(cell_dim(2), 6);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let b = CellBasis::new(4, Point2::new(0.3, 0.2), 0.7);
        let p = Point2::new(0.55, -0.1);
        let e = b.eval(p);
        let h = 1e-5;
        let at = |dx: f64, dy: f64| b.values(Point2::new(p.x + dx, p.y + dy));
        let (xp, xm, yp, ym, c) = (at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h), at(0.0, 0.0));
        for i in 0..b.dim() {
            let gx = (xp[i] - xm[i]) / (2.0 * h);
            let gy = (yp[i] - ym[i]) / (2.0 * h);
            let lap = (xp[i] + xm[i] + yp[i] + ym[i] - 4.0 * c[i]) / (h * h);
            assert!((gx - e.dx[i]).abs() <= 1e-6 * (1.0 + e.dx[i].abs()));
            assert!((gy - e.dy[i]).abs() <= 1e-6 * (1.0 + e.dy[i].abs()));
            assert!((lap - e.lap[i]).abs() <= 1e-3 * (1.0 + e.lap[i].abs()));
        }
    }

    #[test]
    fn orthonormalized_basis_has_identity_mass() {
        let poly = [Point2::new(0.1, 0.1), Point2::new(0.4, 0.15), Point2::new(0.45, 0.4), Point2::new(0.2, 0.5)];
        let rule = crate::approx::cell_quadrature(&poly, 8).unwrap();
        let b = CellBasis::new(4, Point2::new(0.29, 0.29), 0.25).orthonormalized(&rule).unwrap();
        let m = crate::approx::cell_mass_matrix(&b, &rule);
        assert!((m - DMatrix::identity(15, 15)).amax() < 1e-13);
        let e = b.eval(Point2::new(0.3, 0.2));
        assert_eq!(e.value, b.values(Point2::new(0.3, 0.2)));
        assert_eq!(e.lap[0], 0.0);
    }

    #[test]
    fn edge_parameter_round_trip() {
        let s = Segment::new(Point2::new(0.2, 0.1), Point2::new(0.9, 0.6));
        let b = EdgeBasis::new(3, s);
        for t in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            assert!((b.param_of(s.point_at(t)) - t).abs() < 1e-14);
        }
    }
}
