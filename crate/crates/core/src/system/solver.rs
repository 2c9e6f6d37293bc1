//! Linear solvers for the reduced SPD system: Jacobi-preconditioned
//! conjugate gradients and a sparse Cholesky factorization.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use super::sparse::SparseSymmetric;
use super::SystemError;

/// Below this size `Auto` factorizes directly.
pub const DIRECT_LIMIT: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    CgJacobi,
    Direct,
    /// `Direct` up to [`DIRECT_LIMIT`] unknowns, `CgJacobi` beyond.
    Auto,
}

impl SolverMethod {
    pub fn resolve(self, dim: usize) -> SolverMethod {
        match self {
            SolverMethod::Auto if dim <= DIRECT_LIMIT => SolverMethod::Direct,
            SolverMethod::Auto => SolverMethod::CgJacobi,
            m => m,
        }
    }
}

impl fmt::Display for SolverMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverMethod::CgJacobi => "cg_jacobi",
            SolverMethod::Direct => "direct",
            SolverMethod::Auto => "auto",
        })
    }
}

impl FromStr for SolverMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cg_jacobi" | "cg" => Ok(SolverMethod::CgJacobi),
            "direct" => Ok(SolverMethod::Direct),
            "auto" => Ok(SolverMethod::Auto),
            other => Err(format!("unknown solver `{other}` (expected cg_jacobi, direct or auto)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub method: SolverMethod,
    /// Relative residual target `|b - Ax| / |b|`.
    pub tol: f64,
    /// CG iteration cap; defaults to `5 n`.
    pub max_iter: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { method: SolverMethod::Auto, tol: 1e-10, max_iter: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub method: SolverMethod,
    pub iterations: usize,
    pub relative_residual: f64,
    pub wall_time: Duration,
    /// Smallest and largest diagonal entry, a cheap view of the scaling
    /// spread at large wavenumbers.
    pub diag_min: f64,
    pub diag_max: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn relative_residual(a: &SparseSymmetric, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let nb = norm(b);
    if nb == 0.0 {
        norm(&r)
    } else {
        norm(&r) / nb
    }
}

pub fn solve(a: &SparseSymmetric, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport), SystemError> {
    let start = Instant::now();
    let diag = a.diagonal();
    let diag_min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let diag_max = diag.iter().copied().fold(0.0, f64::max);
    if diag.iter().any(|&d| d <= 0.0) {
        return Err(SystemError::NotSpd("nonpositive diagonal entry".into()));
    }
    let method = opts.method.resolve(a.dim);
    let (x, iterations) = match method {
        SolverMethod::Direct => cholesky_solve(a, b, &diag, opts.tol)?,
        _ => cg_jacobi(a, b, &diag, opts)?,
    };
    let relative_residual = relative_residual(a, &x, b);
    Ok((x, SolveReport { method, iterations, relative_residual, wall_time: start.elapsed(), diag_min, diag_max }))
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
pub fn cg_jacobi(
    a: &SparseSymmetric,
    b: &[f64],
    diag: &[f64],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, usize), SystemError> {
    let n = a.dim;
    let max_iter = opts.max_iter.unwrap_or(5 * n.max(1));
    let nb = norm(b);
    let mut x = vec![0.0; n];
    if nb == 0.0 {
        return Ok((x, 0));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut history = Vec::new();
    for it in 1..=max_iter {
        let q = a.mul_vec(&p);
        let pq: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
        if pq <= 0.0 {
            return Err(SystemError::NotSpd(format!("nonpositive curvature {pq:e} at CG iteration {it}")));
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        let rel = norm(&r) / nb;
        history.push(rel);
        if rel <= opts.tol {
            return Ok((x, it));
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SystemError::MaxIterations { iterations: max_iter, history })
}

/// Sparse Cholesky (fill-reducing ordering) of the symmetrically
/// diagonal-scaled matrix, followed by a few steps of iterative refinement.
pub fn cholesky_solve(
    a: &SparseSymmetric,
    b: &[f64],
    diag: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, usize), SystemError> {
    let n = a.dim;
    let scale: Vec<f64> = diag.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut trips = Vec::with_capacity(a.nnz() / 2 + n);
    for i in 0..n {
        for (j, v) in a.row(i) {
            if j <= i {
                trips.push(Triplet::new(i, j, v * scale[i] * scale[j]));
            }
        }
    }
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trips)
        .map_err(|e| SystemError::NotSpd(format!("matrix construction failed: {e:?}")))?;
    let llt = mat
        .sp_cholesky(Side::Lower)
        .map_err(|e| SystemError::NotSpd(format!("Cholesky factorization failed: {e:?}")))?;

    let solve_scaled = |rhs: &[f64]| -> Vec<f64> {
        let mut m = Mat::from_fn(n, 1, |i, _| rhs[i] * scale[i]);
        llt.solve_in_place(m.as_mut());
        (0..n).map(|i| m[(i, 0)] * scale[i]).collect()
    };
    let mut x = solve_scaled(b);
    let nb = norm(b).max(f64::MIN_POSITIVE);
    let mut steps = 0;
    for _ in 0..3 {
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        if norm(&r) / nb <= tol * 1e-2 {
            break;
        }
        let dx = solve_scaled(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
        steps += 1;
    }
    Ok((x, steps))
}

/// Whether the matrix admits a Cholesky factorization.
pub fn is_cholesky_factorizable(a: &SparseSymmetric) -> bool {
    let diag = a.diagonal();
    if diag.iter().any(|&d| d <= 0.0) {
        return false;
    }
    let b = vec![0.0; a.dim];
    cholesky_solve(a, &b, &diag, 1.0).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn random_spd(n: usize, seed: u64) -> SparseSymmetric {
        let mut s = seed;
        let bmat: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| lcg(&mut s)).collect()).collect();
        let mut trips = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut v: f64 = (0..n).map(|k| bmat[k][i] * bmat[k][j]).sum();
                if i == j {
                    v += 1.0;
                }
                trips.push((i, j, v));
            }
        }
        SparseSymmetric::from_triplets(n, trips)
    }

    #[test]
    fn one_by_one() {
        let a = SparseSymmetric::from_triplets(1, vec![(0, 0, 2.0)]);
        for method in [SolverMethod::CgJacobi, SolverMethod::Direct] {
            let (x, _) = solve(&a, &[4.0], &SolverOptions { method, ..Default::default() }).unwrap();
            assert!((x[0] - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn random_spd_50() {
        let a = random_spd(50, 3);
        let mut s = 11;
        let b: Vec<f64> = (0..50).map(|_| lcg(&mut s)).collect();
        let opts = SolverOptions { method: SolverMethod::CgJacobi, ..Default::default() };
        let (x, rep) = solve(&a, &b, &opts).unwrap();
        assert!(rep.relative_residual <= 1e-10);
        let (y, _) = solve(&a, &b, &SolverOptions { method: SolverMethod::Direct, ..Default::default() }).unwrap();
        let d = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(d < 1e-8);
    }

    #[test]
    fn indefinite_is_detected() {
        let a = SparseSymmetric::from_triplets(2, vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        for method in [SolverMethod::CgJacobi, SolverMethod::Direct] {
            let r = solve(&a, &[1.0, -1.0], &SolverOptions { method, ..Default::default() });
            assert!(matches!(r, Err(SystemError::NotSpd(_))), "{method}");
        }
        assert!(!is_cholesky_factorizable(&a));
    }

    #[test]
    fn iteration_cap_reports_history() {
        let a = random_spd(30, 5);
        let b = vec![1.0; 30];
        let opts = SolverOptions { method: SolverMethod::CgJacobi, tol: 1e-14, max_iter: Some(2) };
        match solve(&a, &b, &opts) {
            Err(SystemError::MaxIterations { iterations, history }) => {
                assert_eq!(iterations, 2);
                assert_eq!(history.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn auto_resolves_by_size() {
        assert_eq!(SolverMethod::Auto.resolve(10), SolverMethod::Direct);
        assert_eq!(SolverMethod::Auto.resolve(DIRECT_LIMIT + 1), SolverMethod::CgJacobi);
        assert_eq!("cg_jacobi".parse::<SolverMethod>().unwrap(), SolverMethod::CgJacobi);
        assert!("lu".parse::<SolverMethod>().is_err());
    }
}
