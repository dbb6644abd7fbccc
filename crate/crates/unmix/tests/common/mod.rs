//! Helpers shared by the integration suites: seeded generators and slow
//! independent reference computations (kept free of the crate's own solver
//! code paths wherever possible).

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unmix::linalg::{DenseMatrix, DenseVector};
use unmix::SpectralLibrary;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, k: usize, n: usize) -> DenseMatrix<f64> {
    DenseMatrix::from_fn(k, n, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_library(rng: &mut ChaCha8Rng, k: usize, n: usize) -> SpectralLibrary<f64> {
    // Rejection on the (measure-zero) chance of an all-zero column.
    loop {
        if let Ok(lib) = SpectralLibrary::new(random_matrix(rng, k, n)) {
            return lib;
        }
    }
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DenseVector<f64> {
    DenseVector::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// Uniform point on the probability simplex via sorted spacings.
pub fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> DenseVector<f64> {
    if n == 1 {
        return DenseVector::new(vec![1.0]).unwrap();
    }
    let mut cuts: Vec<f64> = (0..n - 1).map(|_| rng.gen::<f64>()).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut x = Vec::with_capacity(n);
    let mut prev = 0.0;
    for &c in &cuts {
        x.push(c - prev);
        prev = c;
    }
    x.push(1.0 - prev);
    DenseVector::new(x).unwrap()
}

/// Sparse simplex vector: `s` nonzeros at the first positions of a random
/// permutation.
pub fn random_sparse_simplex(rng: &mut ChaCha8Rng, n: usize, s: usize) -> DenseVector<f64> {
    let block = random_simplex(rng, s);
    let mut positions: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        positions.swap(i, j);
    }
    let mut x = DenseVector::zeros(n);
    for (i, &p) in positions[..s].iter().enumerate() {
        x[p] = block[i];
    }
    x
}

/// Dense Gaussian elimination with partial pivoting; panics on a singular
/// system (test inputs are generated to be nonsingular).
pub fn gauss_solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        assert!(m[col][col] != 0.0, "singular elimination system");
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for j in col..n {
                m[row][j] -= f * m[col][j];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in i + 1..n {
            acc -= m[i][j] * x[j];
        }
        x[i] = acc / m[i][i];
    }
    x
}

/// Reference solution of `min ½xᵀBx − wᵀx  s.t. 1ᵀx = 1` through the full
/// KKT system `[B 1; 1ᵀ 0]·[x; ν] = [w; 1]`, eliminated naively.
pub fn simplex_qp_kkt(bmat: &DenseMatrix<f64>, w: &DenseVector<f64>) -> DenseVector<f64> {
    let n = w.len();
    let mut m = vec![vec![0.0; n + 1]; n + 1];
    let mut rhs = vec![0.0; n + 1];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = bmat.get(i, j);
        }
        m[i][n] = 1.0;
        m[n][i] = 1.0;
        rhs[i] = w[i];
    }
    rhs[n] = 1.0;
    let sol = gauss_solve(m, rhs);
    DenseVector::new(sol[..n].to_vec()).unwrap()
}

/// Long projected-gradient run for `min ‖Ax−y‖₂ s.t. x ≥ 0`; an independent
/// cross-check for the active-set oracle.
pub fn projected_gradient_nnls(
    a: &DenseMatrix<f64>,
    y: &DenseVector<f64>,
    iters: usize,
) -> DenseVector<f64> {
    let n = a.cols();
    // Frobenius bound on the largest eigenvalue of AᵀA.
    let lip: f64 = a.entries().iter().map(|v| v * v).sum();
    let step = 1.0 / lip;
    let mut x = DenseVector::zeros(n);
    for _ in 0..iters {
        let grad = a
            .matvec_t(&a.matvec(&x).unwrap().sub(y))
            .unwrap();
        for i in 0..n {
            x[i] = (x[i] - step * grad[i]).max(0.0);
        }
    }
    x
}
