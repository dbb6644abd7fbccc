//! Slow-but-trusted reference solvers used by tests and the benchmark
//! baseline. Performance is explicitly not a goal here: every least-squares
//! subproblem is rebuilt from scratch.

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseVector};
use crate::scalar::{lit, Real};

/// Least squares restricted to the passive columns, solved through a full
/// pseudo-inverse built from scratch with a one-sided Jacobi SVD — the same
/// structure as the classical `lsqnonneg` subproblem solve. The SVD keeps
/// full relative accuracy under the heavily weighted penalty rows built by
/// [`fcls`]; tiny ridge rows (`pivot_tol·eᵢᵀ`) guard rank-deficient column
/// subsets.
fn ls_on_passive<T: Real>(
    a: &DenseMatrix<T>,
    y: &DenseVector<T>,
    passive: &[usize],
    pivot_tol: T,
) -> Result<Vec<T>> {
    let p = passive.len();
    let k = a.rows();
    let m = k + p;
    // Column-major working copy of [A_passive; pivot_tol·I].
    let mut u: Vec<Vec<T>> = passive
        .iter()
        .enumerate()
        .map(|(pi, &ci)| {
            let mut c = vec![T::zero(); m];
            for r in 0..k {
                c[r] = a.get(r, ci);
            }
            c[k + pi] = pivot_tol;
            c
        })
        .collect();
    let mut v: Vec<Vec<T>> = (0..p)
        .map(|i| {
            let mut e = vec![T::zero(); p];
            e[i] = T::one();
            e
        })
        .collect();

    // One-sided Jacobi: rotate column pairs until all are orthogonal.
    let off_tol = T::epsilon() * lit::<T>(8.0);
    for _sweep in 0..40 {
        let mut rotated = false;
        for i in 0..p {
            for j in i + 1..p {
                let (aii, ajj, aij) = {
                    let (ci, cj) = (&u[i], &u[j]);
                    let mut aii = T::zero();
                    let mut ajj = T::zero();
                    let mut aij = T::zero();
                    for r in 0..m {
                        aii += ci[r] * ci[r];
                        ajj += cj[r] * cj[r];
                        aij += ci[r] * cj[r];
                    }
                    (aii, ajj, aij)
                };
                if aij.abs() <= off_tol * (aii * ajj).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (ajj - aii) / (lit::<T>(2.0) * aij);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let cs = (T::one() + t * t).sqrt().recip();
                let sn = cs * t;
                let (head, tail) = u.split_at_mut(j);
                let (ci, cj) = (&mut head[i], &mut tail[0]);
                for r in 0..m {
                    let (xi, xj) = (ci[r], cj[r]);
                    ci[r] = cs * xi - sn * xj;
                    cj[r] = sn * xi + cs * xj;
                }
                let (head, tail) = v.split_at_mut(j);
                let (vi, vj) = (&mut head[i], &mut tail[0]);
                for r in 0..p {
                    let (xi, xj) = (vi[r], vj[r]);
                    vi[r] = cs * xi - sn * xj;
                    vj[r] = sn * xi + cs * xj;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    // z = V·Σ⁻¹·Ūᵀ·[y; 0]; the ridge rows keep every σ above zero.
    let mut z = vec![T::zero(); p];
    for i in 0..p {
        let sigma_sq: T = u[i].iter().map(|&x| x * x).sum();
        if sigma_sq == T::zero() {
            return Err(Error::NotPositiveDefinite { index: i, pivot: 0.0 });
        }
        let mut proj = T::zero();
        for r in 0..k {
            proj += u[i][r] * y[r];
        }
        let coeff = proj / sigma_sq;
        for r in 0..p {
            z[r] += coeff * v[i][r];
        }
    }
    Ok(z)
}

/// Nonnegative least squares by the Lawson-Hanson active-set method:
/// `min ‖Ax − y‖₂` subject to `x ≥ 0`.
pub fn nnls<T: Real>(a: &DenseMatrix<T>, y: &DenseVector<T>) -> Result<DenseVector<T>> {
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "nnls",
            expected: a.rows(),
            got: y.len(),
        });
    }
    let n = a.cols();
    let pivot_tol = lit::<T>(1e-10) * a.max_abs();
    let mut x = DenseVector::zeros(n);
    let mut in_passive = vec![false; n];
    let mut banned = vec![false; n];
    let mut col_norm_max = T::zero();
    for j in 0..n {
        let mut acc = T::zero();
        for r in 0..a.rows() {
            acc += a.get(r, j) * a.get(r, j);
        }
        col_norm_max = col_norm_max.max(acc.sqrt());
    }
    let max_outer = 3 * n;
    let mut prev_norm = T::infinity();
    let mut stalls = 0u32;

    for _outer in 0..=max_outer {
        // w = Aᵀ(y − Ax)
        let residual = y.sub(&a.matvec(&x)?);
        let w = a.matvec_t(&residual)?;
        // The residual norm decreases monotonically in exact arithmetic;
        // repeated non-decrease means the iteration is chasing rounding
        // noise in the gradient and the solution will not improve further.
        let cur_norm = residual.norm2();
        if prev_norm - cur_norm <= lit::<T>(1e-12) * (T::one() + cur_norm) {
            stalls += 1;
            if stalls >= 5 {
                return Ok(x);
            }
        } else {
            stalls = 0;
        }
        prev_norm = prev_norm.min(cur_norm);
        // Tolerance tracks the rounding error of w itself, which shrinks
        // with the residual; a tolerance frozen at the initial gradient
        // scale would stop badly scaled problems far from the optimum.
        let grad_tol = lit::<T>(1e-10) * (T::one() + col_norm_max * residual.norm2());
        let mut best: Option<(usize, T)> = None;
        for i in 0..n {
            if !in_passive[i] && !banned[i] && w[i] > grad_tol {
                if best.map_or(true, |(_, bw)| w[i] > bw) {
                    best = Some((i, w[i]));
                }
            }
        }
        let Some((t, _)) = best else {
            return Ok(x);
        };
        in_passive[t] = true;

        loop {
            let passive: Vec<usize> = (0..n).filter(|&i| in_passive[i]).collect();
            let z = ls_on_passive(a, y, &passive, pivot_tol)?;
            if z.iter().all(|&zi| zi > T::zero()) {
                for v in x.as_mut_slice().iter_mut() {
                    *v = T::zero();
                }
                for (&ci, &zi) in passive.iter().zip(&z) {
                    x[ci] = zi;
                }
                // Real progress: previously banned columns are eligible again.
                banned.iter_mut().for_each(|b| *b = false);
                break;
            }
            // Step toward z until the first passive component hits zero.
            let mut alpha = T::infinity();
            for (&ci, &zi) in passive.iter().zip(&z) {
                if zi <= T::zero() {
                    let step = x[ci] / (x[ci] - zi);
                    alpha = alpha.min(step);
                }
            }
            if !(alpha > T::zero()) {
                // The freshly added column came back non-positive at zero
                // step length (numerical degeneracy); ban it until the
                // iterate moves, which breaks the add/remove cycle.
                in_passive[t] = false;
                banned[t] = true;
                break;
            }
            for (&ci, &zi) in passive.iter().zip(&z) {
                x[ci] = x[ci] + alpha * (zi - x[ci]);
            }
            for &ci in &passive {
                if x[ci] <= pivot_tol {
                    x[ci] = T::zero();
                    in_passive[ci] = false;
                }
            }
            if !(0..n).any(|i| in_passive[i]) {
                break;
            }
        }
    }
    Err(Error::MaxOuterIterations(max_outer))
}

/// Worst KKT violation of a candidate NNLS solution; used by tests.
pub fn nnls_kkt_violation<T: Real>(
    a: &DenseMatrix<T>,
    y: &DenseVector<T>,
    x: &DenseVector<T>,
) -> Result<T> {
    let grad = a.matvec_t(&a.matvec(x)?.sub(y))?;
    let mut worst = T::zero();
    for i in 0..x.len() {
        if x[i] > T::zero() {
            worst = worst.max(grad[i].abs());
        } else {
            worst = worst.max((-grad[i]).max(T::zero()));
        }
    }
    Ok(worst)
}

/// Default ASC penalty weight for [`fcls`]: `1e3 · max|Aᵢⱼ|`.
pub fn fcls_default_weight<T: Real>(a: &DenseMatrix<T>) -> T {
    lit::<T>(1e3) * a.max_abs()
}

/// Fully constrained least squares by the penalty reduction to NNLS: a row
/// `asc_weight·1ᵀ` is appended to `A` and `asc_weight` to `y`, so the sum
/// constraint holds approximately, tighter as the weight grows.
pub fn fcls<T: Real>(
    a: &DenseMatrix<T>,
    y: &DenseVector<T>,
    asc_weight: T,
) -> Result<DenseVector<T>> {
    if !(asc_weight > T::zero()) {
        return Err(Error::InvalidSpec("fcls asc_weight must be > 0".into()));
    }
    let (k, n) = (a.rows(), a.cols());
    let mut data = Vec::with_capacity((k + 1) * n);
    data.extend_from_slice(a.entries());
    data.extend(std::iter::repeat(asc_weight).take(n));
    let aug = DenseMatrix::from_raw(k + 1, n, data);
    let mut yv = y.as_slice().to_vec();
    yv.push(asc_weight);
    nnls(&aug, &DenseVector::from_raw(yv))
}

/// Brute-force CSR oracle: exhaustively scans the simplex discretized with
/// spacing `step` (n ≤ 3 only) and returns the grid point minimizing
/// `½‖Ax−y‖² + λ‖x‖₁`.
pub fn grid_csr<T: Real>(
    a: &DenseMatrix<T>,
    y: &DenseVector<T>,
    lambda: T,
    step: T,
) -> Result<DenseVector<T>> {
    let n = a.cols();
    if n > 3 {
        return Err(Error::GridTooLarge(n));
    }
    if !(step > T::zero()) || step > lit(1e-3) {
        return Err(Error::BadGridStep);
    }
    let m = (T::one() / step).round().to_usize().unwrap();
    let step = T::one() / T::from_usize(m).unwrap();
    let mut best_obj = T::infinity();
    let mut best = DenseVector::zeros(n);
    let eval = |x: &DenseVector<T>| -> Result<T> {
        let r = a.matvec(x)?.sub(y);
        Ok(lit::<T>(0.5) * r.norm2_sq() + lambda * x.norm1())
    };
    match n {
        1 => {
            best = DenseVector::from_raw(vec![T::one()]);
            best_obj = eval(&best)?;
        }
        2 => {
            for i in 0..=m {
                let x = DenseVector::from_raw(vec![
                    T::from_usize(i).unwrap() * step,
                    T::from_usize(m - i).unwrap() * step,
                ]);
                let obj = eval(&x)?;
                if obj < best_obj {
                    best_obj = obj;
                    best = x;
                }
            }
        }
        3 => {
            for i in 0..=m {
                for j in 0..=(m - i) {
                    let x = DenseVector::from_raw(vec![
                        T::from_usize(i).unwrap() * step,
                        T::from_usize(j).unwrap() * step,
                        T::from_usize(m - i - j).unwrap() * step,
                    ]);
                    let obj = eval(&x)?;
                    if obj < best_obj {
                        best_obj = obj;
                        best = x;
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    let _ = best_obj;
    Ok(best)
}
