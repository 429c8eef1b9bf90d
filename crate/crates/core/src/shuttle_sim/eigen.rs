//! Lowest eigenpairs of a real symmetric tridiagonal matrix: Sturm-sequence
//! bisection for the eigenvalues, inverse iteration with a pivoted
//! tridiagonal LU for the vectors.

use super::ShuttleError;

/// Number of eigenvalues strictly below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64, tiny: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let qq = if q.abs() < tiny { tiny.copysign(q) } else { q };
        q = diag[i] - x - off[i - 1] * off[i - 1] / qq;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solves `(T − λ) y = b` in place, `T` given by `diag`/`off`, with partial
/// pivoting (two superdiagonals of fill).
fn shifted_solve(diag: &[f64], off: &[f64], lambda: f64, b: &mut [f64], tiny: f64) {
    let n = diag.len();
    if n == 1 {
        let p = diag[0] - lambda;
        b[0] /= if p.abs() < tiny { tiny } else { p };
        return;
    }
    // rows of U: u0 (diag), u1, u2 (superdiagonals); multipliers l
    let mut u0 = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let mut l = vec![0.0; n];
    let mut piv = vec![false; n];
    // current row i holds (a, b, c) at columns i, i+1, i+2
    let mut a = diag[0] - lambda;
    let mut bb = off[0];
    let mut c = 0.0;
    for i in 0..n - 1 {
        let sub = off[i];
        let (nd, nu) = (diag[i + 1] - lambda, if i + 1 < n - 1 { off[i + 1] } else { 0.0 });
        if a.abs() >= sub.abs() {
            let m = if a.abs() < tiny { 0.0 } else { sub / a };
            let a_eff = if a.abs() < tiny { tiny } else { a };
            u0[i] = a_eff;
            u1[i] = bb;
            u2[i] = c;
            l[i] = m;
            a = nd - m * bb;
            bb = nu - m * c;
            c = 0.0;
        } else {
            // swap rows i and i+1
            let m = a / sub;
            u0[i] = sub;
            u1[i] = nd;
            u2[i] = nu;
            l[i] = m;
            piv[i] = true;
            a = bb - m * nd;
            bb = c - m * nu;
            c = 0.0;
        }
    }
    u0[n - 1] = if a.abs() < tiny { tiny } else { a };
    // forward
    for i in 0..n - 1 {
        if piv[i] {
            b.swap(i, i + 1);
        }
        b[i + 1] -= l[i] * b[i];
    }
    // back
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= u1[i] * b[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * b[i + 2];
        }
        b[i] = s / u0[i];
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// Lowest `m` eigenvalues (ascending) and orthonormal eigenvectors. Vector
/// signs are fixed so the largest-magnitude component is positive.
pub fn tridiagonal_lowest(diag: &[f64], off: &[f64], m: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>), ShuttleError> {
    let n = diag.len();
    if m == 0 || m > n || off.len() + 1 != n {
        return Err(ShuttleError::Eigen(format!("bad request: {m} levels of a {n}-point matrix")));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(1e-300);
    let tiny = scale * 1e-300_f64.max(f64::EPSILON * f64::EPSILON);
    let mut values = Vec::with_capacity(m);
    for k in 0..m {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if sturm_count(diag, off, mid, tiny) > k {
                b = mid;
            } else {
                a = mid;
            }
            if b - a < 4.0 * f64::EPSILON * scale {
                break;
            }
        }
        values.push(0.5 * (a + b));
    }
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(m);
    for k in 0..m {
        let lambda = values[k];
        // deterministic, non-symmetric start
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * ((i * 7919 + k * 104729) % 1009) as f64 / 1009.0).collect();
        normalize(&mut v);
        let close: Vec<usize> = (0..k).filter(|&j| (values[j] - lambda).abs() < 1e-3 * scale).collect();
        let mut converged = false;
        for _ in 0..8 {
            let prev = v.clone();
            shifted_solve(diag, off, lambda, &mut v, tiny);
            for &j in &close {
                let d: f64 = v.iter().zip(&vectors[j]).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(&vectors[j]).for_each(|(a, b)| *a -= d * b);
            }
            normalize(&mut v);
            let overlap: f64 = v.iter().zip(&prev).map(|(a, b)| a * b).sum::<f64>().abs();
            if 1.0 - overlap < 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged {
            // one more pass still counts if the residual is small
            let res = residual(diag, off, lambda, &v);
            if res > 1e-8 * scale {
                return Err(ShuttleError::Eigen(format!("inverse iteration for level {k} did not converge ({res:e})")));
            }
        }
        let (imax, _) = v.iter().enumerate().fold((0, 0.0f64), |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
        if v[imax] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        vectors.push(v);
    }
    Ok((values, vectors))
}

fn residual(diag: &[f64], off: &[f64], lambda: f64, v: &[f64]) -> f64 {
    let n = diag.len();
    let mut r = 0.0f64;
    for i in 0..n {
        let mut s = (diag[i] - lambda) * v[i];
        if i > 0 {
            s += off[i - 1] * v[i - 1];
        }
        if i + 1 < n {
            s += off[i] * v[i + 1];
        }
        r = r.max(s.abs());
    }
    r
}
