//! Small numerical kernels: bracketed root finding, bracketed scalar
//! maximization, and a dense symmetric solve with full pivoting.

use crate::error::{Error, Result};

/// Find a root of `f` on (lo, hi) by bisection, then polish with Newton steps
/// using a finite-difference derivative. Requires a sign change on the
/// bracket. Argument tolerance is relative to the bracket scale.
pub fn bisect_newton<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64> {
    const MAX_ITER: usize = 200;
    let (mut lo, mut hi) = (lo, hi);
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::RootNotFound(format!(
            "no sign change on ({lo}, {hi}): f(lo) = {flo}, f(hi) = {fhi}"
        )));
    }
    let scale = hi.abs().max(lo.abs()).max(1e-300);
    let tol = rel_tol * scale;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..MAX_ITER {
        mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || hi - lo < tol {
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    // Newton polish; keep iterates inside the bracket.
    let mut x = mid;
    for _ in 0..8 {
        let fx = f(x);
        let h = (x.abs() * 1e-7).max(1e-12);
        let d = (f(x + h) - f(x - h)) / (2.0 * h);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - fx / d;
        if !(next > lo && next < hi) {
            break;
        }
        if (next - x).abs() < 0.25 * tol {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Maximize a unimodal `f` on (lo, hi) by golden-section search.
/// Returns the argmax to within `tol` on the argument.
pub fn maximize_golden<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Solve the symmetric positive semi-definite system `G x = b` by Gaussian
/// elimination with complete pivoting. Pivots below `rank_tol` times the
/// largest initial diagonal entry signal rank deficiency.
pub fn solve_full_pivot(g: &[Vec<f64>], b: &[f64], rank_tol: f64) -> Result<Vec<f64>> {
    let n = b.len();
    assert!(g.len() == n && g.iter().all(|row| row.len() == n));
    let mut a: Vec<Vec<f64>> = g.to_vec();
    let mut rhs = b.to_vec();
    let mut col_perm: Vec<usize> = (0..n).collect();
    let diag_max = (0..n).map(|i| g[i][i].abs()).fold(0.0f64, f64::max).max(1e-300);
    let threshold = rank_tol * diag_max;

    for k in 0..n {
        // locate the largest remaining entry
        let (mut pr, mut pc, mut best) = (k, k, 0.0f64);
        for i in k..n {
            for j in k..n {
                if a[i][j].abs() > best {
                    best = a[i][j].abs();
                    pr = i;
                    pc = j;
                }
            }
        }
        if best < threshold {
            return Err(Error::RankDeficient(format!(
                "pivot {best:e} below tolerance {threshold:e} at step {k}"
            )));
        }
        a.swap(k, pr);
        rhs.swap(k, pr);
        for row in a.iter_mut() {
            row.swap(k, pc);
        }
        col_perm.swap(k, pc);
        for i in k + 1..n {
            let m = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= m * a[k][j];
            }
            rhs[i] -= m * rhs[k];
        }
    }
    let mut y = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for j in k + 1..n {
            s -= a[k][j] * y[j];
        }
        y[k] = s / a[k][k];
    }
    let mut x = vec![0.0; n];
    for k in 0..n {
        x[col_perm[k]] = y[k];
    }
    Ok(x)
}

/// Least squares by Householder QR on the design matrix itself, avoiding the
/// squared conditioning of the normal equations. Errors when a diagonal of R
/// falls below `rank_tol` times the largest diagonal.
pub fn solve_least_squares(design: &[Vec<f64>], y: &[f64], rank_tol: f64) -> Result<Vec<f64>> {
    let m = design.len();
    assert!(m == y.len());
    let p = design.first().map_or(0, Vec::len);
    if m < p || p == 0 {
        return Err(Error::RankDeficient(format!("{m} rows cannot determine {p} coefficients")));
    }
    let mut a: Vec<Vec<f64>> = design.to_vec();
    let mut b = y.to_vec();
    for k in 0..p {
        // Householder reflection zeroing column k below the diagonal
        let norm = (k..m).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm > 0.0 {
            let alpha = if a[k][k] >= 0.0 { -norm } else { norm };
            let mut v: Vec<f64> = (k..m).map(|i| a[i][k]).collect();
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|x| x * x).sum();
            if vnorm2 > 0.0 {
                for j in k..p {
                    let dot: f64 = (k..m).map(|i| v[i - k] * a[i][j]).sum();
                    let s = 2.0 * dot / vnorm2;
                    for i in k..m {
                        a[i][j] -= s * v[i - k];
                    }
                }
                let dot: f64 = (k..m).map(|i| v[i - k] * b[i]).sum();
                let s = 2.0 * dot / vnorm2;
                for i in k..m {
                    b[i] -= s * v[i - k];
                }
            }
            a[k][k] = alpha;
        }
    }
    let diag_max = (0..p).map(|k| a[k][k].abs()).fold(0.0f64, f64::max);
    for k in 0..p {
        if a[k][k].abs() < rank_tol * diag_max || diag_max == 0.0 {
            return Err(Error::RankDeficient(format!(
                "R diagonal {:e} below tolerance {:e} at column {k}",
                a[k][k].abs(),
                rank_tol * diag_max
            )));
        }
    }
    let mut x = vec![0.0; p];
    for k in (0..p).rev() {
        let mut s = b[k];
        for j in k + 1..p {
            s -= a[k][j] * x[j];
        }
        x[k] = s / a[k][k];
    }
    Ok(x)
}
