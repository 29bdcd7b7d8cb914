//! Dense Hermitian eigensolvers, eigenvalues only.
//!
//! The main path reduces the matrix to real symmetric tridiagonal form by
//! complex Householder reflections and finishes with implicit-shift QL.
//! Eigenvalues of a Hermitian tridiagonal depend only on |e_i|, so the
//! off-diagonal phases are dropped instead of chased.
//!
//! A cyclic complex Jacobi solver is kept alongside: slower, but it shares
//! no code with the Householder/QL route, which lets the density-matrix
//! oracle diagonalize without touching the code path it is meant to check.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum QL iterations per eigenvalue before giving up.
const MAX_QL_ITER: usize = 60;

/// Relative Hermiticity tolerance: max |H − H†| ≤ 1e-13 · max |H|.
const HERMITICITY_RTOL: f64 = 1e-13;

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// `a` is row-major n×n. Hermiticity is asserted up to 1e-13 relative;
/// non-convergence of the QL iteration is reported, never silent.
pub fn hermitian_eigenvalues(n: usize, a: &[Complex64]) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n, "matrix buffer size mismatch");
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut scale = 0.0f64;
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            let x = a[i * n + j];
            let y = a[j * n + i];
            scale = scale.max(x.norm_sqr().sqrt());
            dev = dev.max((x - y.conj()).norm());
        }
    }
    if dev > HERMITICITY_RTOL * scale.max(1e-300) {
        return Err(Error::NotHermitian(dev));
    }
    let mut work = a.to_vec();
    let (mut d, mut e) = tridiagonalize(n, &mut work);
    ql_implicit_shift(&mut d, &mut e)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(d)
}

/// Householder reduction of a Hermitian matrix to (d, e): real diagonal and
/// real non-negative sub-diagonal. Works in place on the lower triangle.
fn tridiagonalize(n: usize, a: &mut [Complex64]) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n.saturating_sub(1)];
    let mut v = vec![Complex64::ZERO; n];
    let mut w = vec![Complex64::ZERO; n];

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1; // trailing size
        // column x = A[k+1.., k]
        let mut norm_sqr = 0.0f64;
        for i in 0..m {
            norm_sqr += a[(k + 1 + i) * n + k].norm_sqr();
        }
        let norm = norm_sqr.sqrt();
        e[k] = norm;
        if norm == 0.0 {
            d[k] = a[k * n + k].re;
            continue;
        }
        // v = x + phase·norm·e1, phase aligned with x_0 to avoid cancellation
        let x0 = a[(k + 1) * n + k];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::ONE };
        for i in 0..m {
            v[i] = a[(k + 1 + i) * n + k];
        }
        v[0] += phase * norm;
        let beta: f64 = v[..m].iter().map(|z| z.norm_sqr()).sum();
        if beta == 0.0 {
            d[k] = a[k * n + k].re;
            continue;
        }
        let c = 2.0 / beta;

        // p = c · B v on the trailing Hermitian block B = A[k+1.., k+1..]
        for i in 0..m {
            let row = k + 1 + i;
            let mut acc = Complex64::ZERO;
            // lower part of row i, then mirrored column below
            for j in 0..=i {
                acc += a[row * n + (k + 1 + j)] * v[j];
            }
            for j in (i + 1)..m {
                acc += a[(k + 1 + j) * n + row].conj() * v[j];
            }
            w[i] = acc * c;
        }
        // w := p − (c/2)(v^H p) v  (v^H B v is real)
        let vhp: Complex64 = v[..m]
            .iter()
            .zip(&w[..m])
            .map(|(vi, pi)| vi.conj() * pi)
            .sum();
        let corr = 0.5 * c * vhp.re;
        for i in 0..m {
            w[i] -= corr * v[i];
        }
        // B := B − v w^H − w v^H, lower triangle
        for i in 0..m {
            let row = k + 1 + i;
            for j in 0..=i {
                let upd = v[i] * w[j].conj() + w[i] * v[j].conj();
                a[row * n + (k + 1 + j)] -= upd;
            }
        }
        d[k] = a[k * n + k].re;
    }
    if n >= 2 {
        e[n - 2] = a[(n - 1) * n + (n - 2)].norm();
        d[n - 2] = a[(n - 2) * n + (n - 2)].re;
    }
    d[n - 1] = a[(n - 1) * n + (n - 1)].re;
    (d, e)
}

/// Implicit-shift QL on a symmetric tridiagonal (d, e); d holds the
/// eigenvalues on return, unsorted.
fn ql_implicit_shift(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    // shift sub-diagonal storage so e[i] couples d[i] and d[i+1]
    let mut e: Vec<f64> = {
        let mut t = e.to_vec();
        t.push(0.0);
        t
    };
    // Deflation threshold: relative to the neighbouring diagonal entries,
    // with an absolute floor at eps·‖T‖. Splitting a coupling below the
    // floor is a backward perturbation within the solver's stated accuracy;
    // without the floor, noise-scale clusters (d and e both ~ eps·‖T‖)
    // never satisfy the relative test and the iteration stalls.
    let anorm = d
        .iter()
        .map(|x| x.abs())
        .chain(e.iter().map(|x| 2.0 * x.abs()))
        .fold(0.0f64, f64::max);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * (dd + anorm) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITER {
                return Err(Error::NoConvergence { index: l, sweeps: MAX_QL_ITER });
            }
            // Wilkinson shift
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c2) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut annihilated_early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c2 * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    annihilated_early = true;
                    break;
                }
                s = f / r;
                c2 = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c2 * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c2 * r - b;
            }
            if annihilated_early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Cyclic Jacobi eigenvalues for a Hermitian matrix, ascending.
///
/// Independent of the Householder/QL path; O(n³) per sweep with slow
/// convergence, intended for small matrices (density-matrix oracle).
pub fn jacobi_hermitian_eigenvalues(n: usize, a: &[Complex64]) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n, "matrix buffer size mismatch");
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut m = a.to_vec();
    let scale: f64 = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    const MAX_SWEEPS: usize = 60;
    for sweep in 0..=MAX_SWEEPS {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-14 * scale * (n as f64) {
            break;
        }
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence { index: 0, sweeps: MAX_SWEEPS });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                let tau = (app - aqq) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // rows/columns p and q of U = [[c, −s·φ],[s·conj(φ), c]]
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    let new_kp = c * akp + s * phase.conj() * akq;
                    let new_kq = -s * phase * akp + c * akq;
                    m[k * n + p] = new_kp;
                    m[p * n + k] = new_kp.conj();
                    m[k * n + q] = new_kq;
                    m[q * n + k] = new_kq.conj();
                }
                m[p * n + p] = Complex64::new(app + t * mag, 0.0);
                m[q * n + q] = Complex64::new(aqq - t * mag, 0.0);
                m[p * n + q] = Complex64::ZERO;
                m[q * n + p] = Complex64::ZERO;
            }
        }
    }
    let mut evals: Vec<f64> = (0..n).map(|i| m[i * n + i].re).collect();
    evals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(evals)
}
