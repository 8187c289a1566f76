//! Eigenvalues of dense real nonsymmetric matrices.
//!
//! Balancing, then stabilized elementary reduction to upper Hessenberg form,
//! then the Francis implicit double-shift QR iteration (the classic EISPACK
//! `balanc` / `elmhes` / `hqr` sequence). Only eigenvalues are produced.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::SignedWeightMatrix;

const RADIX: f64 = 2.0;

/// Row-major scratch copy with `(i, j)` indexing.
struct Dense {
    n: usize,
    a: Vec<f64>,
}

impl Dense {
    #[inline(always)]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline(always)]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.a[i * self.n + j]
    }
}

/// Diagonal similarity by powers of two so that row and column norms match.
fn balance(m: &mut Dense) {
    let n = m.n;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let (mut r, mut c) = (0.0, 0.0);
            for j in (0..n).filter(|&j| j != i) {
                c += m.at(j, i).abs();
                r += m.at(i, j).abs();
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut g = r / RADIX;
            let mut f = 1.0;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    *m.at_mut(i, j) *= g;
                }
                for j in 0..n {
                    *m.at_mut(j, i) *= f;
                }
            }
        }
    }
}

/// Gaussian elimination with pivoting to upper Hessenberg form. Entries
/// below the subdiagonal are cleared on return.
fn hessenberg(m: &mut Dense) {
    let n = m.n;
    for col in 1..n.saturating_sub(1) {
        let mut pivot: f64 = 0.0;
        let mut prow = col;
        for j in col..n {
            if m.at(j, col - 1).abs() > pivot.abs() {
                pivot = m.at(j, col - 1);
                prow = j;
            }
        }
        if prow != col {
            for j in (col - 1)..n {
                m.a.swap(prow * n + j, col * n + j);
            }
            for j in 0..n {
                m.a.swap(j * n + prow, j * n + col);
            }
        }
        if pivot == 0.0 {
            continue;
        }
        for i in (col + 1)..n {
            let mut y = m.at(i, col - 1);
            if y == 0.0 {
                continue;
            }
            y /= pivot;
            *m.at_mut(i, col - 1) = y;
            for j in col..n {
                let v = m.at(col, j);
                *m.at_mut(i, j) -= y * v;
            }
            for j in 0..n {
                let v = m.at(j, i);
                *m.at_mut(j, col) += y * v;
            }
        }
    }
    for i in 2..n {
        for j in 0..(i - 1) {
            *m.at_mut(i, j) = 0.0;
        }
    }
}

#[inline]
fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix. Fails once the
/// total number of sweeps exceeds `100 n`.
fn hqr(m: &mut Dense) -> Result<Vec<Complex64>> {
    let n = m.n;
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let max_sweeps = 100 * n.max(1);
    let mut sweeps = 0usize;

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += m.at(i, j).abs();
        }
    }

    let mut t = 0.0;
    let mut nn = n as isize - 1;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            // Look for a single small subdiagonal element.
            let mut l = nu;
            while l >= 1 {
                let mut s = m.at(l - 1, l - 1).abs() + m.at(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if m.at(l, l - 1).abs() <= f64::EPSILON * s {
                    *m.at_mut(l, l - 1) = 0.0;
                    break;
                }
                l -= 1;
            }

            let mut x = m.at(nu, nu);
            if l == nu {
                // One root found.
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = m.at(nu - 1, nu - 1);
            let mut w = m.at(nu, nu - 1) * m.at(nu - 1, nu);
            if l + 1 == nu {
                // Two roots found.
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + sign(z, p);
                    wr[nu - 1] = x + z;
                    wr[nu] = if z != 0.0 { x - w / z } else { x + z };
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }

            sweeps += 1;
            if sweeps > max_sweeps {
                return Err(Error::NoConvergence("shifted QR iteration"));
            }
            if its > 0 && its % 10 == 0 {
                // Exceptional shift.
                t += x;
                for i in 0..=nu {
                    *m.at_mut(i, i) -= x;
                }
                let s = m.at(nu, nu - 1).abs() + m.at(nu - 1, nu - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            // Look for two consecutive small subdiagonal elements.
            let mut mm = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = m.at(mm, mm);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / m.at(mm + 1, mm) + m.at(mm, mm + 1);
                q = m.at(mm + 1, mm + 1) - z - rr - ss;
                r = m.at(mm + 2, mm + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if mm == l {
                    break;
                }
                let u = m.at(mm, mm - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (m.at(mm - 1, mm - 1).abs() + z.abs() + m.at(mm + 1, mm + 1).abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                mm -= 1;
            }
            for i in (mm + 2)..=nu {
                *m.at_mut(i, i - 2) = 0.0;
                if i != mm + 2 {
                    *m.at_mut(i, i - 3) = 0.0;
                }
            }

            // Double QR step on rows l..=nu and columns mm..=nu.
            let mut k = mm;
            while k < nu {
                if k != mm {
                    p = m.at(k, k - 1);
                    q = m.at(k + 1, k - 1);
                    r = if k != nu - 1 { m.at(k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == mm {
                        if l != mm {
                            *m.at_mut(k, k - 1) = -m.at(k, k - 1);
                        }
                    } else {
                        *m.at_mut(k, k - 1) = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = m.at(k, j) + q * m.at(k + 1, j);
                        if k != nu - 1 {
                            pp += r * m.at(k + 2, j);
                            *m.at_mut(k + 2, j) -= pp * z;
                        }
                        *m.at_mut(k + 1, j) -= pp * y;
                        *m.at_mut(k, j) -= pp * x;
                    }
                    let imax = nu.min(k + 3);
                    for i in l..=imax {
                        let mut pp = x * m.at(i, k) + y * m.at(i, k + 1);
                        if k != nu - 1 {
                            pp += z * m.at(i, k + 2);
                            *m.at_mut(i, k + 2) -= pp * r;
                        }
                        *m.at_mut(i, k + 1) -= pp * q;
                        *m.at_mut(i, k) -= pp;
                    }
                }
                k += 1;
            }
        }
    }

    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}

/// All `n` eigenvalues of `m`, unordered. Complex ones come in exactly
/// conjugate pairs.
pub fn eigenvalues_raw(m: &SignedWeightMatrix) -> Result<Vec<Complex64>> {
    let n = m.n();
    let mut d = Dense {
        n,
        a: m.as_slice().to_vec(),
    };
    if n == 1 {
        return Ok(vec![Complex64::new(d.a[0], 0.0)]);
    }
    balance(&mut d);
    hessenberg(&mut d);
    hqr(&mut d)
}

/// Complex LU with partial pivoting, in place. Zero pivots are replaced by
/// `tiny` so that inverse iteration at an exact eigenvalue still proceeds.
fn lu_solve_shifted(a: &mut [Complex64], n: usize, b: &mut [Complex64], tiny: f64) {
    let mut piv: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm()))
            .unwrap();
        if p != k {
            for j in 0..n {
                a.swap(p * n + j, k * n + j);
            }
            piv.swap(p, k);
        }
        if a[k * n + k].norm() < tiny {
            a[k * n + k] = Complex64::new(tiny, 0.0);
        }
        let pivot = a[k * n + k];
        for i in (k + 1)..n {
            let f = a[i * n + k] / pivot;
            a[i * n + k] = f;
            if f != Complex64::new(0.0, 0.0) {
                for j in (k + 1)..n {
                    let v = a[k * n + j];
                    a[i * n + j] -= f * v;
                }
            }
        }
    }
    let permuted: Vec<Complex64> = piv.iter().map(|&p| b[p]).collect();
    b.copy_from_slice(&permuted);
    for i in 0..n {
        for j in 0..i {
            let v = a[i * n + j] * b[j];
            b[i] -= v;
        }
    }
    for i in (0..n).rev() {
        for j in (i + 1)..n {
            let v = a[i * n + j] * b[j];
            b[i] -= v;
        }
        b[i] /= a[i * n + i];
    }
}

/// `‖M v − λ v‖₂` for a unit eigenvector `v` obtained by inverse iteration.
/// Cost is `O(n³)`; intended for verification on modest `n`.
pub fn eigen_residual(m: &SignedWeightMatrix, lambda: Complex64) -> f64 {
    let n = m.n();
    let scale = m.frobenius_norm().max(1.0);
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.05 * i as f64))
        .collect();
    let residual = |v: &[Complex64]| {
        (0..n)
            .map(|i| {
                let mv: Complex64 = (0..n).map(|j| v[j] * m.get(i, j)).sum();
                (mv - lambda * v[i]).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    };
    let mut best = f64::INFINITY;
    for _ in 0..3 {
        let mut a: Vec<Complex64> = m.as_slice().iter().map(|&x| Complex64::new(x, 0.0)).collect();
        for i in 0..n {
            a[i * n + i] -= lambda;
        }
        lu_solve_shifted(&mut a, n, &mut v, f64::EPSILON * scale);
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        v.iter_mut().for_each(|c| *c /= norm);
        best = best.min(residual(&v));
    }
    best
}
