//! Dense complex linear algebra not covered directly by nalgebra: eigenvalues of
//! general complex matrices via shifted Hessenberg QR, Hermitian
//! eigendecomposition, polynomial roots from a balanced companion matrix, and
//! SVD-based least squares.
//!
//! nalgebra's own symmetric and Hermitian eigensolvers stop short of full
//! accuracy on some inputs (reconstruction errors from 1e-9 up to 1e-5 were
//! seen on PSD-projection iterates), which is enough to stall the SDP solver,
//! so Hermitian problems go through a Householder tridiagonalization and an
//! implicit QL iteration instead.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Plane rotation `[c s; -conj(s) c]` that zeroes the second entry of `(x, y)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ny = y.norm();
    if ny == 0.0 {
        return (1.0, ZERO);
    }
    let nx = x.norm();
    if nx == 0.0 {
        return (0.0, y.conj() / ny);
    }
    let r = nx.hypot(ny);
    (nx / r, (x / nx) * y.conj() / r)
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift QR with
/// Wilkinson shifts and periodic exceptional shifts.
pub fn hessenberg_eigenvalues(mut h: CMatrix) -> Result<Vec<Complex64>> {
    let n = h.nrows();
    assert_eq!(n, h.ncols(), "square matrix required");
    let mut eig = vec![ZERO; n];
    if n == 0 {
        return Ok(eig);
    }
    let eps = f64::EPSILON;
    let max_iter = 60 * n.max(10);
    let mut hi = n - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // Deflate at the lowest negligible subdiagonal.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let scale = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if sub <= eps * scale || sub < f64::MIN_POSITIVE {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if total > max_iter {
            return Err(Error::NoConvergence(format!(
                "Hessenberg QR exceeded {max_iter} sweeps at order {n}"
            )));
        }
        let shift = if its % 11 == 0 {
            h[(hi, hi)] + h[(hi, hi - 1)].norm() * 0.75
        } else if its % 17 == 0 {
            h[(lo, lo)] + h[(lo + 1, lo)].norm() * 0.75
        } else {
            // Eigenvalue of the trailing 2x2 block closest to the corner.
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let mu1 = d + half + disc;
            let mu2 = d + half - disc;
            if (mu1 - d).norm() < (mu2 - d).norm() {
                mu1
            } else {
                mu2
            }
        };
        for k in lo..=hi {
            h[(k, k)] -= shift;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            rots.push((c, s));
        }
        for (off, &(c, s)) in rots.iter().enumerate() {
            let k = lo + off;
            for i in lo..=(k + 2).min(hi) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += shift;
        }
    }
    Ok(eig)
}

/// Eigenvalues of a general square complex matrix.
pub fn eigenvalues(m: CMatrix) -> Result<Vec<Complex64>> {
    if m.nrows() <= 1 {
        return Ok(m.iter().copied().collect());
    }
    hessenberg_eigenvalues(m.hessenberg().h())
}

/// Diagonal similarity with powers of two that equalizes row and column norms
/// (Parlett and Reinsch).
fn balance(m: &mut CMatrix) {
    let n = m.nrows();
    let radix = 2.0f64;
    let sqrdx = radix * radix;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..n {
                if j != i {
                    col += m[(j, i)].l1_norm();
                    row += m[(i, j)].l1_norm();
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let total = col + row;
            let mut f = 1.0;
            let mut c = col;
            while c < row / radix {
                f *= radix;
                c *= sqrdx;
            }
            while c > row * radix {
                f /= radix;
                c /= sqrdx;
            }
            if (c + row) / f < 0.95 * total {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Roots of `Σ_i coeffs[i] z^i` (ascending powers).
///
/// Trailing coefficients that vanish relative to the largest one are dropped,
/// and leading zero coefficients contribute exact roots at the origin.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let scale = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(Vec::new());
    }
    let tiny = scale * 1e-14;
    let mut top = coeffs.len() - 1;
    while top > 0 && coeffs[top].norm() <= tiny {
        top -= 1;
    }
    let low = coeffs.iter().take_while(|z| **z == ZERO).count();
    let mut roots = vec![ZERO; low];
    let core = &coeffs[low..=top];
    let deg = core.len() - 1;
    if deg == 0 {
        return Ok(roots);
    }
    let lead = core[deg];
    let mut comp = CMatrix::zeros(deg, deg);
    for j in 0..deg {
        comp[(0, j)] = -core[deg - 1 - j] / lead;
    }
    for i in 1..deg {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    balance(&mut comp);
    roots.extend(hessenberg_eigenvalues(comp)?);
    Ok(roots)
}

/// Horner evaluation of an ascending-power polynomial.
pub fn poly_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

/// Implicit QL with Wilkinson shifts on a real symmetric tridiagonal matrix
/// (`d` diagonal, `e[i] = T[i, i-1]`), accumulating rotations into the
/// row-major `n × n` matrix `v`. Eigenvalues are left unsorted in `d`.
fn tridiagonal_ql(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    let at = |i: usize, j: usize| i * n + j;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd || e[m].abs() < f64::MIN_POSITIVE {
                    break;
                }
                m += 1;
            }
            if m == l || iterations == 60 {
                break;
            }
            iterations += 1;
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // Exact decoupling: drop the remaining rotation.
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let vk1 = v[at(k, i + 1)];
                    let vk = v[at(k, i)];
                    v[at(k, i + 1)] = s * vk + c * vk1;
                    v[at(k, i)] = c * vk - s * vk1;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// Householder reduction of a Hermitian matrix to real symmetric
/// tridiagonal form, `H = U T Uᴴ`. Returns the diagonal, the subdiagonal
/// (`sub[i] = T[i+1, i]`) and `U`.
fn hermitian_tridiagonalize(m: &CMatrix) -> (Vec<f64>, Vec<f64>, CMatrix) {
    let n = m.nrows();
    let mut a = (m + m.adjoint()).scale(0.5);
    let mut q = CMatrix::identity(n, n);
    for k in 0..n.saturating_sub(2) {
        let x: CVector = a.view((k + 1, k), (n - k - 1, 1)).column(0).into_owned();
        let xnorm = x.norm();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.norm();
        if vnorm == 0.0 {
            continue;
        }
        v.unscale_mut(vnorm);
        let m2 = n - k - 1;
        {
            let mut a22 = a.view_mut((k + 1, k + 1), (m2, m2));
            let p = (&a22 * &v).scale(2.0);
            let kk = v.dotc(&p);
            let w = &p - &v * kk;
            a22.gerc(-Complex64::new(1.0, 0.0), &v, &w, Complex64::new(1.0, 0.0));
            a22.gerc(-Complex64::new(1.0, 0.0), &w, &v, Complex64::new(1.0, 0.0));
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            a[(i, k)] = ZERO;
            a[(k, i)] = ZERO;
        }
        let mut qs = q.view_mut((0, k + 1), (n, m2));
        let qv = &qs * &v;
        qs.gerc(-Complex64::new(2.0, 0.0), &qv, &v, Complex64::new(1.0, 0.0));
    }
    // A diagonal unitary similarity makes the subdiagonal real and nonnegative.
    let mut diag = vec![0.0; n];
    let mut sub = vec![0.0; n.saturating_sub(1)];
    let mut phase = Complex64::new(1.0, 0.0);
    for i in 0..n {
        diag[i] = a[(i, i)].re;
        if i > 0 {
            for r in 0..n {
                q[(r, i)] *= phase;
            }
        }
        if i + 1 < n {
            let s = a[(i + 1, i)];
            sub[i] = s.norm();
            if sub[i] > 0.0 {
                phase *= s / sub[i];
            }
        }
    }
    (diag, sub, q)
}

/// Eigenvalues (unsorted) and eigenvectors of a Hermitian matrix.
fn hermitian_eigen_unsorted(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let (mut d, sub, u) = hermitian_tridiagonalize(m);
    let mut e = vec![0.0; n];
    e[1..].copy_from_slice(&sub);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tridiagonal_ql(&mut z, &mut d, &mut e, n);
    let zc = CMatrix::from_fn(n, n, |r, c| Complex64::new(z[r * n + c], 0.0));
    (d, u * zc)
}

/// Hermitian eigendecomposition: ascending eigenvalues and matching
/// orthonormal columns.
pub fn hermitian_eigen(m: CMatrix) -> (Vec<f64>, CMatrix) {
    let (d, v) = hermitian_eigen_unsorted(&m);
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Projection of a Hermitian matrix onto the positive semidefinite cone.
pub fn psd_projection(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let (values, vectors) = hermitian_eigen_unsorted(m);
    let keep: Vec<usize> = (0..n).filter(|&i| values[i] > 0.0).collect();
    let mut half = CMatrix::zeros(n, keep.len());
    for (col, &i) in keep.iter().enumerate() {
        let s = values[i].sqrt();
        for r in 0..n {
            half[(r, col)] = vectors[(r, i)] * s;
        }
    }
    &half * half.adjoint()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen_unsorted(m)
        .0
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Thin singular value decomposition `A = U diag(s) Vᴴ` with `s` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

/// One-sided (Hestenes) Jacobi SVD. Accurate to working precision on the
/// small, possibly rank-deficient matrices used here, where nalgebra's
/// complex SVD was observed to return factors that do not reconstruct the
/// input.
pub fn svd(a: &CMatrix) -> Svd {
    if a.nrows() < a.ncols() {
        let t = svd(&a.adjoint());
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = CMatrix::identity(n, n);
    let tol = f64::EPSILON;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for r in 0..m {
                    let wp = w[(r, p)];
                    let wq = w[(r, q)];
                    alpha += wp.norm_sqr();
                    beta += wq.norm_sqr();
                    gamma += wp.conj() * wq;
                }
                let g = gamma.norm();
                if g == 0.0 || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 { 1.0 } else { -1.0 } / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let sn = c * t;
                for r in 0..m {
                    let wp = w[(r, p)];
                    let wq = w[(r, q)] * phase;
                    w[(r, p)] = wp * c - wq * sn;
                    w[(r, q)] = wp * sn + wq * c;
                }
                for r in 0..n {
                    let vp = v[(r, p)];
                    let vq = v[(r, q)] * phase;
                    v[(r, p)] = vp * c - vq * sn;
                    v[(r, q)] = vp * sn + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut u = CMatrix::zeros(m, n);
    for (col, &j) in order.iter().enumerate() {
        if norms[j] > 0.0 {
            u.set_column(col, &(w.column(j) / Complex64::new(norms[j], 0.0)));
        }
    }
    let v = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Svd { u, s, v }
}

/// Minimum-norm least-squares solution of `a x ≈ b`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: CVector,
    pub singular_values: Vec<f64>,
    pub residual: f64,
}

impl LeastSquares {
    /// `σ_max / σ_min` over all singular values (infinite when rank deficient).
    pub fn condition(&self) -> f64 {
        let max = self.singular_values.iter().copied().fold(0.0, f64::max);
        let min = self
            .singular_values
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

/// Solves through the SVD, discarding singular values below
/// `σ_max · ε · max(m, n)`.
pub fn least_squares(a: &CMatrix, b: &CVector) -> Result<LeastSquares> {
    if a.nrows() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.nrows(),
            found: b.len(),
        });
    }
    let ncols = a.ncols();
    if ncols == 0 {
        return Ok(LeastSquares {
            solution: CVector::zeros(0),
            singular_values: Vec::new(),
            residual: b.norm(),
        });
    }
    let f = svd(a);
    let smax = f.s.first().copied().unwrap_or(0.0);
    let cutoff = smax * f64::EPSILON * a.nrows().max(ncols) as f64;
    let mut coeffs = f.u.adjoint() * b;
    for (i, c) in coeffs.iter_mut().enumerate() {
        *c = if f.s[i] > cutoff { *c / f.s[i] } else { ZERO };
    }
    let solution = &f.v * coeffs;
    let residual = (a * &solution - b).norm();
    Ok(LeastSquares {
        solution,
        singular_values: f.s,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rank_two_hankel(rows: usize, cols: usize) -> CMatrix {
        let z1 = Complex64::from_polar(1.0, 0.7);
        let z2 = Complex64::from_polar(1.0, -2.1);
        CMatrix::from_fn(rows, cols, |i, j| {
            z1.powi((i + j) as i32) + c(0.5, -0.25) * z2.powi((i + j) as i32)
        })
    }

    fn reconstruct(f: &Svd) -> CMatrix {
        let s = CMatrix::from_diagonal(&CVector::from_iterator(
            f.s.len(),
            f.s.iter().map(|&x| c(x, 0.0)),
        ));
        &f.u * s * f.v.adjoint()
    }

    #[test]
    fn svd_reconstructs_rank_deficient_matrices() {
        for (r, k) in [(3, 4), (4, 3), (2, 7), (7, 2), (5, 5)] {
            let a = rank_two_hankel(r, k);
            let f = svd(&a);
            assert!((reconstruct(&f) - &a).norm() < 1e-12 * a.norm(), "{r}x{k}");
            assert!(f.s.windows(2).all(|w| w[0] >= w[1]));
            let rank = f.s.iter().filter(|&&x| x > 1e-10 * f.s[0]).count();
            assert_eq!(rank, 2.min(r).min(k));
            let v = f.v.columns(0, rank);
            assert!((v.adjoint() * v - CMatrix::identity(rank, rank)).norm() < 1e-12);
        }
    }

    #[test]
    fn svd_agrees_with_adjoint() {
        let a = rank_two_hankel(3, 6);
        let f = svd(&a);
        let g = svd(&a.adjoint());
        for (x, y) in f.s.iter().zip(&g.s) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    fn matched(found: &[Complex64], expected: &[Complex64], tol: f64) -> bool {
        found.len() == expected.len()
            && expected
                .iter()
                .all(|e| found.iter().any(|f| (f - e).norm() <= tol))
    }

    #[test]
    fn roots_of_unity_companion() {
        // The companion matrix of z^n - 1 is a cyclic permutation, a classic
        // stall case for unshifted or purely Wilkinson-shifted QR.
        for n in [1usize, 2, 5, 16, 64] {
            let mut p = vec![c(0., 0.); n + 1];
            p[0] = c(-1., 0.);
            p[n] = c(1., 0.);
            let r = poly_roots(&p).unwrap();
            let expected: Vec<Complex64> = (0..n)
                .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
                .collect();
            assert!(matched(&r, &expected, 1e-10), "n = {n}");
        }
    }

    #[test]
    fn roots_with_zero_and_trimmed_coefficients() {
        // z^2 (z - 2) with trailing zeros beyond the true degree.
        let p = [c(0., 0.), c(0., 0.), c(-2., 0.), c(1., 0.), c(0., 0.)];
        let r = poly_roots(&p).unwrap();
        assert!(matched(&r, &[c(0., 0.), c(0., 0.), c(2., 0.)], 1e-14));
        assert!(poly_roots(&[c(3., 0.)]).unwrap().is_empty());
        assert!(poly_roots(&[c(0., 0.), c(0., 0.)]).unwrap().is_empty());
    }

    #[test]
    fn double_roots_on_circle() {
        let z0 = Complex64::from_polar(1.0, 1.1);
        let z1 = Complex64::from_polar(1.0, -2.0);
        // (z - z0)^2 (z - z1)^2 (z - 3j)
        let mut p = vec![c(1., 0.)];
        for r in [z0, z0, z1, z1, c(0., 3.)] {
            let mut next = vec![c(0., 0.); p.len() + 1];
            for (i, &a) in p.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * r;
            }
            p = next;
        }
        let roots = poly_roots(&p).unwrap();
        assert_eq!(roots.len(), 5);
        let near = |z: Complex64| roots.iter().filter(|r| (*r - z).norm() < 1e-6).count();
        assert_eq!(near(z0), 2);
        assert_eq!(near(z1), 2);
        assert_eq!(near(c(0., 3.)), 1);
    }

    #[test]
    fn high_degree_self_reciprocal_polynomial() {
        // Degree 64 with four double roots on the circle and 28 reciprocal
        // pairs off it; an unbalanced scaling of the companion matrix once
        // lost every unit-circle root here.
        let on: Vec<Complex64> = [0.1848, 0.333, 0.5393, 0.6645]
            .iter()
            .map(|&f| Complex64::from_polar(1.0, TAU * f))
            .collect();
        let mut roots_in = Vec::new();
        for &z in &on {
            roots_in.extend([z, z]);
        }
        for k in 0..28 {
            let z = Complex64::from_polar(0.3 + 0.02 * k as f64, 0.7 * k as f64);
            roots_in.extend([z, 1.0 / z.conj()]);
        }
        let mut p = vec![c(1., 0.)];
        for r in roots_in {
            let mut next = vec![c(0., 0.); p.len() + 1];
            for (i, &a) in p.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * r;
            }
            p = next;
        }
        let roots = poly_roots(&p).unwrap();
        assert_eq!(roots.len(), 64);
        for z in on {
            let near = roots.iter().filter(|r| (*r - z).norm() < 1e-5).count();
            assert_eq!(near, 2, "{z}");
        }
    }

    #[test]
    fn general_eigenvalues_of_triangular_and_dense() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(1., 1.),
                c(2., 0.),
                c(0., 3.),
                c(0., 0.),
                c(-2., 0.),
                c(1., 1.),
                c(0., 0.),
                c(0., 0.),
                c(0.5, -0.5),
            ],
        );
        let e = eigenvalues(m).unwrap();
        assert!(matched(&e, &[c(1., 1.), c(-2., 0.), c(0.5, -0.5)], 1e-12));
        // Similarity transform of a known diagonal.
        let d = [c(1., 0.), c(-1., 2.), c(0.3, 0.3), c(4., -1.)];
        let s = CMatrix::from_fn(4, 4, |i, j| {
            let diag = if i == j { 2.0 } else { 0.0 };
            c(((i * 7 + j * 3) % 5) as f64 * 0.1 + diag, (i as f64 - j as f64) * 0.2)
        });
        let sinv = s.clone().try_inverse().unwrap();
        let m = &s * CMatrix::from_diagonal(&CVector::from_vec(d.to_vec())) * sinv;
        let e = eigenvalues(m).unwrap();
        assert!(matched(&e, &d, 1e-9), "{e:?}");
    }

    #[test]
    fn hermitian_eigen_is_sorted_and_reconstructs() {
        let a = CMatrix::from_fn(5, 5, |i, j| c((i + 2 * j) as f64 * 0.3 - 1.0, (i as f64 - j as f64) * 0.7));
        let h = &a + a.adjoint();
        let (vals, vecs) = hermitian_eigen(h.clone());
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = CMatrix::from_diagonal(&CVector::from_iterator(5, vals.iter().map(|&v| c(v, 0.))));
        let back = &vecs * d * vecs.adjoint();
        assert!((back - &h).norm() < 1e-12 * h.norm());
        assert!((min_hermitian_eigenvalue(&h) - vals[0]).abs() < 1e-12);
    }

    #[test]
    fn hermitian_eigen_handles_repeated_eigenvalues() {
        // Rank-one plus identity: eigenvalue 1 with multiplicity 5.
        let v = CVector::from_fn(6, |i, _| c(i as f64 - 2.0, 0.5 * i as f64));
        let h = CMatrix::identity(6, 6) + &v * v.adjoint();
        let (vals, vecs) = hermitian_eigen(h.clone());
        assert!(vals[..5].iter().all(|&x| (x - 1.0).abs() < 1e-12));
        assert!((vecs.adjoint() * &vecs - CMatrix::identity(6, 6)).norm() < 1e-12);
        let d = CMatrix::from_diagonal(&CVector::from_iterator(6, vals.iter().map(|&x| c(x, 0.))));
        assert!((&vecs * d * vecs.adjoint() - h).norm() < 1e-12);
    }

    #[test]
    fn psd_projection_clips_negative_part() {
        let h = CMatrix::from_diagonal(&CVector::from_vec(vec![c(2., 0.), c(-1., 0.), c(0.5, 0.)]));
        let u = CMatrix::from_fn(3, 3, |i, j| c(((i + j) % 3) as f64 - 1.0, (i * j) as f64 * 0.3));
        let (_, q) = hermitian_eigen(&u + u.adjoint());
        let rotated = &q * &h * q.adjoint();
        let expected = &q * CMatrix::from_diagonal(&CVector::from_vec(vec![c(2., 0.), c(0., 0.), c(0.5, 0.)])) * q.adjoint();
        assert!((psd_projection(&rotated) - expected).norm() < 1e-12);
    }

    #[test]
    fn least_squares_overdetermined() {
        let a = CMatrix::from_fn(6, 2, |i, j| c((i as f64).powi(j as i32), 0.0));
        let x = CVector::from_vec(vec![c(1., 2.), c(-0.5, 0.25)]);
        let b = &a * &x;
        let ls = least_squares(&a, &b).unwrap();
        assert!((&ls.solution - &x).norm() < 1e-12);
        assert!(ls.residual < 1e-12);
        assert!(ls.condition().is_finite());
        let empty = least_squares(&CMatrix::zeros(3, 0), &b.rows(0, 3).into_owned()).unwrap();
        assert_eq!(empty.solution.len(), 0);
    }

    proptest! {
        #[test]
        fn hermitian_eigen_reconstructs(re in prop::collection::vec(-1.0f64..1.0, 64),
                                        im in prop::collection::vec(-1.0f64..1.0, 64),
                                        zeros in prop::collection::vec(any::<bool>(), 64)) {
            let a = CMatrix::from_fn(8, 8, |i, j| {
                let k = 8 * i + j;
                if zeros[k] { c(0., 0.) } else { c(re[k], im[k]) }
            });
            let h = &a + a.adjoint();
            let (vals, vecs) = hermitian_eigen(h.clone());
            let d = CMatrix::from_diagonal(&CVector::from_iterator(8, vals.iter().map(|&x| c(x, 0.))));
            prop_assert!((&vecs * d * vecs.adjoint() - &h).norm() <= 1e-12 * h.norm().max(1.0));
            let p = psd_projection(&h);
            let low = min_hermitian_eigenvalue(&p);
            prop_assert!(low >= -1e-12 * h.norm().max(1.0), "{low:e} {:?}", hermitian_eigen(p.clone()).0);
            prop_assert!((psd_projection(&p) - &p).norm() <= 1e-12 * h.norm().max(1.0));
        }

        #[test]
        fn roots_reproduce_polynomial(re in prop::collection::vec(-2.0f64..2.0, 2..12),
                                      im in prop::collection::vec(-2.0f64..2.0, 12)) {
            let mut p: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| c(a, b)).collect();
            let last = p.len() - 1;
            if p[last].norm() < 0.1 {
                p[last] = c(1.0, 0.0);
            }
            let roots = poly_roots(&p).unwrap();
            prop_assert_eq!(roots.len(), last);
            for r in roots {
                let scale: f64 = p.iter().enumerate().map(|(i, a)| a.norm() * r.norm().powi(i as i32)).sum();
                prop_assert!(poly_eval(&p, r).norm() <= 1e-9 * scale);
            }
        }
    }
}
