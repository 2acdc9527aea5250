//! Small dense linear algebra: complex matrices, matrix exponential, LU,
//! symmetric eigenproblems.

use crate::scalar::*;
use std::ops::{Index, IndexMut};

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat<T: Real> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C<T>>,
}

impl<T: Real> Index<(usize, usize)> for CMat<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C<T> {
        &self.data[r * self.cols + c]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CMat<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C<T> {
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![czero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMat { rows, cols, data }
    }

    pub fn diag(d: &[C<T>]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn matmul(&self, b: &CMat<T>) -> CMat<T> {
        assert_eq!(self.cols, b.rows, "matmul shape mismatch");
        let mut out = CMat::zeros(self.rows, b.cols);
        let bc = b.cols;
        for i in 0..self.rows {
            let orow = &mut out.data[i * bc..(i + 1) * bc];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let brow = &b.data[k * bc..(k + 1) * bc];
                for (o, &x) in orow.iter_mut().zip(brow) {
                    *o += a * x;
                }
            }
        }
        out
    }

    pub fn add(&self, b: &CMat<T>) -> CMat<T> {
        assert_eq!((self.rows, self.cols), (b.rows, b.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&b.data).map(|(&x, &y)| x + y).collect(),
        }
    }

    pub fn sub(&self, b: &CMat<T>) -> CMat<T> {
        assert_eq!((self.rows, self.cols), (b.rows, b.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&b.data).map(|(&x, &y)| x - y).collect(),
        }
    }

    pub fn add_assign(&mut self, b: &CMat<T>) {
        for (x, &y) in self.data.iter_mut().zip(&b.data) {
            *x += y;
        }
    }

    pub fn axpy(&mut self, a: C<T>, b: &CMat<T>) {
        for (x, &y) in self.data.iter_mut().zip(&b.data) {
            *x += a * y;
        }
    }

    pub fn scale(&self, a: C<T>) -> CMat<T> {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| a * x).collect() }
    }

    pub fn scale_re(&self, a: T) -> CMat<T> {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * a).collect() }
    }

    pub fn transpose(&self) -> CMat<T> {
        CMat::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> CMat<T> {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.conj()).collect() }
    }

    pub fn adjoint(&self) -> CMat<T> {
        CMat::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    /// `self * b - b * self`.
    pub fn commutator(&self, b: &CMat<T>) -> CMat<T> {
        self.matmul(b).sub(&b.matmul(self))
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.norm()))
    }

    pub fn norm_fro(&self) -> T {
        self.data.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt()
    }

    /// Induced 1-norm (max column sum).
    pub fn norm1(&self) -> T {
        let mut best = T::zero();
        for c in 0..self.cols {
            let s: T = (0..self.rows).map(|r| self[(r, c)].norm()).sum();
            best = best.max(s);
        }
        best
    }

    /// Sum of entry moduli.
    pub fn entry_l1(&self) -> T {
        self.data.iter().map(|x| x.norm()).sum()
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMat<T> {
        CMat::from_fn(rows, cols, |r, c| self[(r0 + r, c0 + c)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &CMat<T>) {
        for r in 0..b.rows {
            for c in 0..b.cols {
                self[(r0 + r, c0 + c)] = b[(r, c)];
            }
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let row = &self.data[r * self.cols..(r + 1) * self.cols];
                row.iter().zip(v).fold(czero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// Solve `self * X = b` by LU with partial pivoting.
    pub fn solve(&self, b: &CMat<T>) -> Result<CMat<T>, LinalgError> {
        let lu = Lu::factor(self)?;
        Ok(lu.solve(b))
    }

    pub fn inverse(&self) -> Result<CMat<T>, LinalgError> {
        self.solve(&CMat::identity(self.rows))
    }

    /// Matrix exponential by scaling and squaring with Padé approximants.
    pub fn expm(&self) -> CMat<T> {
        expm(self)
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular to working precision")]
    Singular,
}

/// LU factorisation with partial pivoting.
pub struct Lu<T: Real> {
    lu: CMat<T>,
    piv: Vec<usize>,
}

impl<T: Real> Lu<T> {
    pub fn factor(a: &CMat<T>) -> Result<Self, LinalgError> {
        assert!(a.is_square());
        let n = a.rows;
        let mut lu = a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for r in k + 1..n {
                let v = lu[(r, k)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= scale * T::eps() * from_usize::<T>(n) * cst(1e-3) || best == T::zero() {
                return Err(LinalgError::Singular);
            }
            if p != k {
                for c in 0..n {
                    lu.data.swap(k * n + c, p * n + c);
                }
                piv.swap(k, p);
            }
            let d = lu[(k, k)];
            for r in k + 1..n {
                let f = lu[(r, k)] / d;
                lu[(r, k)] = f;
                if f.re == T::zero() && f.im == T::zero() {
                    continue;
                }
                for c in k + 1..n {
                    let u = lu[(k, c)];
                    lu[(r, c)] -= f * u;
                }
            }
        }
        Ok(Lu { lu, piv })
    }

    pub fn solve(&self, b: &CMat<T>) -> CMat<T> {
        let n = self.lu.rows;
        assert_eq!(b.rows, n);
        let mut x = CMat::from_fn(n, b.cols, |r, c| b[(self.piv[r], c)]);
        for c in 0..b.cols {
            for r in 0..n {
                let mut s = x[(r, c)];
                for k in 0..r {
                    s -= self.lu[(r, k)] * x[(k, c)];
                }
                x[(r, c)] = s;
            }
            for r in (0..n).rev() {
                let mut s = x[(r, c)];
                for k in r + 1..n {
                    s -= self.lu[(r, k)] * x[(k, c)];
                }
                x[(r, c)] = s / self.lu[(r, r)];
            }
        }
        x
    }
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [f64; 5] = [1.495585217958292e-2, 2.539398330063230e-1, 9.504178996162932e-1, 2.097847961257068, 5.371920351148152];

fn pade_low<T: Real>(a: &CMat<T>, b: &[f64]) -> (CMat<T>, CMat<T>) {
    let n = a.rows;
    let a2 = a.matmul(a);
    let mut pow = CMat::identity(n);
    let mut u = CMat::zeros(n, n);
    let mut v = CMat::zeros(n, n);
    let m = b.len() - 1;
    for j in 0..=m / 2 {
        v.axpy(cplx(cst(b[2 * j]), T::zero()), &pow);
        if 2 * j + 1 <= m {
            u.axpy(cplx(cst(b[2 * j + 1]), T::zero()), &pow);
        }
        if j < m / 2 {
            pow = pow.matmul(&a2);
        }
    }
    (a.matmul(&u), v)
}

fn pade13<T: Real>(a: &CMat<T>) -> (CMat<T>, CMat<T>) {
    let n = a.rows;
    let b = |i: usize| cplx::<T>(cst(PADE13[i]), T::zero());
    let id = CMat::identity(n);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let mut inner_u = a6.scale(b(13));
    inner_u.axpy(b(11), &a4);
    inner_u.axpy(b(9), &a2);
    let mut u = a6.matmul(&inner_u);
    u.axpy(b(7), &a6);
    u.axpy(b(5), &a4);
    u.axpy(b(3), &a2);
    u.axpy(b(1), &id);
    let u = a.matmul(&u);
    let mut inner_v = a6.scale(b(12));
    inner_v.axpy(b(10), &a4);
    inner_v.axpy(b(8), &a2);
    let mut v = a6.matmul(&inner_v);
    v.axpy(b(6), &a6);
    v.axpy(b(4), &a4);
    v.axpy(b(2), &a2);
    v.axpy(b(0), &id);
    (u, v)
}

/// Matrix exponential (Higham scaling and squaring, Padé degrees 3..13).
pub fn expm<T: Real>(a: &CMat<T>) -> CMat<T> {
    assert!(a.is_square());
    let n = a.rows;
    if n == 0 {
        return a.clone();
    }
    let nrm: f64 = a.norm1().to_f64().unwrap_or(f64::INFINITY);
    if nrm == 0.0 {
        return CMat::identity(n);
    }
    let (u, v, s) = if nrm <= THETA[0] {
        let (u, v) = pade_low(a, &PADE3);
        (u, v, 0)
    } else if nrm <= THETA[1] {
        let (u, v) = pade_low(a, &PADE5);
        (u, v, 0)
    } else if nrm <= THETA[2] {
        let (u, v) = pade_low(a, &PADE7);
        (u, v, 0)
    } else if nrm <= THETA[3] {
        let (u, v) = pade_low(a, &PADE9);
        (u, v, 0)
    } else {
        let s = ((nrm / THETA[4]).log2().ceil()).max(0.0) as i32;
        let scaled = a.scale_re(cst::<T>(2f64.powi(-s)));
        let (u, v) = pade13(&scaled);
        (u, v, s)
    };
    let p = v.add(&u);
    let q = v.sub(&u);
    let mut r = q.solve(&p).expect("Pade denominator is nonsingular");
    for _ in 0..s {
        r = r.matmul(&r);
    }
    r
}

/// Eigen-decomposition of a real symmetric matrix (row-major `a`, size `n`)
/// by cyclic Jacobi rotations. Returns ascending eigenvalues and the
/// eigenvectors as columns: `vecs[i * n + j]` is component `i` of vector `j`.
pub fn sym_eigen<T: Real>(a: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let two = cst::<T>(2.0);
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut diag = T::zero();
        for p in 0..n {
            diag += m[p * n + p] * m[p * n + p];
            for q in p + 1..n {
                off += m[p * n + q] * m[p * n + q];
            }
        }
        if off <= T::eps() * T::eps() * diag * cst(1e-4) || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let t = if theta == T::zero() { T::one() } else { t };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].partial_cmp(&m[j * n + j]).unwrap());
    let vals = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vecs = vec![T::zero(); n * n];
    for (jn, &jo) in order.iter().enumerate() {
        for i in 0..n {
            vecs[i * n + jn] = v[i * n + jo];
        }
    }
    (vals, vecs)
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e[i]` couples `i` and `i+1`), by implicit QL.
pub fn tridiag_eigenvalues<T: Real>(d: &[T], e: &[T]) -> Vec<T> {
    let n = d.len();
    let mut d = d.to_vec();
    let mut e: Vec<T> = e.iter().cloned().chain(std::iter::once(T::zero())).take(n).collect();
    if e.len() < n {
        e.resize(n, T::zero());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::eps() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (cst::<T>(2.0) * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + cst::<T>(2.0) * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C<f64> {
        cplx(re, im)
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 1.3;
        let a = CMat::from_fn(2, 2, |r, cc| match (r, cc) {
            (0, 1) => c(-t, 0.0),
            (1, 0) => c(t, 0.0),
            _ => c(0.0, 0.0),
        });
        let e = a.expm();
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-14);
        assert!((e[(1, 0)].re - t.sin()).abs() < 1e-14);
    }

    #[test]
    fn expm_diagonal_large_norm() {
        let a = CMat::diag(&[c(0.0, 40.0), c(-3.0, 0.0), c(2.5, 1.0)]);
        let e = a.expm();
        for i in 0..3 {
            let want = a[(i, i)].exp();
            assert!((e[(i, i)] - want).norm() <= 1e-12 * want.norm().max(1.0));
        }
    }

    #[test]
    fn expm_matches_series_for_small_matrix() {
        let a = CMat::from_fn(4, 4, |r, cc| c(0.01 * (r as f64 - cc as f64), 0.02 * (r * cc) as f64));
        let mut term = CMat::identity(4);
        let mut sum = CMat::identity(4);
        for k in 1..30 {
            term = term.matmul(&a).scale_re(1.0 / k as f64);
            sum.add_assign(&term);
        }
        assert!(a.expm().sub(&sum).max_abs() < 1e-15);
    }

    #[test]
    fn lu_solves() {
        let a = CMat::from_fn(5, 5, |r, cc| c(1.0 / (1.0 + r as f64 + cc as f64), if r == cc { 1.0 } else { 0.0 }));
        let x = CMat::from_fn(5, 1, |r, _| c(r as f64, -1.0));
        let b = a.matmul(&x);
        let y = a.solve(&b).unwrap();
        assert!(y.sub(&x).max_abs() < 1e-12);
    }

    #[test]
    fn jacobi_matches_tridiagonal() {
        let n = 8;
        let d: Vec<f64> = (0..n).map(|i| i as f64 * 0.3).collect();
        let e: Vec<f64> = (1..n).map(|i| (i as f64 / 2.0).sqrt()).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = d[i];
            if i + 1 < n {
                a[i * n + i + 1] = e[i];
                a[(i + 1) * n + i] = e[i];
            }
        }
        let (vals, vecs) = sym_eigen(&a, n);
        let tv = tridiag_eigenvalues(&d, &e);
        for i in 0..n {
            assert!((vals[i] - tv[i]).abs() < 1e-12);
            // A v = lambda v
            for r in 0..n {
                let av: f64 = (0..n).map(|k| a[r * n + k] * vecs[k * n + i]).sum();
                assert!((av - vals[i] * vecs[r * n + i]).abs() < 1e-12);
            }
        }
    }
}
