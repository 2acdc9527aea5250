//! Uniform angle grids on the torus and Fourier transforms of matrix-valued
//! functions sampled on them.

use crate::linalg::CMat;
use crate::scalar::*;
use rustfft::FftPlanner;
use std::collections::BTreeMap;

/// Tensor grid with `points` samples per angle, `theta = 2 pi g / points`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThetaGrid {
    pub n: usize,
    pub points: usize,
}

impl ThetaGrid {
    pub fn new(n: usize, points: usize) -> Self {
        assert!(points >= 1);
        ThetaGrid { n, points }
    }

    /// Oversampled grid `2 (2K + 1)` for cutoff `K`.
    pub fn for_cutoff(n: usize, cutoff: usize) -> Self {
        ThetaGrid::new(n, 2 * (2 * cutoff + 1))
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for o in out.iter_mut() {
            *o = idx % self.points;
            idx /= self.points;
        }
        out
    }

    pub fn theta<T: Real>(&self, idx: usize) -> Vec<T> {
        let step = T::PI() * cst(2.0) / from_usize::<T>(self.points);
        self.multi_index(idx).into_iter().map(|g| step * from_usize::<T>(g)).collect()
    }

    /// Largest cutoff the grid resolves without aliasing.
    pub fn max_cutoff(&self) -> usize {
        (self.points - 1) / 2
    }

    fn wrap(&self, k: i32) -> usize {
        k.rem_euclid(self.points as i32) as usize
    }

    fn unwrap(&self, g: usize) -> i32 {
        let p = self.points as i32;
        let g = g as i32;
        if g > p / 2 {
            g - p
        } else {
            g
        }
    }
}

/// n-dimensional FFT in place over the grid layout (axis 0 fastest).
fn fft_nd<T: Real>(grid: &ThetaGrid, data: &mut [C<T>], inverse: bool) {
    let p = grid.points;
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse { planner.plan_fft_inverse(p) } else { planner.plan_fft_forward(p) };
    let mut buf = vec![czero::<T>(); p];
    let total = grid.len();
    let mut stride = 1;
    for _axis in 0..grid.n {
        for base in 0..total {
            if (base / stride) % p != 0 {
                continue;
            }
            for (i, b) in buf.iter_mut().enumerate() {
                *b = data[base + i * stride];
            }
            fft.process(&mut buf);
            for (i, b) in buf.iter().enumerate() {
                data[base + i * stride] = *b;
            }
        }
        stride *= p;
    }
}

/// Grid values of `sum_k c_k e^{i k.theta}`.
pub fn fourier_to_grid<T: Real>(grid: &ThetaGrid, coeffs: &[(Vec<i32>, C<T>)]) -> Vec<C<T>> {
    let mut data = vec![czero::<T>(); grid.len()];
    for (k, c) in coeffs {
        let mut idx = 0;
        let mut stride = 1;
        for &ki in k.iter() {
            idx += grid.wrap(ki) * stride;
            stride *= grid.points;
        }
        data[idx] += *c;
    }
    fft_nd(grid, &mut data, true);
    data
}

/// Fourier coefficients with `|k|_inf <= cutoff` of grid samples, plus the
/// l1 mass of the resolved coefficients beyond the cutoff.
pub fn grid_to_fourier<T: Real>(grid: &ThetaGrid, samples: &[C<T>], cutoff: usize) -> (Vec<(Vec<i32>, C<T>)>, T) {
    assert_eq!(samples.len(), grid.len());
    let mut data = samples.to_vec();
    fft_nd(grid, &mut data, false);
    let scale = T::one() / from_usize::<T>(grid.len());
    let mut out = Vec::new();
    let mut lost = T::zero();
    for (idx, v) in data.iter().enumerate() {
        let k: Vec<i32> = grid.multi_index(idx).into_iter().map(|g| grid.unwrap(g)).collect();
        let c = *v * scale;
        if k.iter().all(|x| x.unsigned_abs() as usize <= cutoff) {
            out.push((k, c));
        } else {
            lost += c.norm();
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    (out, lost)
}

/// Matrix-valued trigonometric polynomial `sum_k M_k e^{i k.theta}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFamily<T: Real> {
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    pub coeffs: BTreeMap<Vec<i32>, CMat<T>>,
}

impl<T: Real> MatrixFamily<T> {
    pub fn zeros(n: usize, rows: usize, cols: usize) -> Self {
        MatrixFamily { n, rows, cols, coeffs: BTreeMap::new() }
    }

    pub fn constant(n: usize, m: CMat<T>) -> Self {
        let mut f = Self::zeros(n, m.rows, m.cols);
        f.coeffs.insert(vec![0; n], m);
        f
    }

    pub fn max_k(&self) -> usize {
        self.coeffs.keys().map(|k| k.iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0)).max().unwrap_or(0)
    }

    pub fn entry_mut(&mut self, k: Vec<i32>) -> &mut CMat<T> {
        let (r, c) = (self.rows, self.cols);
        self.coeffs.entry(k).or_insert_with(|| CMat::zeros(r, c))
    }

    /// Value at a real angle by direct summation.
    pub fn eval(&self, theta: &[T]) -> CMat<T> {
        let mut out = CMat::zeros(self.rows, self.cols);
        for (k, m) in &self.coeffs {
            let ph: T = k.iter().zip(theta).map(|(&a, &t)| from_i64::<T>(a as i64) * t).sum();
            out.axpy(cplx(ph.cos(), ph.sin()), m);
        }
        out
    }

    /// Derivative in angle `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zeros(self.n, self.rows, self.cols);
        for (k, m) in &self.coeffs {
            if k[i] != 0 {
                out.coeffs.insert(k.clone(), m.scale(cplx(T::zero(), from_i64::<T>(k[i] as i64))));
            }
        }
        out
    }

    pub fn to_grid(&self, grid: &ThetaGrid) -> Vec<CMat<T>> {
        let len = grid.len();
        let mut out = vec![CMat::zeros(self.rows, self.cols); len];
        for r in 0..self.rows {
            for c in 0..self.cols {
                let cs: Vec<(Vec<i32>, C<T>)> = self
                    .coeffs
                    .iter()
                    .filter(|(_, m)| m[(r, c)] != czero())
                    .map(|(k, m)| (k.clone(), m[(r, c)]))
                    .collect();
                if cs.is_empty() {
                    continue;
                }
                let vals = fourier_to_grid(grid, &cs);
                for (o, v) in out.iter_mut().zip(vals) {
                    o[(r, c)] = v;
                }
            }
        }
        out
    }

    /// Fourier coefficients of grid samples; returns the family truncated at
    /// `cutoff` and the l1 mass of the resolved coefficients dropped.
    pub fn from_grid(grid: &ThetaGrid, samples: &[CMat<T>], cutoff: usize) -> (Self, T) {
        assert_eq!(samples.len(), grid.len());
        let (rows, cols) = (samples[0].rows, samples[0].cols);
        let mut fam = Self::zeros(grid.n, rows, cols);
        let mut lost = T::zero();
        for r in 0..rows {
            for c in 0..cols {
                let vals: Vec<C<T>> = samples.iter().map(|m| m[(r, c)]).collect();
                if vals.iter().all(|v| *v == czero()) {
                    continue;
                }
                let (cs, l) = grid_to_fourier(grid, &vals, cutoff);
                lost += l;
                for (k, v) in cs {
                    if v != czero() {
                        fam.entry_mut(k)[(r, c)] = v;
                    }
                }
            }
        }
        (fam, lost)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_scalar() {
        let grid = ThetaGrid::new(2, 10);
        let cs = vec![(vec![1, -2], cplx(0.5, 0.25)), (vec![0, 0], cplx(1.0, 0.0)), (vec![-3, 4], cplx(0.0, -2.0))];
        let vals = fourier_to_grid::<f64>(&grid, &cs);
        // direct check at one point
        let th = grid.theta::<f64>(37);
        let direct: C<f64> = cs
            .iter()
            .map(|(k, c)| {
                let ph = k[0] as f64 * th[0] + k[1] as f64 * th[1];
                c * cplx(ph.cos(), ph.sin())
            })
            .sum();
        assert!((vals[37] - direct).norm() < 1e-13);
        let (back, lost) = grid_to_fourier(&grid, &vals, 4);
        assert!(lost < 1e-13);
        for (k, c) in &cs {
            let got = back.iter().find(|(kk, _)| kk == k).unwrap().1;
            assert!((got - c).norm() < 1e-13);
        }
    }

    #[test]
    fn matrix_family_round_trip() {
        let mut f = MatrixFamily::<f64>::zeros(1, 2, 2);
        f.entry_mut(vec![1])[(0, 1)] = cplx(0.3, 0.1);
        f.entry_mut(vec![-2])[(1, 0)] = cplx(-0.2, 0.0);
        let g = ThetaGrid::for_cutoff(1, 2);
        let s = f.to_grid(&g);
        let th = g.theta::<f64>(3);
        assert!(s[3].sub(&f.eval(&th)).max_abs() < 1e-14);
        let (back, lost) = MatrixFamily::from_grid(&g, &s, 2);
        assert!(lost < 1e-14);
        for (k, m) in &f.coeffs {
            assert!(back.coeffs[k].sub(m).max_abs() < 1e-14);
        }
    }
}
