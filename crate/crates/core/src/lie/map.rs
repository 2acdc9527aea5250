use super::generator::{decompose, parts_to_taylor, QuadraticGenerator};
use super::LieError;
use crate::algebra::TaylorHamiltonian;
use crate::grid::{MatrixFamily, ThetaGrid};
use crate::linalg::CMat;
use crate::ode::{integrate, OdeOptions};
use crate::scalar::*;
use rayon::prelude::*;
use std::io::{self, Write};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowMode {
    /// Matrix exponential per grid point; needs `b1 = 0`.
    ExactQuadratic,
    /// Adaptive integration of the full flow.
    Ode,
}

/// The map `(theta, y, Z) -> (theta', Y y + 1/2 Z.M Z + ylz Z + y0, L Z + w)`
/// sampled on an angle grid. `Z` holds `(z, zbar)`.
#[derive(Clone, Debug)]
pub struct SymplecticMap<T: Real> {
    pub n: usize,
    pub modes: usize,
    pub grid: ThetaGrid,
    pub theta_map: Vec<Vec<T>>,
    pub l: Vec<CMat<T>>,
    pub translation: Vec<Vec<C<T>>>,
    /// `m[g][i]` is the symmetric quadratic y-shift of action `i`.
    pub m: Vec<Vec<CMat<T>>>,
    pub y_linear: Vec<CMat<T>>,
    /// `n x 2J` linear-in-Z part of the y-shift.
    pub y_lin: Vec<CMat<T>>,
    pub y_offset: Vec<Vec<C<T>>>,
}

/// `J_c = [[0, iI], [-iI, 0]]`, so that `Zdot = J_c grad F`.
pub fn structure_matrix<T: Real>(modes: usize) -> CMat<T> {
    let mut j = CMat::zeros(2 * modes, 2 * modes);
    for a in 0..modes {
        j[(a, modes + a)] = ci();
        j[(modes + a, a)] = -ci::<T>();
    }
    j
}

fn jc_times<T: Real>(m: &CMat<T>, modes: usize) -> CMat<T> {
    let mut out = CMat::zeros(m.rows, m.cols);
    let i = ci::<T>();
    for c in 0..m.cols {
        for a in 0..modes {
            out[(a, c)] = i * m[(modes + a, c)];
            out[(modes + a, c)] = -i * m[(a, c)];
        }
    }
    out
}

fn gauss_legendre<T: Real>(m: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![T::zero(); m];
    let mut w = vec![T::zero(); m];
    let two = cst::<T>(2.0);
    for i in 0..m {
        let mut z = (T::PI() * (from_usize::<T>(i) + cst(0.75)) / (from_usize::<T>(m) + cst(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (mut p0, mut p1) = (T::one(), z);
            for k in 2..=m {
                let kf = from_usize::<T>(k);
                let p2 = ((two * kf - T::one()) * z * p1 - (kf - T::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = from_usize::<T>(m) * (z * p1 - p0) / (z * z - T::one());
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() <= T::epsilon() {
                break;
            }
        }
        x[i] = (T::one() - z) / two;
        w[i] = T::one() / ((T::one() - z * z) * dp * dp);
    }
    (x, w)
}

impl<T: Real> SymplecticMap<T> {
    pub fn identity(n: usize, modes: usize, grid: ThetaGrid) -> Self {
        let len = grid.len();
        SymplecticMap {
            n,
            modes,
            grid,
            theta_map: (0..len).map(|g| grid.theta(g)).collect(),
            l: vec![CMat::identity(2 * modes); len],
            translation: vec![vec![czero(); 2 * modes]; len],
            m: vec![vec![CMat::zeros(2 * modes, 2 * modes); n]; len],
            y_linear: vec![CMat::identity(n); len],
            y_lin: vec![CMat::zeros(n, 2 * modes); len],
            y_offset: vec![vec![czero(); n]; len],
        }
    }

    pub fn is_theta_identity(&self) -> bool {
        (0..self.grid.len()).all(|g| self.theta_map[g] == self.grid.theta::<T>(g))
    }

    fn is_y_identity(&self) -> bool {
        let id = CMat::identity(self.n);
        self.y_linear.iter().all(|y| *y == id)
    }

    /// `max_g |L^T J_c L - J_c|`, with the grid point where it is attained.
    pub fn symplectic_defect(&self) -> (T, usize) {
        let jc = structure_matrix::<T>(self.modes);
        let mut worst = (T::zero(), 0);
        for (g, l) in self.l.iter().enumerate() {
            let d = l.transpose().matmul(&jc).matmul(l).sub(&jc).max_abs();
            if d > worst.0 || d.is_nan() {
                worst = (d, g);
            }
        }
        worst
    }

    /// True when `theta` and `y`'s linear part are fixed and there is no
    /// Z-translation or Z-linear y-shift.
    pub fn is_quadratic_class(&self, tol: T) -> bool {
        self.is_theta_identity()
            && self.is_y_identity()
            && self.translation.iter().flatten().all(|v| v.norm() <= tol)
            && self.y_lin.iter().all(|m| m.max_abs() <= tol)
    }

    /// Image of `(theta_g, y, Z)`.
    pub fn apply(&self, g: usize, y: &[C<T>], z: &[C<T>]) -> (Vec<T>, Vec<C<T>>, Vec<C<T>>) {
        let mut znew = self.l[g].apply(z);
        for (a, b) in znew.iter_mut().zip(&self.translation[g]) {
            *a += *b;
        }
        let lin = self.y_lin[g].apply(z);
        let yl = self.y_linear[g].apply(y);
        let half = cst::<T>(0.5);
        let ynew = (0..self.n)
            .map(|i| {
                let mz = self.m[g][i].apply(z);
                let q: C<T> = z.iter().zip(&mz).map(|(a, b)| a * b).sum();
                yl[i] + q * half + lin[i] + self.y_offset[g][i]
            })
            .collect();
        (self.theta_map[g].clone(), ynew, znew)
    }

    /// Fourier coefficients of `L` up to `cutoff`, and the dropped mass.
    pub fn l_fourier(&self, cutoff: usize) -> (MatrixFamily<T>, T) {
        MatrixFamily::from_grid(&self.grid, &self.l, cutoff)
    }
}

struct PointData<T: Real> {
    hess: CMat<T>,
    a: CMat<T>,
    d_hess: Vec<CMat<T>>,
    d_a: Vec<CMat<T>>,
    d_b0: Vec<C<T>>,
}

struct Derivs<T: Real> {
    d_hess: Vec<MatrixFamily<T>>,
    d_a: Vec<MatrixFamily<T>>,
    d_b0: Vec<MatrixFamily<T>>,
    d_b1: Vec<MatrixFamily<T>>,
}

fn derivs<T: Real>(gen: &QuadraticGenerator<T>) -> Derivs<T> {
    let n = gen.n;
    Derivs {
        d_hess: (0..n).map(|i| gen.hess.derivative(i)).collect(),
        d_a: (0..n).map(|i| gen.a.derivative(i)).collect(),
        d_b0: (0..n).map(|i| gen.b0.derivative(i)).collect(),
        d_b1: (0..n).map(|i| gen.b1.derivative(i)).collect(),
    }
}

pub fn time_one_map<T: Real>(gen: &QuadraticGenerator<T>, mode: FlowMode) -> Result<SymplecticMap<T>, LieError> {
    let map = match mode {
        FlowMode::ExactQuadratic => {
            if !gen.is_y_independent() {
                return Err(LieError::YDependent);
            }
            exact_map(gen)
        }
        FlowMode::Ode => ode_map(gen)?,
    };
    let (defect, point) = map.symplectic_defect();
    if !(defect <= cst(1e-8)) {
        return Err(LieError::Symplecticity { defect: defect.to_f64().unwrap_or(f64::NAN), point });
    }
    Ok(map)
}

fn exact_map<T: Real>(gen: &QuadraticGenerator<T>) -> SymplecticMap<T> {
    let (n, jm, grid) = (gen.n, gen.modes, gen.grid);
    let d = 2 * jm;
    let dv = derivs(gen);
    let hess = gen.hess.to_grid(&grid);
    let a = gen.a.to_grid(&grid);
    let grids = |fs: &[MatrixFamily<T>]| -> Vec<Vec<CMat<T>>> { fs.iter().map(|f| f.to_grid(&grid)).collect() };
    let dh = grids(&dv.d_hess);
    let da = grids(&dv.d_a);
    let db = grids(&dv.d_b0);
    let has_shift = dv.d_hess.iter().chain(&dv.d_a).chain(&dv.d_b0).any(|f| !f.coeffs.is_empty());
    let points: Vec<PointData<T>> = (0..grid.len())
        .map(|g| PointData {
            hess: hess[g].clone(),
            a: a[g].clone(),
            d_hess: dh.iter().map(|v| v[g].clone()).collect(),
            d_a: da.iter().map(|v| v[g].clone()).collect(),
            d_b0: db.iter().map(|v| v[g][(0, 0)]).collect(),
        })
        .collect();
    let results: Vec<_> = points.par_iter().map(|p| exact_point(p, n, jm, has_shift)).collect();
    let mut map = SymplecticMap::identity(n, jm, grid);
    for (g, (l, w, m, yl, yo)) in results.into_iter().enumerate() {
        map.l[g] = l;
        map.translation[g] = w;
        map.m[g] = m;
        map.y_lin[g] = yl;
        map.y_offset[g] = yo;
    }
    debug_assert_eq!(map.l[0].rows, d);
    map
}

type PointMap<T> = (CMat<T>, Vec<C<T>>, Vec<CMat<T>>, CMat<T>, Vec<C<T>>);

fn augmented<T: Real>(p: &PointData<T>, jm: usize, t: T) -> CMat<T> {
    let d = 2 * jm;
    let x = jc_times(&p.hess, jm);
    let ja = jc_times(&p.a, jm);
    let mut aug = CMat::zeros(d + 1, d + 1);
    aug.set_block(0, 0, &x.scale_re(t));
    aug.set_block(0, d, &ja.scale_re(t));
    aug
}

fn exact_point<T: Real>(p: &PointData<T>, n: usize, jm: usize, has_shift: bool) -> PointMap<T> {
    let d = 2 * jm;
    let e1 = augmented(p, jm, T::one()).expm();
    let l = e1.block(0, 0, d, d);
    let w: Vec<C<T>> = (0..d).map(|r| e1[(r, d)]).collect();
    let mut m = vec![CMat::zeros(d, d); n];
    let mut yl = CMat::zeros(n, d);
    let mut yo = vec![czero(); n];
    if has_shift {
        let norm = augmented(p, jm, T::one()).norm1();
        let pieces = norm.to_f64().unwrap_or(1.0).ceil().max(1.0) as usize;
        let (xs, ws) = gauss_legendre::<T>(10);
        let h = T::one() / from_usize::<T>(pieces);
        let half = cst::<T>(0.5);
        for s in 0..pieces {
            for (x, wq) in xs.iter().zip(&ws) {
                let t = (from_usize::<T>(s) + *x) * h;
                let wt = *wq * h;
                let et = augmented(p, jm, t).expm();
                let e = et.block(0, 0, d, d);
                let phi = et.block(0, d, d, 1);
                let et_t = e.transpose();
                for i in 0..n {
                    let dh = &p.d_hess[i];
                    let dhe = dh.matmul(&e);
                    m[i].axpy(cplx(-wt, T::zero()), &et_t.matmul(&dhe));
                    let row = phi.transpose().matmul(&dhe).add(&p.d_a[i].transpose().matmul(&e));
                    for c in 0..d {
                        yl[(i, c)] -= row[(0, c)] * wt;
                    }
                    let lin: C<T> = (0..d).map(|r| p.d_a[i][(r, 0)] * phi[(r, 0)]).sum();
                    let quad = phi.transpose().matmul(&dh.matmul(&phi))[(0, 0)];
                    yo[i] -= (p.d_b0[i] + lin + quad * half) * wt;
                }
            }
        }
        for mi in m.iter_mut() {
            *mi = mi.add(&mi.transpose()).scale_re(half);
        }
    }
    (l, w, m, yl, yo)
}

fn ode_map<T: Real>(gen: &QuadraticGenerator<T>) -> Result<SymplecticMap<T>, LieError> {
    let (n, jm, grid) = (gen.n, gen.modes, gen.grid);
    let d = 2 * jm;
    let dv = derivs(gen);
    let (o_th, o_e, o_phi, o_y, o_m) = (0, n, n + d * d, n + d * d + d, n + d * d + d + n * n);
    let o_yl = o_m + n * d * d;
    let o_yo = o_yl + n * d;
    let size = o_yo + n;
    let opts = OdeOptions::tol(cst::<T>(1e-11));
    let half = cst::<T>(0.5);
    let rhs = |_t: T, s: &[C<T>], ds: &mut [C<T>]| {
        let th: Vec<T> = s[o_th..o_th + n].iter().map(|v| v.re).collect();
        let b1 = gen.b1.eval(&th);
        let hess = gen.hess.eval(&th);
        let a = gen.a.eval(&th);
        let bm: Vec<CMat<T>> = dv.d_b1.iter().map(|f| f.eval(&th)).collect();
        let e = CMat::from_fn(d, d, |r, c| s[o_e + r * d + c]);
        let phi = CMat::from_fn(d, 1, |r, _| s[o_phi + r]);
        for i in 0..n {
            ds[o_th + i] = cplx(b1[(i, 0)].re, T::zero());
        }
        let de = jc_times(&hess.matmul(&e), jm);
        let dphi = jc_times(&a.add(&hess.matmul(&phi)), jm);
        for r in 0..d {
            for c in 0..d {
                ds[o_e + r * d + c] = de[(r, c)];
            }
            ds[o_phi + r] = dphi[(r, 0)];
        }
        let et = e.transpose();
        for i in 0..n {
            let dh = dv.d_hess[i].eval(&th);
            let da = dv.d_a[i].eval(&th);
            let db0 = dv.d_b0[i].eval(&th)[(0, 0)];
            let dhe = dh.matmul(&e);
            let src_m = et.matmul(&dhe);
            let src_l = phi.transpose().matmul(&dhe).add(&da.transpose().matmul(&e));
            let lin: C<T> = (0..d).map(|r| da[(r, 0)] * phi[(r, 0)]).sum();
            let src_o = db0 + lin + phi.transpose().matmul(&dh.matmul(&phi))[(0, 0)] * half;
            for c in 0..n {
                let mut acc = czero::<T>();
                for j in 0..n {
                    acc += bm[i][(j, 0)] * s[o_y + j * n + c];
                }
                ds[o_y + i * n + c] = -acc;
            }
            for r in 0..d {
                for c in 0..d {
                    let mut acc = src_m[(r, c)];
                    for j in 0..n {
                        acc += bm[i][(j, 0)] * s[o_m + j * d * d + r * d + c];
                    }
                    ds[o_m + i * d * d + r * d + c] = -acc;
                }
                let mut acc = src_l[(0, r)];
                for j in 0..n {
                    acc += bm[i][(j, 0)] * s[o_yl + j * d + r];
                }
                ds[o_yl + i * d + r] = -acc;
            }
            let mut acc = src_o;
            for j in 0..n {
                acc += bm[i][(j, 0)] * s[o_yo + j];
            }
            ds[o_yo + i] = -acc;
        }
    };
    let mut map = SymplecticMap::identity(n, jm, grid);
    for g in 0..grid.len() {
        let mut s0 = vec![czero::<T>(); size];
        for (i, t) in grid.theta::<T>(g).into_iter().enumerate() {
            s0[o_th + i] = cplx(t, T::zero());
        }
        for r in 0..d {
            s0[o_e + r * d + r] = cone();
        }
        for i in 0..n {
            s0[o_y + i * n + i] = cone();
        }
        let (sol, _) = integrate(rhs, T::zero(), &s0, &[T::one()], &opts)?;
        let s = &sol[0];
        map.theta_map[g] = s[o_th..o_th + n].iter().map(|v| v.re).collect();
        map.l[g] = CMat::from_fn(d, d, |r, c| s[o_e + r * d + c]);
        map.translation[g] = s[o_phi..o_phi + d].to_vec();
        map.y_linear[g] = CMat::from_fn(n, n, |r, c| s[o_y + r * n + c]);
        map.m[g] = (0..n)
            .map(|i| {
                let mi = CMat::from_fn(d, d, |r, c| s[o_m + i * d * d + r * d + c]);
                mi.add(&mi.transpose()).scale_re(half)
            })
            .collect();
        map.y_lin[g] = CMat::from_fn(n, d, |i, r| s[o_yl + i * d + r]);
        map.y_offset[g] = s[o_yo..o_yo + n].to_vec();
    }
    Ok(map)
}

/// `H o Phi` for `H` of weighted degree `<= 2` affine in `y`, truncated at
/// `cutoff`. Returns the result and the l1 mass of dropped Fourier modes.
pub fn compose<T: Real>(
    h: &TaylorHamiltonian<T>,
    phi: &SymplecticMap<T>,
    cutoff: usize,
) -> Result<(TaylorHamiltonian<T>, T), LieError> {
    if h.n != phi.n || h.modes != phi.modes {
        return Err(LieError::Dimension(format!(
            "Hamiltonian (n, J) = ({}, {}) vs map ({}, {})",
            h.n, h.modes, phi.n, phi.modes
        )));
    }
    let grid = phi.grid;
    if grid.points < 2 * cutoff + 1 {
        return Err(LieError::GridTooCoarse { points: grid.points, cutoff });
    }
    let parts = decompose(h, ThetaGrid::new(h.n, grid.points.max(2 * h.max_k() + 1)))?;
    let (n, jm) = (h.n, h.modes);
    let d = 2 * jm;
    let sample = |f: &MatrixFamily<T>| -> Vec<CMat<T>> {
        if phi.is_theta_identity() {
            f.to_grid(&grid)
        } else {
            phi.theta_map.iter().map(|t| f.eval(t)).collect()
        }
    };
    let b0 = sample(&parts.b0);
    let b1 = sample(&parts.b1);
    let a = sample(&parts.a);
    let hs = sample(&parts.hess);
    let half = cst::<T>(0.5);
    let len = grid.len();
    let mut nb0 = Vec::with_capacity(len);
    let mut nb1 = Vec::with_capacity(len);
    let mut na = Vec::with_capacity(len);
    let mut nh = Vec::with_capacity(len);
    for g in 0..len {
        let l = &phi.l[g];
        let w = CMat::from_fn(d, 1, |r, _| phi.translation[g][r]);
        let h1 = &b1[g];
        let mut hess = l.transpose().matmul(&hs[g]).matmul(l);
        let aw = a[g].add(&hs[g].matmul(&w));
        let mut lin = l.transpose().matmul(&aw);
        let mut c0 = b0[g][(0, 0)]
            + (0..d).map(|r| a[g][(r, 0)] * w[(r, 0)]).sum::<C<T>>()
            + w.transpose().matmul(&hs[g].matmul(&w))[(0, 0)] * half;
        for i in 0..n {
            let hi = h1[(i, 0)];
            if hi == czero() {
                continue;
            }
            hess.axpy(hi, &phi.m[g][i]);
            for r in 0..d {
                lin[(r, 0)] += hi * phi.y_lin[g][(i, r)];
            }
            c0 += hi * phi.y_offset[g][i];
        }
        nb1.push(phi.y_linear[g].transpose().matmul(h1));
        nb0.push(CMat::from_fn(1, 1, |_, _| c0));
        na.push(lin);
        nh.push(hess);
    }
    let (fb0, t0) = MatrixFamily::from_grid(&grid, &nb0, cutoff);
    let (fb1, t1) = MatrixFamily::from_grid(&grid, &nb1, cutoff);
    let (fa, t2) = MatrixFamily::from_grid(&grid, &na, cutoff);
    let (fh, t3) = MatrixFamily::from_grid(&grid, &nh, cutoff);
    let mut out = parts_to_taylor(n, jm, cutoff, &fb0, &fb1, &fa, &fh);
    out.degree_cap = h.degree_cap.max(2);
    Ok((out, t0 + t1 + t2 + t3))
}

/// `outer o inner` for maps on the same grid that fix the angles and act
/// as the identity on the linear part of `y`.
pub fn compose_maps<T: Real>(outer: &SymplecticMap<T>, inner: &SymplecticMap<T>) -> Result<SymplecticMap<T>, LieError> {
    if outer.grid != inner.grid || outer.modes != inner.modes || outer.n != inner.n {
        return Err(LieError::Dimension("maps live on different grids or spaces".into()));
    }
    for m in [outer, inner] {
        if !m.is_theta_identity() || !m.is_y_identity() {
            return Err(LieError::Unsupported("map composition with moving angles".into()));
        }
    }
    let (n, d) = (outer.n, 2 * outer.modes);
    let half = cst::<T>(0.5);
    let mut out = SymplecticMap::identity(n, outer.modes, outer.grid);
    for g in 0..outer.grid.len() {
        let (l1, l2) = (&outer.l[g], &inner.l[g]);
        let w2 = CMat::from_fn(d, 1, |r, _| inner.translation[g][r]);
        out.l[g] = l1.matmul(l2);
        let lw = l1.matmul(&w2);
        out.translation[g] = (0..d).map(|r| lw[(r, 0)] + outer.translation[g][r]).collect();
        for i in 0..n {
            let m1 = &outer.m[g][i];
            out.m[g][i] = inner.m[g][i].add(&l2.transpose().matmul(m1).matmul(l2));
            let mut row = w2.transpose().matmul(m1);
            for c in 0..d {
                row[(0, c)] += outer.y_lin[g][(i, c)];
            }
            let row = row.matmul(l2);
            for c in 0..d {
                out.y_lin[g][(i, c)] = inner.y_lin[g][(i, c)] + row[(0, c)];
            }
            let q = w2.transpose().matmul(&m1.matmul(&w2))[(0, 0)];
            let lin: C<T> = (0..d).map(|c| outer.y_lin[g][(i, c)] * w2[(c, 0)]).sum();
            out.y_offset[g][i] = inner.y_offset[g][i] + outer.y_offset[g][i] + q * half + lin;
        }
    }
    Ok(out)
}

fn write_row<T: Real, W: Write>(w: &mut W, vals: impl Iterator<Item = C<T>>) -> io::Result<()> {
    for v in vals {
        write!(w, " {} {}", fmt_roundtrip(v.re), fmt_roundtrip(v.im))?;
    }
    writeln!(w)
}

/// Per-grid-point dump. Each record is one line
/// `<tag> <g> <theta_1..theta_n> [<i>] (re im)*` with tags `L` (row-major
/// 2J x 2J), `w` (2J), `M` (action `i`, row-major 2J x 2J), `Y` (n x n),
/// `ylin` (row-major n x 2J) and `yoff` (n).
pub fn write_map_dump<T: Real, W: Write>(w: &mut W, map: &SymplecticMap<T>) -> io::Result<()> {
    writeln!(w, "# symplectic-map n={} J={} G={}", map.n, map.modes, map.grid.points)?;
    for g in 0..map.grid.len() {
        let th: Vec<String> = map.grid.theta::<T>(g).into_iter().map(fmt_roundtrip).collect();
        let th = th.join(" ");
        write!(w, "L {g} {th}")?;
        write_row(w, map.l[g].data.iter().cloned())?;
        write!(w, "w {g} {th}")?;
        write_row(w, map.translation[g].iter().cloned())?;
        for i in 0..map.n {
            write!(w, "M {g} {th} {i}")?;
            write_row(w, map.m[g][i].data.iter().cloned())?;
        }
        write!(w, "Y {g} {th}")?;
        write_row(w, map.y_linear[g].data.iter().cloned())?;
        write!(w, "ylin {g} {th}")?;
        write_row(w, map.y_lin[g].data.iter().cloned())?;
        write!(w, "yoff {g} {th}")?;
        write_row(w, map.y_offset[g].iter().cloned())?;
    }
    Ok(())
}

/// Fourier coefficients of `L`: one line `k_1..k_n row col re im` per nonzero entry.
pub fn write_l_fourier<T: Real, W: Write>(w: &mut W, map: &SymplecticMap<T>, cutoff: usize) -> io::Result<T> {
    let (fam, lost) = map.l_fourier(cutoff);
    writeln!(w, "# L fourier n={} J={} K={} dropped_l1={}", map.n, map.modes, cutoff, fmt_roundtrip(lost))?;
    for (k, m) in &fam.coeffs {
        let ks: Vec<String> = k.iter().map(|x| x.to_string()).collect();
        for r in 0..m.rows {
            for c in 0..m.cols {
                let v = m[(r, c)];
                if v != czero() {
                    writeln!(w, "{} {r} {c} {} {}", ks.join(" "), fmt_roundtrip(v.re), fmt_roundtrip(v.im))?;
                }
            }
        }
    }
    Ok(lost)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre::<f64>(10);
        for p in 0..20 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            assert!((s - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "{p}");
        }
    }
}
