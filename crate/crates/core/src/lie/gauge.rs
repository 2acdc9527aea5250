use super::map::SymplecticMap;
use super::LieError;
use crate::algebra::{Monomial, TaylorHamiltonian};
use crate::grid::{MatrixFamily, ThetaGrid};
use crate::linalg::CMat;
use crate::scalar::*;

/// `sum_{a,b} B_ab(theta) z_a zbar_b`, the phase-invariant quadratic class.
/// A real Hamiltonian has Hermitian `B(theta)` at real angles.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianFamily<T: Real> {
    pub fam: MatrixFamily<T>,
}

impl<T: Real> HermitianFamily<T> {
    pub fn zeros(n: usize, modes: usize) -> Self {
        HermitianFamily { fam: MatrixFamily::zeros(n, modes, modes) }
    }

    pub fn n(&self) -> usize {
        self.fam.n
    }

    pub fn modes(&self) -> usize {
        self.fam.rows
    }

    /// Extract the `z_a zbar_b` keys; any other key is an error.
    pub fn from_taylor(h: &TaylorHamiltonian<T>) -> Result<Self, LieError> {
        let mut out = Self::zeros(h.n, h.modes);
        for (key, &c) in h.iter() {
            if key.abs_m() != 0 || key.q.len() != 1 || key.qbar.len() != 1 {
                return Err(LieError::Unsupported(format!("key {key:?} outside the z zbar class")));
            }
            out.fam.entry_mut(key.k.to_vec())[(key.q[0] as usize - 1, key.qbar[0] as usize - 1)] += c;
        }
        Ok(out)
    }

    pub fn to_taylor(&self, cutoff: usize) -> TaylorHamiltonian<T> {
        let (n, jm) = (self.n(), self.modes());
        let mut h = TaylorHamiltonian::new(n, jm, cutoff.max(self.fam.max_k()), 2);
        let m0 = vec![0u32; n];
        for (k, m) in &self.fam.coeffs {
            for a in 0..jm {
                for b in 0..jm {
                    let c = m[(a, b)];
                    if c != czero() {
                        h.add_unchecked(Monomial::new(k, &m0, &[a as u32 + 1], &[b as u32 + 1]), c);
                    }
                }
            }
        }
        h
    }

    pub fn eval_at(&self, theta: &[T]) -> CMat<T> {
        self.fam.eval(theta)
    }

    pub fn to_grid(&self, grid: &ThetaGrid) -> Vec<CMat<T>> {
        self.fam.to_grid(grid)
    }

    pub fn from_grid(grid: &ThetaGrid, samples: &[CMat<T>], cutoff: usize) -> (Self, T) {
        let (fam, lost) = MatrixFamily::from_grid(grid, samples, cutoff);
        (HermitianFamily { fam }, lost)
    }

    pub fn truncate(&self, cutoff: usize) -> (Self, Self) {
        let mut lo = Self::zeros(self.n(), self.modes());
        let mut hi = Self::zeros(self.n(), self.modes());
        for (k, m) in &self.fam.coeffs {
            let target = if k.iter().all(|x| x.unsigned_abs() as usize <= cutoff) { &mut lo } else { &mut hi };
            target.fam.coeffs.insert(k.clone(), m.clone());
        }
        (lo, hi)
    }

    pub fn derivative(&self, i: usize) -> Self {
        HermitianFamily { fam: self.fam.derivative(i) }
    }
}

/// `K_i = -sum_n i^n ad_C^n(dC_i) / (n+1)!`, the y-shift generated along
/// the flow of `z^T C zbar`.
fn shift_series<T: Real>(c: &CMat<T>, dc: &CMat<T>) -> Result<CMat<T>, LieError> {
    let mut term = dc.clone();
    let mut sum = dc.clone();
    let i = ci::<T>();
    for n in 1..200 {
        term = c.commutator(&term).scale(i / from_usize::<T>(n + 1));
        sum.add_assign(&term);
        if term.max_abs() <= T::epsilon() * cst(1e-2) * sum.max_abs().max(T::min_positive_value()) {
            return Ok(sum.scale_re(-T::one()));
        }
    }
    Err(LieError::SeriesDiverged(200))
}

/// Time-one map of a generator `z^T C(theta) zbar`:
/// `z -> U z` with `U = exp(i C^T)`, `zbar -> conj(U) zbar`, and
/// `y -> y + z^T K(theta) zbar`, sampled on a grid. The generators of each
/// composed step are kept so the map can be evaluated off the grid.
#[derive(Clone, Debug)]
pub struct GaugeMap<T: Real> {
    pub n: usize,
    pub modes: usize,
    pub grid: ThetaGrid,
    pub u: Vec<CMat<T>>,
    /// `k[g][i]` for action `i`.
    pub k: Vec<Vec<CMat<T>>>,
    pub generators: Vec<HermitianFamily<T>>,
}

fn step_at<T: Real>(c: &CMat<T>, dc: &[CMat<T>]) -> Result<(CMat<T>, Vec<CMat<T>>), LieError> {
    let u = c.transpose().scale(ci()).expm();
    let k = dc.iter().map(|d| shift_series(c, d)).collect::<Result<Vec<_>, _>>()?;
    Ok((u, k))
}

impl<T: Real> GaugeMap<T> {
    pub fn identity(n: usize, modes: usize, grid: ThetaGrid) -> Self {
        GaugeMap {
            n,
            modes,
            grid,
            u: vec![CMat::identity(modes); grid.len()],
            k: vec![vec![CMat::zeros(modes, modes); n]; grid.len()],
            generators: Vec::new(),
        }
    }

    pub fn time_one(c: &HermitianFamily<T>, grid: ThetaGrid) -> Result<Self, LieError> {
        let (n, jm) = (c.n(), c.modes());
        let cg = c.to_grid(&grid);
        let dg: Vec<Vec<CMat<T>>> = (0..n).map(|i| c.derivative(i).to_grid(&grid)).collect();
        let mut out = Self::identity(n, jm, grid);
        for g in 0..grid.len() {
            let d: Vec<CMat<T>> = dg.iter().map(|v| v[g].clone()).collect();
            let (u, k) = step_at(&cg[g], &d)?;
            out.u[g] = u;
            out.k[g] = k;
        }
        out.generators.push(c.clone());
        Ok(out)
    }

    /// `self <- self o step`.
    pub fn then(&mut self, step: &GaugeMap<T>) {
        for g in 0..self.grid.len() {
            let (u, k) = compose_point(&self.u[g], &self.k[g], &step.u[g], &step.k[g]);
            self.u[g] = u;
            self.k[g] = k;
        }
        self.generators.extend(step.generators.iter().cloned());
    }

    /// `(U, K)` at an arbitrary angle, rebuilt from the stored generators.
    pub fn eval_at(&self, theta: &[T]) -> Result<(CMat<T>, Vec<CMat<T>>), LieError> {
        let mut u = CMat::identity(self.modes);
        let mut k = vec![CMat::zeros(self.modes, self.modes); self.n];
        for c in &self.generators {
            let cm = c.eval_at(theta);
            let d: Vec<CMat<T>> = (0..self.n).map(|i| c.derivative(i).eval_at(theta)).collect();
            let (us, ks) = step_at(&cm, &d)?;
            let (nu, nk) = compose_point(&u, &k, &us, &ks);
            u = nu;
            k = nk;
        }
        Ok((u, k))
    }

    /// Grid samples of `B o Phi`: `U^T B conj(U) + omega.K`.
    pub fn conjugate(&self, omega: &[T], b: &[CMat<T>]) -> Vec<CMat<T>> {
        (0..self.grid.len())
            .map(|g| {
                let u = &self.u[g];
                let mut out = u.transpose().matmul(&b[g]).matmul(&u.conj());
                for (w, k) in omega.iter().zip(&self.k[g]) {
                    out.axpy(cplx(*w, T::zero()), k);
                }
                out
            })
            .collect()
    }

    pub fn to_symplectic(&self) -> SymplecticMap<T> {
        let jm = self.modes;
        let mut map = SymplecticMap::identity(self.n, jm, self.grid);
        for g in 0..self.grid.len() {
            let mut l = CMat::zeros(2 * jm, 2 * jm);
            l.set_block(0, 0, &self.u[g]);
            l.set_block(jm, jm, &self.u[g].conj());
            map.l[g] = l;
            for i in 0..self.n {
                let mut m = CMat::zeros(2 * jm, 2 * jm);
                m.set_block(0, jm, &self.k[g][i]);
                m.set_block(jm, 0, &self.k[g][i].transpose());
                map.m[g][i] = m;
            }
        }
        map
    }
}

fn compose_point<T: Real>(u: &CMat<T>, k: &[CMat<T>], us: &CMat<T>, ks: &[CMat<T>]) -> (CMat<T>, Vec<CMat<T>>) {
    let nu = u.matmul(us);
    let ubar = us.conj();
    let nk = k.iter().zip(ks).map(|(k0, k1)| k1.add(&us.transpose().matmul(k0).matmul(&ubar))).collect();
    (nu, nk)
}
