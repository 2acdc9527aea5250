use super::LieError;
use crate::algebra::{Monomial, TaylorHamiltonian};
use crate::grid::{MatrixFamily, ThetaGrid};
use crate::linalg::CMat;
use crate::scalar::*;

/// `F = b0(theta) + b1(theta).y + a(theta).Z + 1/2 Z.A(theta) Z` with
/// `Z = (z_1..z_J, zbar_1..zbar_J)`.
///
/// Each part is a matrix-valued trigonometric polynomial: `b0` is 1x1, `b1`
/// is n x 1, `a` is 2J x 1 and `hess` is the symmetric 2J x 2J Hessian.
#[derive(Clone, Debug)]
pub struct QuadraticGenerator<T: Real> {
    pub n: usize,
    pub modes: usize,
    pub cutoff: usize,
    pub grid: ThetaGrid,
    pub b0: MatrixFamily<T>,
    pub b1: MatrixFamily<T>,
    pub a: MatrixFamily<T>,
    pub hess: MatrixFamily<T>,
}

pub fn decompose<T: Real>(f: &TaylorHamiltonian<T>, grid: ThetaGrid) -> Result<QuadraticGenerator<T>, LieError> {
    let (n, jm) = (f.n, f.modes);
    if grid.n != n {
        return Err(LieError::Dimension(format!("grid has {} angles, Hamiltonian {}", grid.n, n)));
    }
    let cutoff = f.max_k();
    if grid.points < 2 * cutoff + 1 {
        return Err(LieError::GridTooCoarse { points: grid.points, cutoff });
    }
    let mut g = QuadraticGenerator {
        n,
        modes: jm,
        cutoff,
        grid,
        b0: MatrixFamily::zeros(n, 1, 1),
        b1: MatrixFamily::zeros(n, n, 1),
        a: MatrixFamily::zeros(n, 2 * jm, 1),
        hess: MatrixFamily::zeros(n, 2 * jm, 2 * jm),
    };
    for (key, &c) in f.iter() {
        if key.degree() > 2 {
            return Err(LieError::Degree(key.clone()));
        }
        let k = key.k.to_vec();
        let am = key.abs_m();
        if am == 1 {
            let i = key.m.iter().position(|&x| x == 1).unwrap();
            g.b1.entry_mut(k)[(i, 0)] += c;
            continue;
        }
        if am > 1 {
            return Err(LieError::NotLinearInY(key.clone()));
        }
        let idx: Vec<usize> =
            key.q.iter().map(|&j| j as usize - 1).chain(key.qbar.iter().map(|&j| jm + j as usize - 1)).collect();
        match idx.len() {
            0 => g.b0.entry_mut(k)[(0, 0)] += c,
            1 => g.a.entry_mut(k)[(idx[0], 0)] += c,
            _ => {
                let h = g.hess.entry_mut(k);
                let (r, s) = (idx[0], idx[1]);
                if r == s {
                    h[(r, r)] += c * cst::<T>(2.0);
                } else {
                    h[(r, s)] += c;
                    h[(s, r)] += c;
                }
            }
        }
    }
    Ok(g)
}

impl<T: Real> QuadraticGenerator<T> {
    pub fn is_y_independent(&self) -> bool {
        self.b1.coeffs.values().all(|m| m.max_abs() == T::zero())
    }

    /// Reassemble the generator as a Taylor Hamiltonian with the given cutoff.
    pub fn recompose(&self, cutoff: usize) -> TaylorHamiltonian<T> {
        parts_to_taylor(self.n, self.modes, cutoff, &self.b0, &self.b1, &self.a, &self.hess)
    }

    /// Hessian samples on the generator grid.
    pub fn hess_grid(&self) -> Vec<CMat<T>> {
        self.hess.to_grid(&self.grid)
    }
}

pub(crate) fn parts_to_taylor<T: Real>(
    n: usize,
    jm: usize,
    cutoff: usize,
    b0: &MatrixFamily<T>,
    b1: &MatrixFamily<T>,
    a: &MatrixFamily<T>,
    hess: &MatrixFamily<T>,
) -> TaylorHamiltonian<T> {
    let mut h = TaylorHamiltonian::new(n, jm, cutoff, 2);
    let z = czero::<T>();
    let half = cst::<T>(0.5);
    let var = |i: usize| -> (Vec<u32>, Vec<u32>) {
        if i < jm {
            (vec![i as u32 + 1], vec![])
        } else {
            (vec![], vec![(i - jm) as u32 + 1])
        }
    };
    for (k, m) in &b0.coeffs {
        if m[(0, 0)] != z {
            h.add_unchecked(Monomial::fourier(k), m[(0, 0)]);
        }
    }
    for (k, m) in &b1.coeffs {
        for i in 0..n {
            if m[(i, 0)] != z {
                let mut e = vec![0u32; n];
                e[i] = 1;
                h.add_unchecked(Monomial::new(k, &e, &[], &[]), m[(i, 0)]);
            }
        }
    }
    let zero_m = vec![0u32; n];
    for (k, m) in &a.coeffs {
        for i in 0..2 * jm {
            if m[(i, 0)] != z {
                let (q, qb) = var(i);
                h.add_unchecked(Monomial::new(k, &zero_m, &q, &qb), m[(i, 0)]);
            }
        }
    }
    for (k, m) in &hess.coeffs {
        for r in 0..2 * jm {
            for s in r..2 * jm {
                let c = if r == s { m[(r, r)] * half } else { (m[(r, s)] + m[(s, r)]) * half };
                if c != z {
                    let (mut q, mut qb) = var(r);
                    let (q2, qb2) = var(s);
                    q.extend(q2);
                    qb.extend(qb2);
                    h.add_unchecked(Monomial::new(k, &zero_m, &q, &qb), c);
                }
            }
        }
    }
    h
}
