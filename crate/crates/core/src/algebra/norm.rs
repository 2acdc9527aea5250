use super::hamiltonian::{AlgebraError, TaylorHamiltonian};
use super::monomial::Monomial;
use crate::scalar::*;
use rustc_hash::FxHashMap;

/// Domain and weight parameters of the majorant norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormParams<T> {
    /// Angle strip width.
    pub s: T,
    /// Amplitude radius.
    pub r: T,
    /// Off-diagonal decay exponent.
    pub beta: T,
    /// Sobolev exponent `p` of the weight `Psi(j) = j^{p/2}`.
    pub sobolev_p: T,
}

impl<T: Real> NormParams<T> {
    pub fn new(s: T, r: T, beta: T, sobolev_p: T) -> Result<Self, AlgebraError> {
        let p = NormParams { s, r, beta, sobolev_p };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), AlgebraError> {
        if !(self.s > T::zero() && self.r > T::zero() && self.beta > T::zero()) {
            return Err(AlgebraError::Dimension("norm parameters s, r, beta must be positive".into()));
        }
        if !(self.sobolev_p >= cst(2.0)) {
            return Err(AlgebraError::Dimension("weight exponent p must be at least 2 so that Psi(j) >= j".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn psi(&self, j: u32) -> T {
        from_usize::<T>(j as usize).powf(self.sobolev_p / cst(2.0))
    }

    /// Majorant of the monomial on the domain: `e^{|k| s} r^{2|m|} prod r/Psi(j)`.
    pub fn rho(&self, key: &Monomial) -> T {
        let mut v = (from_usize::<T>(key.k_l1()) * self.s).exp() * self.r.powi(2 * key.abs_m() as i32);
        for &j in key.q.iter().chain(&key.qbar) {
            v *= self.r / self.psi(j);
        }
        v
    }
}

/// Componentwise upper bounds of the four defining conditions.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NormReport<T> {
    pub sup_part: T,
    pub y_deriv_part: T,
    pub z_deriv_part: T,
    pub zz_deriv_part: T,
    pub total: T,
}

/// Coefficient-majorant bound of the weighted norm of `h`.
pub fn majorant_norm<T: Real>(h: &TaylorHamiltonian<T>, p: &NormParams<T>) -> NormReport<T> {
    let r2 = p.r * p.r;
    let mut sup = Vec::with_capacity(h.len());
    let mut yd = vec![T::zero(); h.n];
    let mut zd: FxHashMap<u32, T> = FxHashMap::default();
    let mut zz: FxHashMap<(u32, u32), T> = FxHashMap::default();
    let inv_sqrt2 = T::one() / cst::<T>(2.0).sqrt();
    let half = cst::<T>(0.5);
    for (key, c) in h.iter() {
        let a = c.norm();
        let rho = p.rho(key);
        sup.push(a * rho / r2);
        for (i, &mi) in key.m.iter().enumerate() {
            if mi > 0 {
                yd[i] += a * from_usize::<T>(mi as usize) * rho / r2;
            }
        }
        let modes = mode_counts(key);
        for &(j, d) in &modes {
            // |d/du_j| <= (|d/dz_j| + |d/dzbar_j|)/sqrt(2)
            let v = a * from_usize::<T>(d as usize) * rho * p.psi(j) / p.r * inv_sqrt2;
            *zd.entry(j).or_insert(T::zero()) += v;
        }
        for (ia, &(ja, da)) in modes.iter().enumerate() {
            for &(jb, db) in &modes[ia..] {
                let mult = if ja == jb { da * (da.saturating_sub(1)) } else { da * db };
                if mult == 0 {
                    continue;
                }
                let v = a * from_usize::<T>(mult as usize) * rho * p.psi(ja) * p.psi(jb) / r2 * half;
                *zz.entry((ja, jb)).or_insert(T::zero()) += v;
            }
        }
    }
    let sup_part = compensated_sum(sup);
    let y_deriv_part = yd.into_iter().fold(T::zero(), T::max);
    let z_deriv_part = zd
        .into_iter()
        .map(|(j, v)| from_usize::<T>(j as usize).powf(p.beta) * v)
        .fold(T::zero(), T::max);
    let zz_deriv_part = zz
        .into_iter()
        .map(|((a, b), v)| (from_usize::<T>(a as usize) * from_usize::<T>(b as usize)).powf(p.beta) * v)
        .fold(T::zero(), T::max);
    let total = sup_part.max(y_deriv_part).max(z_deriv_part).max(zz_deriv_part);
    NormReport { sup_part, y_deriv_part, z_deriv_part, zz_deriv_part, total }
}

/// `(mode, multiplicity in q and qbar together)`, sorted by mode.
fn mode_counts(key: &Monomial) -> Vec<(u32, u32)> {
    let mut out: Vec<(u32, u32)> = Vec::new();
    for &j in key.q.iter().chain(&key.qbar) {
        match out.iter_mut().find(|e| e.0 == j) {
            Some(e) => e.1 += 1,
            None => out.push((j, 1)),
        }
    }
    out.sort_unstable();
    out
}

/// The `(1 + |j - l|)`-weighted second-derivative component (diagnostic only).
pub fn majorant_plus_zz<T: Real>(h: &TaylorHamiltonian<T>, p: &NormParams<T>) -> T {
    let r2 = p.r * p.r;
    let mut zz: FxHashMap<(u32, u32), T> = FxHashMap::default();
    for (key, c) in h.iter() {
        let rho = p.rho(key);
        let modes = mode_counts(key);
        for (ia, &(ja, da)) in modes.iter().enumerate() {
            for &(jb, db) in &modes[ia..] {
                let mult = if ja == jb { da * da.saturating_sub(1) } else { da * db };
                if mult > 0 {
                    *zz.entry((ja, jb)).or_insert(T::zero()) +=
                        c.norm() * from_usize::<T>(mult as usize) * rho * p.psi(ja) * p.psi(jb) / r2 * cst(0.5);
                }
            }
        }
    }
    zz.into_iter()
        .map(|((a, b), v)| {
            let w = (from_usize::<T>(a as usize) * from_usize::<T>(b as usize)).powf(p.beta);
            w * (T::one() + from_usize::<T>((a as i64 - b as i64).unsigned_abs() as usize)) * v
        })
        .fold(T::zero(), T::max)
}

/// Majorant of the weighted Hamiltonian vector field
/// `|P_y| + |P_theta| / r^2 + (||P_z||_Psi + ||P_zbar||_Psi) / r`.
pub fn vector_field_majorant<T: Real>(h: &TaylorHamiltonian<T>, p: &NormParams<T>) -> T {
    let r2 = p.r * p.r;
    let mut py = T::zero();
    let mut pt = T::zero();
    let mut pz: FxHashMap<u32, T> = FxHashMap::default();
    let mut pzb: FxHashMap<u32, T> = FxHashMap::default();
    for (key, c) in h.iter() {
        let a = c.norm();
        let rho = p.rho(key);
        py += a * from_usize::<T>(key.abs_m()) * rho / r2;
        pt += a * from_usize::<T>(key.k_l1()) * rho;
        for (j, d) in key.q_powers() {
            *pz.entry(j).or_insert(T::zero()) += a * from_usize::<T>(d as usize) * rho * p.psi(j) / p.r;
        }
        for (j, d) in key.qbar_powers() {
            *pzb.entry(j).or_insert(T::zero()) += a * from_usize::<T>(d as usize) * rho * p.psi(j) / p.r;
        }
    }
    let wnorm = |m: FxHashMap<u32, T>| -> T {
        let mut v: Vec<(u32, T)> = m.into_iter().collect();
        v.sort_by_key(|e| e.0);
        compensated_sum(v.into_iter().map(|(j, x)| (x * p.psi(j)).powi(2))).sqrt()
    };
    py + pt / r2 + (wnorm(pz) + wnorm(pzb)) / p.r
}

/// Max finite-difference quotient of the majorant over a parameter grid.
pub fn lipschitz_seminorm<T: Real>(samples: &[(Vec<T>, TaylorHamiltonian<T>)], p: &NormParams<T>) -> Result<T, AlgebraError> {
    if samples.len() < 2 {
        return Err(AlgebraError::Dimension("Lipschitz quotient needs at least two parameter points".into()));
    }
    let mut best = T::zero();
    for a in 0..samples.len() {
        for b in a + 1..samples.len() {
            let dist = samples[a]
                .0
                .iter()
                .zip(&samples[b].0)
                .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()));
            if dist == T::zero() {
                continue;
            }
            let diff = samples[a].1.sub(&samples[b].1)?;
            best = best.max(majorant_norm(&diff, p).total / dist);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> NormParams<f64> {
        NormParams::new(0.3, 0.5, 0.5, 2.0).unwrap()
    }

    #[test]
    fn zero_and_single_terms() {
        let p = params();
        let h = TaylorHamiltonian::<f64>::new(1, 3, 2, 2);
        assert_eq!(majorant_norm(&h, &p), NormReport::default());
        let mut h = TaylorHamiltonian::<f64>::new(1, 3, 2, 2);
        h.add_term(Monomial::new(&[1], &[0], &[], &[]), cplx(0.4, -0.3)).unwrap();
        let rep = majorant_norm(&h, &p);
        assert!((rep.sup_part - 0.5 * 0.3f64.exp() / 0.25).abs() < 1e-14);
        let mut h = TaylorHamiltonian::<f64>::new(1, 3, 2, 2);
        h.add_term(Monomial::new(&[0], &[0], &[3], &[3]), cplx(2.0, 0.0)).unwrap();
        let rep = majorant_norm(&h, &p);
        assert!((rep.zz_deriv_part - 3f64.powf(2.0 * 0.5) * 2.0).abs() < 1e-13);
    }

    #[test]
    fn majorant_dominates_point_values() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let mut h = TaylorHamiltonian::<f64>::new(2, 4, 3, 4);
            for _ in 0..30 {
                let k = [rng.gen_range(-3..=3), rng.gen_range(-3..=3)];
                let m = [rng.gen_range(0..=1u32), 0];
                let nz = rng.gen_range(0..=4 - 2 * m[0] as usize);
                let q: Vec<u32> = (0..nz).map(|_| rng.gen_range(1..=4)).collect();
                let split = rng.gen_range(0..=nz);
                h.add_term(Monomial::new(&k, &m, &q[..split], &q[split..]), cplx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .unwrap();
            }
            let rep = majorant_norm(&h, &p);
            for _ in 0..100 {
                let th: Vec<C<f64>> = (0..2).map(|_| cplx(rng.gen_range(0.0..6.3), rng.gen_range(-p.s..p.s) * 0.999)).collect();
                let rad = |rng: &mut ChaCha8Rng, bound: f64| {
                    let a = rng.gen_range(0.0..bound * 0.999);
                    let ph = rng.gen_range(0.0..6.3f64);
                    cplx(a * ph.cos(), a * ph.sin())
                };
                let y: Vec<C<f64>> = (0..2).map(|_| rad(&mut rng, p.r * p.r)).collect();
                let z: Vec<C<f64>> = (1..=4).map(|j| rad(&mut rng, p.r / p.psi(j))).collect();
                let zb: Vec<C<f64>> = (1..=4).map(|j| rad(&mut rng, p.r / p.psi(j))).collect();
                let v = h.evaluate(&th, &y, &z, &zb).norm();
                assert!(v < p.r * p.r * rep.sup_part);
            }
        }
    }

    #[test]
    fn truncation_tail_scales_linearly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = params();
        let eta = 1.0 / 8.0;
        let mut ps = p;
        ps.r = eta * p.r;
        for _ in 0..20 {
            let mut h = TaylorHamiltonian::<f64>::new(1, 3, 2, 3);
            for _ in 0..15 {
                let k = [rng.gen_range(-2..=2)];
                let deg = rng.gen_range(0..=3usize);
                let m = if deg >= 2 && rng.gen_bool(0.3) { 1 } else { 0 };
                let nz = deg - 2 * m as usize;
                let q: Vec<u32> = (0..nz).map(|_| rng.gen_range(1..=3)).collect();
                let split = rng.gen_range(0..=nz);
                h.add_term(Monomial::new(&k, &[m], &q[..split], &q[split..]), cplx(rng.gen_range(-1.0..1.0), 0.0)).unwrap();
            }
            let (_, tail) = h.taylor_truncate();
            let lhs = majorant_norm(&tail, &ps).total;
            let rhs = eta * majorant_norm(&h, &p).total;
            assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
        }
    }

    #[test]
    fn lipschitz_needs_two_points() {
        let p = params();
        let h = TaylorHamiltonian::<f64>::new(1, 1, 0, 2);
        assert!(lipschitz_seminorm(&[(vec![0.0], h.clone())], &p).is_err());
        let mut h2 = h.clone();
        h2.add_term(Monomial::new(&[0], &[1], &[], &[]), cplx(0.1, 0.0)).unwrap();
        let l = lipschitz_seminorm(&[(vec![0.0], h), (vec![0.5], h2)], &p).unwrap();
        assert!((l - 0.2).abs() < 1e-14);
    }
}
