use super::monomial::Monomial;
use crate::scalar::*;
use std::collections::BTreeMap;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum AlgebraError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("monomial of weighted degree {got} exceeds cap {cap}")]
    Degree { got: usize, cap: usize },
    #[error("Fourier index {got} exceeds cutoff {cutoff}")]
    Cutoff { got: usize, cutoff: usize },
    #[error("mode {mode} outside 1..={modes}")]
    Mode { mode: u32, modes: usize },
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Sparse Fourier-Taylor polynomial in `(theta, y, z, zbar)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorHamiltonian<T: Real> {
    /// Number of angles.
    pub n: usize,
    /// Number of normal modes `J`.
    pub modes: usize,
    /// Fourier cutoff `K` (sup norm of `k`).
    pub cutoff: usize,
    /// Weighted-degree cap `D`.
    pub degree_cap: usize,
    coeffs: BTreeMap<Monomial, C<T>>,
}

impl<T: Real> TaylorHamiltonian<T> {
    pub fn new(n: usize, modes: usize, cutoff: usize, degree_cap: usize) -> Self {
        TaylorHamiltonian { n, modes, cutoff, degree_cap, coeffs: BTreeMap::new() }
    }

    /// Empty Hamiltonian with the same shape as `other`.
    pub fn like(other: &Self) -> Self {
        Self::new(other.n, other.modes, other.cutoff, other.degree_cap)
    }

    pub fn with_shape(&self, cutoff: usize, degree_cap: usize) -> Self {
        let mut out = Self::new(self.n, self.modes, cutoff, degree_cap);
        for (k, &c) in &self.coeffs {
            if k.k_inf() <= cutoff && k.degree() <= degree_cap {
                out.coeffs.insert(k.clone(), c);
            }
        }
        out
    }

    fn check(&self, key: &Monomial, c: C<T>) -> Result<(), AlgebraError> {
        if key.k.len() != self.n || key.m.len() != self.n {
            return Err(AlgebraError::Dimension(format!("monomial has {} angles, expected {}", key.k.len(), self.n)));
        }
        if key.degree() > self.degree_cap {
            return Err(AlgebraError::Degree { got: key.degree(), cap: self.degree_cap });
        }
        if key.k_inf() > self.cutoff {
            return Err(AlgebraError::Cutoff { got: key.k_inf(), cutoff: self.cutoff });
        }
        let mm = key.max_mode();
        if mm as usize > self.modes || key.q.iter().chain(&key.qbar).any(|&j| j == 0) {
            return Err(AlgebraError::Mode { mode: mm, modes: self.modes });
        }
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(AlgebraError::NonFinite);
        }
        Ok(())
    }

    /// Add `c` to the coefficient of `key`.
    pub fn add_term(&mut self, key: Monomial, c: C<T>) -> Result<(), AlgebraError> {
        self.check(&key, c)?;
        self.add_unchecked(key, c);
        Ok(())
    }

    pub(crate) fn add_unchecked(&mut self, key: Monomial, c: C<T>) {
        if c == czero() {
            return;
        }
        let e = self.coeffs.entry(key).or_insert_with(czero);
        *e += c;
    }

    /// Overwrite the coefficient of `key`.
    pub fn set(&mut self, key: Monomial, c: C<T>) -> Result<(), AlgebraError> {
        self.check(&key, c)?;
        if c == czero() {
            self.coeffs.remove(&key);
        } else {
            self.coeffs.insert(key, c);
        }
        Ok(())
    }

    pub(crate) fn insert_raw(&mut self, key: Monomial, c: C<T>) {
        self.coeffs.insert(key, c);
    }

    pub fn get(&self, key: &Monomial) -> C<T> {
        self.coeffs.get(key).cloned().unwrap_or_else(czero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &C<T>)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest weighted degree present.
    pub fn max_degree(&self) -> usize {
        self.coeffs.keys().map(|k| k.degree()).max().unwrap_or(0)
    }

    pub fn max_k(&self) -> usize {
        self.coeffs.keys().map(|k| k.k_inf()).max().unwrap_or(0)
    }

    fn same_shape(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.n != other.n || self.modes != other.modes {
            return Err(AlgebraError::Dimension(format!(
                "(n, J) = ({}, {}) vs ({}, {})",
                self.n, self.modes, other.n, other.modes
            )));
        }
        Ok(())
    }

    /// Sum, with the larger cutoff and degree cap.
    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.same_shape(other)?;
        let mut out = Self::new(self.n, self.modes, self.cutoff.max(other.cutoff), self.degree_cap.max(other.degree_cap));
        out.coeffs = self.coeffs.clone();
        for (k, &c) in &other.coeffs {
            out.add_unchecked(k.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.scale(cplx(-T::one(), T::zero())))
    }

    pub fn scale(&self, a: C<T>) -> Self {
        let mut out = Self::like(self);
        if a == czero() {
            return out;
        }
        out.coeffs = self.coeffs.iter().map(|(k, &c)| (k.clone(), c * a)).collect();
        out
    }

    pub fn scale_re(&self, a: T) -> Self {
        self.scale(cplx(a, T::zero()))
    }

    /// In-place `self += a * other` (caller guarantees compatible shapes).
    pub fn axpy(&mut self, a: C<T>, other: &Self) {
        for (k, &c) in &other.coeffs {
            self.add_unchecked(k.clone(), a * c);
        }
    }

    /// Drop coefficients with modulus at most `tol`.
    pub fn prune(&mut self, tol: T) {
        self.coeffs.retain(|_, c| c.norm() > tol);
    }

    /// Sum of coefficient moduli.
    pub fn l1_mass(&self) -> T {
        compensated_sum(self.coeffs.values().map(|c| c.norm()))
    }

    pub fn max_coeff(&self) -> T {
        self.coeffs.values().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    /// Largest violation of `coeff(conj key) = conj(coeff(key))`.
    pub fn reality_defect(&self) -> T {
        let mut worst = T::zero();
        for (k, &c) in &self.coeffs {
            let partner = self.get(&k.conj());
            worst = worst.max((partner - c.conj()).norm());
        }
        worst
    }

    pub fn is_real(&self, tol: T) -> bool {
        self.reality_defect() <= tol
    }

    /// Replace every coefficient pair by its real-symmetric average.
    pub fn symmetrize_reality(&self) -> Self {
        let mut out = Self::like(self);
        let half = cst::<T>(0.5);
        for k in self.coeffs.keys() {
            for key in [k.clone(), k.conj()] {
                let v = (self.get(&key) + self.get(&key.conj()).conj()) * half;
                if v != czero() {
                    out.coeffs.insert(key, v);
                }
            }
        }
        out
    }

    /// Keep `|k|_inf <= cutoff`; returns the l1 mass of the dropped part.
    pub fn truncate_fourier(&self, cutoff: usize) -> (Self, T) {
        let mut out = Self::new(self.n, self.modes, cutoff, self.degree_cap);
        let mut lost = Vec::new();
        for (k, &c) in &self.coeffs {
            if k.k_inf() <= cutoff {
                out.coeffs.insert(k.clone(), c);
            } else {
                lost.push(c.norm());
            }
        }
        (out, compensated_sum(lost))
    }

    /// Split into the weighted-degree <= 2 part and the rest.
    pub fn taylor_truncate(&self) -> (Self, Self) {
        self.split_degree(2)
    }

    pub fn split_degree(&self, d: usize) -> (Self, Self) {
        let mut low = Self::like(self);
        let mut high = Self::like(self);
        for (k, &c) in &self.coeffs {
            if k.degree() <= d {
                low.coeffs.insert(k.clone(), c);
            } else {
                high.coeffs.insert(k.clone(), c);
            }
        }
        (low, high)
    }

    /// Terms of exactly degree `d`.
    pub fn degree_part(&self, d: usize) -> Self {
        let mut out = Self::like(self);
        for (k, &c) in &self.coeffs {
            if k.degree() == d {
                out.coeffs.insert(k.clone(), c);
            }
        }
        out
    }

    /// Normal-form projection: `k = 0` terms `y_i` and `z_j zbar_j`.
    pub fn mean_value(&self) -> Result<Self, AlgebraError> {
        if let Some(k) = self.coeffs.keys().find(|k| k.degree() > 2) {
            return Err(AlgebraError::Degree { got: k.degree(), cap: 2 });
        }
        let mut out = Self::like(self);
        for (k, &c) in &self.coeffs {
            if is_normal_key(k) {
                out.coeffs.insert(k.clone(), c);
            }
        }
        Ok(out)
    }

    /// Coefficient of the constant monomial.
    pub fn constant(&self) -> C<T> {
        self.get(&Monomial::one(self.n))
    }

    /// Evaluate at a (possibly complex) point.
    pub fn evaluate(&self, theta: &[C<T>], y: &[C<T>], z: &[C<T>], zbar: &[C<T>]) -> C<T> {
        assert_eq!(theta.len(), self.n);
        assert_eq!(y.len(), self.n);
        assert!(z.len() >= self.modes && zbar.len() >= self.modes);
        let mut acc_re = Vec::with_capacity(self.coeffs.len());
        let mut acc_im = Vec::with_capacity(self.coeffs.len());
        for (k, &c) in &self.coeffs {
            let mut phase = czero::<T>();
            for (ki, ti) in k.k.iter().zip(theta) {
                phase += *ti * from_i64::<T>(*ki as i64);
            }
            let mut v = c * (ci::<T>() * phase).exp();
            for (mi, yi) in k.m.iter().zip(y) {
                v *= yi.powu(*mi);
            }
            for &j in &k.q {
                v *= z[j as usize - 1];
            }
            for &j in &k.qbar {
                v *= zbar[j as usize - 1];
            }
            acc_re.push(v.re);
            acc_im.push(v.im);
        }
        cplx(compensated_sum(acc_re), compensated_sum(acc_im))
    }
}

/// `k = 0` and either a single `y_i` or a single `z_j zbar_j`.
pub fn is_normal_key(k: &Monomial) -> bool {
    if !k.is_k_zero() {
        return false;
    }
    let am = k.abs_m();
    (am == 1 && k.q.is_empty() && k.qbar.is_empty()) || (am == 0 && k.q.len() == 1 && k.q == k.qbar)
}

/// Normal form `omega.y + sum_j Omega_j z_j zbar_j`.
pub fn normal_form<T: Real>(omega: &[T], big_omega: &[T], cutoff: usize) -> TaylorHamiltonian<T> {
    let n = omega.len();
    let jm = big_omega.len();
    let mut h = TaylorHamiltonian::new(n, jm, cutoff, 2);
    for (i, &w) in omega.iter().enumerate() {
        let mut m = vec![0u32; n];
        m[i] = 1;
        h.add_unchecked(Monomial::new(&vec![0; n], &m, &[], &[]), cplx(w, T::zero()));
    }
    for (j, &w) in big_omega.iter().enumerate() {
        let jj = (j + 1) as u32;
        h.add_unchecked(Monomial::new(&vec![0; n], &vec![0; n], &[jj], &[jj]), cplx(w, T::zero()));
    }
    h
}
