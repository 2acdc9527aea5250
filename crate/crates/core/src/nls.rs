//! Nonlinear Schrodinger equation with a parameter-dependent potential:
//! the potential family, the perturbed spectrum, non-degeneracy checks and
//! the Fourier-Taylor expansion of the nonlinearity about an
//! `n`-dimensional torus.

use crate::algebra::{Monomial, TaylorHamiltonian};
use crate::divisors::{certify, sample_point, FrequencySet};
use crate::hermite::{hermite_values, HermiteError, SpectralBasis};
use crate::kam::{self, IterationTrace, KamConfig, KamError, Perturbation, ScheduleParams};
use crate::linalg::{sym_eigen, CMat};
use crate::scalar::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum NlsError {
    #[error("invalid input: {0}")]
    Config(String),
    #[error("singular Gram matrix of Hermite squares")]
    SingularGram,
    #[error("spectrum is not simple: lambda_{j} = {a}, lambda_{} = {b}", j + 1)]
    Degenerate { j: usize, a: f64, b: f64 },
    #[error("eigenvectors lost orthonormality ({0:e})")]
    Orthonormality(f64),
    #[error(transparent)]
    Hermite(#[from] HermiteError),
    #[error(transparent)]
    Kam(#[from] KamError),
}

/// Quadrature exact for products of Hermite-type functions carrying
/// `e^{-s x^2}` overall: nodes `x_q / sqrt(s)`, weights `w_q / sqrt(s)`.
#[derive(Clone, Debug)]
pub struct ScaledRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> ScaledRule<T> {
    pub fn new(basis: &SpectralBasis<T>, s: usize) -> Self {
        let r = from_usize::<T>(s.max(1)).sqrt();
        ScaledRule { nodes: basis.nodes.iter().map(|&x| x / r).collect(), weights: basis.weights.iter().map(|&w| w / r).collect() }
    }

    /// `table[j-1][q] = h_j(node_q)` for `j = 1..=count`.
    pub fn hermite_table(&self, count: usize) -> Vec<Vec<T>> {
        let mut t = vec![vec![T::zero(); self.nodes.len()]; count];
        for (q, &x) in self.nodes.iter().enumerate() {
            for (j, v) in hermite_values(count, x).into_iter().enumerate() {
                t[j][q] = v;
            }
        }
        t
    }

    pub fn integrate(&self, f: impl Fn(usize) -> T) -> T {
        compensated_sum(self.weights.iter().enumerate().map(|(q, &w)| w * f(q)))
    }
}

/// Coefficients `c_j` with `f_j = sum_i c_j[i] h_i^2` and
/// `int f_j h_k^2 = delta_jk`, `j, k = 1..=n`.
pub fn dual_basis<T: Real>(n: usize, basis: &SpectralBasis<T>) -> Result<Vec<Vec<T>>, NlsError> {
    if n == 0 {
        return Err(NlsError::Config("need n >= 1".into()));
    }
    let g = hermite_square_gram(n, basis);
    let gm = CMat::from_fn(n, n, |a, b| cplx(g[a * n + b], T::zero()));
    let inv = gm.inverse().map_err(|_| NlsError::SingularGram)?;
    // G is symmetric: column j of G^{-1} solves G c = e_j
    Ok((0..n).map(|j| (0..n).map(|i| inv[(i, j)].re).collect()).collect())
}

/// `G_ik = int h_i^2 h_k^2`, row-major `n x n`.
pub fn hermite_square_gram<T: Real>(n: usize, basis: &SpectralBasis<T>) -> Vec<T> {
    let rule = ScaledRule::new(basis, 2);
    let h = rule.hermite_table(n);
    let mut g = vec![T::zero(); n * n];
    for i in 0..n {
        for k in i..n {
            let v = rule.integrate(|q| h[i][q] * h[i][q] * h[k][q] * h[k][q]);
            g[i * n + k] = v;
            g[k * n + i] = v;
        }
    }
    g
}

/// `mu_kj` in `h_j^2(x) = sum_{k <= j} mu_kj h_{2k-1}(sqrt2 x)`, by quadrature.
pub fn square_expansion<T: Real>(k: usize, j: usize, basis: &SpectralBasis<T>) -> T {
    let rule = ScaledRule::new(basis, 2);
    let two = cst::<T>(2.0).sqrt();
    let count = j.max(2 * k - 1);
    let h = rule.hermite_table(j);
    // h_{2k-1}(sqrt2 x) at x = x_q / sqrt2 is h_{2k-1}(x_q)
    let hs: Vec<T> = basis.nodes.iter().map(|&x| hermite_values(count, x)[2 * k - 2]).collect();
    two * rule.integrate(|q| h[j - 1][q] * h[j - 1][q] * hs[q])
}

/// `V(xi, x) = sum_k xi_k f_k(x) + xi_1 g(x)`, `g = sum_{k > n} alpha_k e^{-k} h_{2k-1}(sqrt2 x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialFamily<T> {
    pub n: usize,
    pub dual: Vec<Vec<T>>,
    /// `alpha[i]` belongs to `k = n + 1 + i`.
    pub alpha: Vec<T>,
    pub seed: u64,
    pub k_max: usize,
}

impl<T: Real> PotentialFamily<T> {
    pub fn new(n: usize, k_max: usize, seed: u64, basis: &SpectralBasis<T>) -> Result<Self, NlsError> {
        let dual = dual_basis(n, basis)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha = (n + 1..=k_max).map(|_| cst::<T>(rng.gen_range(-0.5..=0.5))).collect();
        Ok(PotentialFamily { n, dual, alpha, seed, k_max })
    }

    fn g_coeff(&self, k: usize) -> T {
        self.alpha[k - self.n - 1] * (-from_usize::<T>(k)).exp()
    }

    pub fn f(&self, j: usize, x: T) -> T {
        let h = hermite_values(self.n, x);
        self.dual[j - 1].iter().zip(&h).map(|(&c, &v)| c * v * v).sum()
    }

    pub fn g(&self, x: T) -> T {
        if self.k_max <= self.n {
            return T::zero();
        }
        let h = hermite_values(2 * self.k_max - 1, cst::<T>(2.0).sqrt() * x);
        (self.n + 1..=self.k_max).map(|k| self.g_coeff(k) * h[2 * k - 2]).sum()
    }

    pub fn eval(&self, xi: &[T], x: T) -> T {
        (1..=self.n).map(|k| xi[k - 1] * self.f(k, x)).sum::<T>() + xi[0] * self.g(x)
    }
}

/// The family's Galerkin matrices on `J` Hermite modes: `F_k` for each `f_k`
/// and `G` for `g`, all exact by the `e^{-2x^2}` rule.
#[derive(Clone, Debug)]
pub struct GalerkinFamily<T: Real> {
    pub family: PotentialFamily<T>,
    pub modes: usize,
    pub fk: Vec<Vec<T>>,
    pub g: Vec<T>,
    rule: ScaledRule<T>,
    table: Vec<Vec<T>>,
}

impl<T: Real> GalerkinFamily<T> {
    pub fn new(family: PotentialFamily<T>, basis: &SpectralBasis<T>) -> Result<Self, NlsError> {
        let jm = basis.modes;
        let need = jm + family.n.max(family.k_max);
        if basis.order < need {
            return Err(NlsError::Config(format!("quadrature order {} below {need} for exact Galerkin matrices", basis.order)));
        }
        let rule = ScaledRule::new(basis, 2);
        let table = rule.hermite_table(jm.max(family.n));
        let nq = rule.nodes.len();
        let fvals: Vec<Vec<T>> = (0..family.n)
            .map(|k| (0..nq).map(|q| (0..family.n).map(|i| family.dual[k][i] * table[i][q] * table[i][q]).sum()).collect())
            .collect();
        let gvals: Vec<T> = if family.k_max > family.n {
            basis
                .nodes
                .iter()
                .map(|&x| {
                    let h = hermite_values(2 * family.k_max - 1, x);
                    (family.n + 1..=family.k_max).map(|k| family.g_coeff(k) * h[2 * k - 2]).sum()
                })
                .collect()
        } else {
            vec![T::zero(); nq]
        };
        let mat = |v: &[T]| -> Vec<T> {
            let mut m = vec![T::zero(); jm * jm];
            for a in 0..jm {
                for b in a..jm {
                    let x = rule.integrate(|q| v[q] * table[a][q] * table[b][q]);
                    m[a * jm + b] = x;
                    m[b * jm + a] = x;
                }
            }
            m
        };
        let fk = fvals.iter().map(|v| mat(v)).collect();
        let g = mat(&gvals);
        Ok(GalerkinFamily { family, modes: jm, fk, g, rule, table })
    }

    pub fn n(&self) -> usize {
        self.family.n
    }

    /// `int V(xi) h_a h_b`, row-major.
    pub fn potential_matrix(&self, xi: &[T]) -> Vec<T> {
        let jm = self.modes;
        let mut m = vec![T::zero(); jm * jm];
        for (k, f) in self.fk.iter().enumerate() {
            for (o, v) in m.iter_mut().zip(f) {
                *o += xi[k] * *v;
            }
        }
        for (o, v) in m.iter_mut().zip(&self.g) {
            *o += xi[0] * *v;
        }
        m
    }

    /// Matrix of `f_k + delta_{1k} g`, `k` 1-based.
    pub fn direction_matrix(&self, k: usize) -> Vec<T> {
        let mut m = self.fk[k - 1].clone();
        if k == 1 {
            for (o, v) in m.iter_mut().zip(&self.g) {
                *o += *v;
            }
        }
        m
    }

    /// `h_j(x_q / sqrt2)` on the `e^{-2x^2}` rule.
    pub fn rule(&self) -> (&ScaledRule<T>, &[Vec<T>]) {
        (&self.rule, &self.table)
    }
}

#[derive(Clone, Debug)]
pub struct PerturbedSpectrum<T> {
    pub lambda: Vec<T>,
    /// `phi[j][i]`: coefficient of `h_{i+1}` in `phi_{j+1}`.
    pub phi: Vec<Vec<T>>,
    pub nu: T,
    pub xi: Vec<T>,
}

impl<T: Real> PerturbedSpectrum<T> {
    pub fn internal(&self, n: usize) -> Vec<T> {
        self.lambda[..n].to_vec()
    }

    pub fn external(&self, n: usize) -> Vec<T> {
        self.lambda[n..].to_vec()
    }

    /// `||phi_j - h_j||_{l2}`, `j` 1-based.
    pub fn distance_to_hermite(&self, j: usize) -> T {
        self.phi[j - 1].iter().enumerate().map(|(i, &c)| if i + 1 == j { (c - T::one()).powi(2) } else { c * c }).sum::<T>().sqrt()
    }
}

fn quad_form<T: Real>(m: &[T], c: &[T]) -> T {
    let n = c.len();
    let mut s = T::zero();
    for a in 0..n {
        let row: T = (0..n).map(|b| m[a * n + b] * c[b]).sum();
        s += c[a] * row;
    }
    s
}

/// Eigenpairs of `diag(2j - 1) + nu B(xi)` with `<phi_j, h_j> > 0`.
pub fn perturbed_spectrum<T: Real>(gal: &GalerkinFamily<T>, nu: T, xi: &[T]) -> Result<PerturbedSpectrum<T>, NlsError> {
    let n = gal.n();
    if xi.len() != n {
        return Err(NlsError::Config(format!("xi has {} entries, expected {n}", xi.len())));
    }
    if !(nu >= T::zero()) || xi.iter().any(|x| !(x.abs() <= T::one())) {
        return Err(NlsError::Config("need nu >= 0 and xi in [-1, 1]^n".into()));
    }
    let jm = gal.modes;
    let mut a = gal.potential_matrix(xi);
    for v in a.iter_mut() {
        *v *= nu;
    }
    for j in 0..jm {
        a[j * jm + j] += from_usize::<T>(2 * j + 1);
    }
    let (vals, vecs) = sym_eigen(&a, jm);
    let mut phi: Vec<Vec<T>> = (0..jm).map(|j| (0..jm).map(|i| vecs[i * jm + j]).collect()).collect();
    for (j, p) in phi.iter_mut().enumerate() {
        if p[j] < T::zero() {
            p.iter_mut().for_each(|x| *x = -*x);
        }
    }
    for j in 1..jm {
        if !(vals[j] > vals[j - 1]) {
            return Err(NlsError::Degenerate { j, a: f64of(vals[j - 1]), b: f64of(vals[j]) });
        }
    }
    let mut worst = T::zero();
    for a in 0..jm {
        for b in a..jm {
            let d: T = phi[a].iter().zip(&phi[b]).map(|(x, y)| *x * *y).sum();
            let want = if a == b { T::one() } else { T::zero() };
            worst = worst.max((d - want).abs());
        }
    }
    if worst > cst(1e-10) {
        return Err(NlsError::Orthonormality(f64of(worst)));
    }
    Ok(PerturbedSpectrum { lambda: vals, phi, nu, xi: xi.to_vec() })
}

/// `d lambda_j / d xi_k` from `nu int (f_k + delta_{1k} g) phi_j^2` and by a
/// central difference of step `h`.
pub fn frequency_derivative_check<T: Real>(gal: &GalerkinFamily<T>, nu: T, xi: &[T], j: usize, k: usize, h: T) -> Result<(T, T), NlsError> {
    let sp = perturbed_spectrum(gal, nu, xi)?;
    let analytic = nu * quad_form(&gal.direction_matrix(k), &sp.phi[j - 1]);
    let mut plus = xi.to_vec();
    let mut minus = xi.to_vec();
    plus[k - 1] += h;
    minus[k - 1] -= h;
    let lp = perturbed_spectrum(gal, nu, &plus)?.lambda[j - 1];
    let lm = perturbed_spectrum(gal, nu, &minus)?.lambda[j - 1];
    Ok((analytic, (lp - lm) / (cst::<T>(2.0) * h)))
}

fn dist_to_int<T: Real>(x: T) -> T {
    (x - x.round()).abs()
}

#[derive(Clone, Debug)]
pub struct NondegeneracyReport<T> {
    /// `(p, dist(int (f_1 + g) h_{n+p}^2, Z))`.
    pub single: Vec<(usize, T)>,
    /// Smallest distance over `p != q` and both signs.
    pub pair_min: (usize, usize, i32, T),
    /// Smallest `|k.lambda + l.Lambda|` seen over the samples.
    pub min_divisor: T,
    pub excluded_fraction: T,
    pub samples: usize,
    pub seed: u64,
}

/// Integrality checks in the `xi_1` direction and a sampled divisor scan.
#[allow(clippy::too_many_arguments)]
pub fn nondegeneracy_scan<T: Real>(
    gal: &GalerkinFamily<T>,
    nu: T,
    kmax: usize,
    jmax: usize,
    samples: usize,
    seed: u64,
    alpha: T,
    tau: T,
) -> Result<NondegeneracyReport<T>, NlsError> {
    let n = gal.n();
    let jm = gal.modes;
    if jmax + n > jm {
        return Err(NlsError::Config(format!("jmax {jmax} exceeds the {} available external modes", jm - n)));
    }
    if !(nu <= cst(0.05)) {
        return Err(NlsError::Config("scan expects nu <= 0.05".into()));
    }
    let d1 = gal.direction_matrix(1);
    let diag: Vec<T> = (0..jm).map(|i| d1[i * jm + i]).collect();
    let single: Vec<(usize, T)> = (1..=jmax).map(|p| (p, dist_to_int(diag[n + p - 1]))).collect();
    let mut pair_min = (0, 0, 0, T::infinity());
    for p in 1..=jmax {
        for q in 1..p {
            for s in [1i32, -1] {
                let v = diag[n + p - 1] + from_i64::<T>(s as i64) * diag[n + q - 1];
                let d = dist_to_int(v);
                if d < pair_min.3 {
                    pair_min = (p, q, s, d);
                }
            }
        }
    }
    let bounds = vec![(-T::one(), T::one()); n];
    let mut min_divisor = T::infinity();
    let mut excluded = 0usize;
    for s in 0..samples {
        let xi = sample_point(&bounds, seed, s as u64);
        let sp = perturbed_spectrum(gal, nu, &xi)?;
        let f = FrequencySet::new(sp.internal(n), sp.external(n)[..jmax].to_vec());
        let rep = certify(&f, alpha, tau, kmax, jmax);
        if let Some((_, v, _)) = &rep.worst {
            min_divisor = min_divisor.min(v.abs());
        }
        if !rep.passed {
            excluded += 1;
        }
    }
    let excluded_fraction = if samples > 0 { from_usize::<T>(excluded) / from_usize::<T>(samples) } else { T::zero() };
    Ok(NondegeneracyReport { single, pair_min, min_divisor, excluded_fraction, samples, seed })
}

fn gen_binom<T: Real>(a: T, r: u32) -> T {
    let mut c = T::one();
    for i in 0..r {
        c = c * (a - from_usize::<T>(i as usize)) / from_usize::<T>(i as usize + 1);
    }
    c
}

/// Multisets of size `size` over `0..symbols` as count vectors, each with
/// its multinomial coefficient.
fn multisets(symbols: usize, size: usize) -> Vec<(Vec<u32>, u64)> {
    fn rec(pos: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left as u32;
            out.push(cur.clone());
            return;
        }
        for c in (0..=left).rev() {
            cur[pos] = c as u32;
            rec(pos + 1, left - c, cur, out);
        }
    }
    let mut raw = Vec::new();
    if symbols == 0 {
        return Vec::new();
    }
    rec(0, size, &mut vec![0; symbols], &mut raw);
    let fact = |k: u32| (1..=k as u64).product::<u64>();
    raw.into_iter()
        .map(|c| {
            let mult = fact(size as u32) / c.iter().map(|&x| fact(x)).product::<u64>();
            (c, mult)
        })
        .collect()
}

/// Parameters of the torus expansion.
#[derive(Clone, Debug)]
pub struct TorusExpansion<T> {
    /// Actions `I_j > 0`.
    pub actions: Vec<T>,
    pub eps: T,
    /// Nonlinearity power `m` in `|u|^{2m} u`.
    pub m: usize,
    /// Weighted degree cap.
    pub degree: usize,
}

fn check_expansion<T: Real>(sp: &PerturbedSpectrum<T>, n: usize, ex: &TorusExpansion<T>) -> Result<(), NlsError> {
    if ex.actions.len() != n || ex.actions.iter().any(|&a| !(a > T::zero())) {
        return Err(NlsError::Config("need n positive actions".into()));
    }
    if ex.m == 0 || ex.degree < 2 {
        return Err(NlsError::Config("need m >= 1 and degree cap >= 2".into()));
    }
    if sp.lambda.len() <= n {
        return Err(NlsError::Config("no external modes".into()));
    }
    Ok(())
}

/// Values `phi_j(x_q / sqrt(m+1))` on the rule exact for `|u|^{2(m+1)}`.
fn phi_on_rule<T: Real>(sp: &PerturbedSpectrum<T>, basis: &SpectralBasis<T>, m: usize) -> (ScaledRule<T>, Vec<Vec<T>>) {
    let rule = ScaledRule::new(basis, m + 1);
    let jm = sp.lambda.len();
    let h = rule.hermite_table(jm);
    let nq = rule.nodes.len();
    let vals = (0..jm).map(|j| (0..nq).map(|q| (0..jm).map(|i| sp.phi[j][i] * h[i][q]).sum()).collect()).collect();
    (rule, vals)
}

/// Fourier-Taylor coefficients of `P = eps int |u|^{2(m+1)}` about
/// `y = 0, z = 0`, with
/// `u = sum_j (y_j + I_j)^{1/2} e^{i theta_j} phi_j + sum_j z_j phi_{j+n}`,
/// up to the weighted degree cap. The `theta` dependence is a finite sum, so
/// the expansion is exact in `theta`; `y` enters through the binomial series.
pub fn build_p<T: Real>(
    sp: &PerturbedSpectrum<T>,
    n: usize,
    ex: &TorusExpansion<T>,
    basis: &SpectralBasis<T>,
) -> Result<TaylorHamiltonian<T>, NlsError> {
    check_expansion(sp, n, ex)?;
    let jm = sp.lambda.len();
    let jext = jm - n;
    let mm = ex.m + 1;
    if basis.order < mm * jm {
        log::warn!("quadrature order {} is below (m+1) J = {}; the expansion integrals are inexact", basis.order, mm * jm);
    }
    let (rule, vals) = phi_on_rule(sp, basis, ex.m);
    let nq = rule.nodes.len();
    let sides = multisets(jm, mm);
    let ext_count = |c: &[u32]| c[n..].iter().sum::<u32>() as usize;
    let mut out = TaylorHamiltonian::new(n, jext, mm, ex.degree);
    let mut cache: HashMap<Vec<u32>, T> = HashMap::new();
    let mut prod = vec![T::zero(); nq];
    for (u, mu) in &sides {
        let p = ext_count(u);
        if p > ex.degree {
            continue;
        }
        for (ub, mub) in &sides {
            let qn = ext_count(ub);
            if p + qn > ex.degree {
                continue;
            }
            let total: Vec<u32> = u.iter().zip(ub).map(|(a, b)| a + b).collect();
            let integral = *cache.entry(total.clone()).or_insert_with(|| {
                prod.iter_mut().for_each(|x| *x = T::one());
                for (j, &e) in total.iter().enumerate() {
                    for _ in 0..e {
                        for (o, v) in prod.iter_mut().zip(&vals[j]) {
                            *o *= *v;
                        }
                    }
                }
                rule.integrate(|q| prod[q])
            });
            let base = ex.eps * from_usize::<T>((*mu * *mub) as usize) * integral;
            let k: Vec<i32> = (0..n).map(|j| u[j] as i32 - ub[j] as i32).collect();
            let q: Vec<u32> = (n..jm).flat_map(|j| std::iter::repeat((j - n + 1) as u32).take(u[j] as usize)).collect();
            let qb: Vec<u32> = (n..jm).flat_map(|j| std::iter::repeat((j - n + 1) as u32).take(ub[j] as usize)).collect();
            let ybudget = (ex.degree - p - qn) / 2;
            // product over internal modes of binomial series in y_j
            let mut terms: Vec<(Vec<u32>, T)> = vec![(Vec::new(), T::one())];
            for j in 0..n {
                let a = from_usize::<T>(total[j] as usize) * cst(0.5);
                let mut next = Vec::new();
                for (ms, c) in &terms {
                    let used: u32 = ms.iter().sum();
                    for r in 0..=(ybudget as u32 - used) {
                        let coef = gen_binom(a, r) * ex.actions[j].powf(a - from_usize::<T>(r as usize));
                        if coef == T::zero() {
                            continue;
                        }
                        let mut m2 = ms.clone();
                        m2.push(r);
                        next.push((m2, *c * coef));
                    }
                }
                terms = next;
            }
            for (ms, c) in terms {
                let key = Monomial::new(&k, &ms, &q, &qb);
                out.add_unchecked(key, cplx(base * c, T::zero()));
            }
        }
    }
    out.prune(T::zero());
    Ok(out)
}

/// `eps int |u|^{2(m+1)}` at a phase-space point, evaluated directly on the
/// quadrature grid.
pub fn evaluate_p<T: Real>(
    sp: &PerturbedSpectrum<T>,
    n: usize,
    ex: &TorusExpansion<T>,
    basis: &SpectralBasis<T>,
    theta: &[T],
    y: &[T],
    z: &[C<T>],
) -> Result<T, NlsError> {
    check_expansion(sp, n, ex)?;
    let jm = sp.lambda.len();
    if z.len() != jm - n || theta.len() != n || y.len() != n {
        return Err(NlsError::Config("point has the wrong shape".into()));
    }
    let (rule, vals) = phi_on_rule(sp, basis, ex.m);
    let e = from_usize::<T>(ex.m + 1);
    Ok(ex.eps
        * rule.integrate(|q| {
            let mut u = czero::<T>();
            for j in 0..n {
                let a = (y[j] + ex.actions[j]).sqrt();
                u += cplx(theta[j].cos(), theta[j].sin()) * a * vals[j][q];
            }
            for (i, zz) in z.iter().enumerate() {
                u += *zz * vals[n + i][q];
            }
            u.norm_sqr().powf(e)
        }))
}

#[derive(Clone, Debug)]
pub struct NlsConfig<T> {
    pub alpha0: T,
    pub tau: T,
    pub s0: T,
    pub k0: usize,
    pub k_cap: usize,
    pub r: T,
    pub beta: T,
    pub sobolev_p: T,
    pub degree: usize,
    pub max_steps: usize,
    pub target: T,
    /// `C_0` in `nu >= C_0 eps`.
    pub c0_ratio: T,
    pub strict: bool,
}

impl<T: Real> Default for NlsConfig<T> {
    fn default() -> Self {
        NlsConfig {
            alpha0: cst(1e-3),
            tau: cst(2.0),
            s0: T::one(),
            k0: 8,
            k_cap: 16,
            r: cst(0.5),
            beta: cst(0.5),
            sobolev_p: cst(2.0),
            degree: 4,
            max_steps: 3,
            target: cst(1e-14),
            c0_ratio: cst(10.0),
            strict: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NlsRunReport<T: Real> {
    pub trace: IterationTrace,
    pub omega0: Vec<T>,
    pub omega_start: Vec<T>,
    pub omega_star: Vec<T>,
    pub big_omega_star: Vec<T>,
    /// `max_j |omega*_j - (2j - 1)| / nu`.
    pub drift_constant: T,
    /// Degree-`<= 2` majorants after each step, starting with the input.
    pub quadratic_majorants: Vec<T>,
    pub full_majorants: Vec<T>,
    pub tail_mass: T,
    pub p_terms: usize,
}

impl<T: Real> NlsRunReport<T> {
    /// Ratio of the degree-`<= 2` majorant after the first step to before it.
    pub fn first_step_ratio(&self) -> Option<T> {
        (self.quadratic_majorants.len() >= 2).then(|| self.quadratic_majorants[1] / self.quadratic_majorants[0])
    }
}

/// A few Newton steps on `N + P` about the torus of actions `I`.
pub fn nls_kam_run<T: Real>(
    gal: &GalerkinFamily<T>,
    basis: &SpectralBasis<T>,
    xi: &[T],
    nu: T,
    ex: &TorusExpansion<T>,
    cfg: &NlsConfig<T>,
) -> Result<NlsRunReport<T>, NlsError> {
    let n = gal.n();
    if !(nu >= cfg.c0_ratio * ex.eps) {
        return Err(NlsError::Config(format!("need nu >= C0 eps ({} < {} * {})", nu, cfg.c0_ratio, ex.eps)));
    }
    if !(cfg.r < ex.actions.iter().cloned().fold(T::infinity(), T::min)) {
        return Err(NlsError::Config("need r < min I_j".into()));
    }
    let sp = perturbed_spectrum(gal, nu, xi)?;
    let jext = gal.modes - n;
    let f0 = FrequencySet::new(sp.internal(n), sp.external(n));
    let kcfg = KamConfig {
        tau: cfg.tau,
        r: cfg.r,
        beta: cfg.beta,
        sobolev_p: cfg.sobolev_p,
        k_cap: cfg.k_cap,
        degree_cap: cfg.degree,
        max_steps: cfg.max_steps,
        target: cfg.target,
        strict: cfg.strict,
        series_tol: cst(1e-14),
        series_terms: 30,
        certify_modes: jext,
    };
    let sched = kam::make_schedule(&ScheduleParams {
        s0: cfg.s0,
        alpha0: cfg.alpha0,
        m0: T::one(),
        tau: cfg.tau,
        t: cst(6.0),
        c0: cst(8.0),
        c1: cst(8.0),
        r0: T::one(),
        k0: Some(cfg.k0),
        max_nu: cfg.max_steps,
    })?;
    let cert = certify(&f0, sched.alpha[0], cfg.tau, sched.k[0].min(cfg.k_cap), jext);
    if !cert.passed {
        let detail = match &cert.worst {
            Some((idx, v, thr)) => format!("k = {:?}, l = {:?}: |{}| < {}", idx.k, idx.l, f64of(*v), f64of(*thr)),
            None => String::new(),
        };
        return Err(KamError::Resonance { nu: 0, detail }.into());
    }
    let h = build_p(&sp, n, ex, basis)?;
    let p_terms = h.len();
    let p = Perturbation::General(h);
    let res = kam::run(&f0, &p, &sched, &kcfg)?;
    let omega0: Vec<T> = (1..=n).map(|j| from_usize::<T>(2 * j - 1)).collect();
    let drift = res.freqs.omega.iter().zip(&omega0).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max);
    let mut quad: Vec<T> = res.trace.records.iter().map(|r| cst(r.eps_quadratic)).collect();
    let mut full: Vec<T> = res.trace.records.iter().map(|r| cst(r.eps_majorant)).collect();
    quad.push(res.eps_final_quadratic);
    full.push(res.eps_final);
    Ok(NlsRunReport {
        trace: res.trace,
        omega_start: f0.omega.clone(),
        omega0,
        omega_star: res.freqs.omega.clone(),
        big_omega_star: res.freqs.big_omega.clone(),
        drift_constant: if nu > T::zero() { drift / nu } else { T::zero() },
        quadratic_majorants: quad,
        full_majorants: full,
        tail_mass: res.tail_mass,
        p_terms,
    })
}
