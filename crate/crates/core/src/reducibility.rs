//! Reducibility of `i u_t = -u_xx + x^2 u + eps V(omega t, x) u` in the
//! Hermite basis: Galerkin matrices of `V`, the KAM run on the quadratic
//! class, and the reconstructions used to validate it.

use crate::divisors::{threshold, FrequencySet};
use crate::grid::{MatrixFamily, ThetaGrid};
use crate::hermite::{HermiteError, SpectralBasis};
use crate::kam::{self, IterationTrace, KamConfig, KamError, KamResult, Perturbation, ScheduleParams, Transformation};
use crate::lie::{GaugeMap, HermitianFamily, LieError, SymplecticMap};
use crate::linalg::CMat;
use crate::ode::{integrate, OdeError, OdeOptions};
use crate::scalar::*;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ReduceError {
    #[error("invalid input: {0}")]
    Config(String),
    #[error("resonant frequency: |k.omega| = {value:e} below {threshold:e} at k = {k:?}")]
    Resonance { k: Vec<i32>, value: f64, threshold: f64 },
    #[error(transparent)]
    Kam(#[from] KamError),
    #[error(transparent)]
    Hermite(#[from] HermiteError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("integrity check failed: {0}")]
    Integrity(String),
}

type Evaluator<T> = dyn Fn(&[T], T) -> T + Send + Sync;

/// Real potential `V(theta, x)`, `2 pi`-periodic in each angle.
#[derive(Clone)]
pub struct QuasiPeriodicPotential<T: Real> {
    pub n: usize,
    eval: Arc<Evaluator<T>>,
    /// Analyticity width in `theta`, when known.
    pub width: Option<T>,
    /// `(C, delta)` with `|V| <= C (1 + x^2)^-delta`, when known.
    pub decay: Option<(T, T)>,
    /// Fourier coefficients in `theta` for potentials that do not depend on `x`.
    pub harmonics: Option<Vec<(Vec<i32>, C<T>)>>,
    pub name: String,
}

impl<T: Real> fmt::Debug for QuasiPeriodicPotential<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuasiPeriodicPotential").field("n", &self.n).field("name", &self.name).finish()
    }
}

impl<T: Real> QuasiPeriodicPotential<T> {
    pub fn new(n: usize, name: impl Into<String>, f: impl Fn(&[T], T) -> T + Send + Sync + 'static) -> Self {
        QuasiPeriodicPotential { n, eval: Arc::new(f), width: None, decay: None, harmonics: None, name: name.into() }
    }

    pub fn zero(n: usize) -> Self {
        Self::x_independent(n, Vec::new())
    }

    /// `V = cos theta_1`.
    pub fn cos_theta(n: usize) -> Self {
        let mut k = vec![0; n];
        k[0] = 1;
        let mut km = vec![0; n];
        km[0] = -1;
        let half = cplx(cst(0.5), T::zero());
        let mut v = Self::x_independent(n, vec![(k, half), (km, half)]);
        v.name = "cos".into();
        v
    }

    /// `V = cos theta_1 / (1 + x^2)`.
    pub fn decaying_cos(n: usize) -> Self {
        let mut v = Self::new(n, "cos_decay", |th: &[T], x: T| th[0].cos() / (T::one() + x * x));
        v.width = Some(T::infinity());
        v.decay = Some((T::one(), T::one()));
        v
    }

    /// `V = sum_k a_k e^{i k.theta}`; the coefficients must come in conjugate
    /// pairs so that `V` is real.
    pub fn x_independent(n: usize, coeffs: Vec<(Vec<i32>, C<T>)>) -> Self {
        let cs = coeffs.clone();
        let mut v = Self::new(n, "harmonics", move |th: &[T], _x: T| {
            let mut acc = T::zero();
            for (k, a) in &cs {
                let ph: T = k.iter().zip(th).map(|(&a, &t)| from_i64::<T>(a as i64) * t).sum();
                acc += a.re * ph.cos() - a.im * ph.sin();
            }
            acc
        });
        v.width = Some(T::infinity());
        v.harmonics = Some(coeffs);
        v
    }

    pub fn eval(&self, theta: &[T], x: T) -> T {
        (self.eval)(theta, x)
    }

    /// Largest `|V(theta + 2 pi e_i, x) - V(theta, x)|` over a small sample,
    /// plus a flag for non-finite values.
    pub fn periodicity_defect(&self, points: usize) -> (T, bool) {
        let two_pi = T::PI() * cst(2.0);
        let mut worst = T::zero();
        let mut finite = true;
        let xs = [cst(-3.0), cst(-0.7), T::zero(), cst(1.3), cst(4.0)];
        for g in 0..points {
            let th: Vec<T> = (0..self.n).map(|i| two_pi * from_usize::<T>(g * (i + 1) + i) / from_usize::<T>(points)).collect();
            for &x in &xs {
                let v = self.eval(&th, x);
                finite &= v.is_finite();
                for i in 0..self.n {
                    let mut sh = th.clone();
                    sh[i] += two_pi;
                    worst = worst.max((self.eval(&sh, x) - v).abs());
                }
            }
        }
        (worst, finite)
    }

    /// Check that the coefficient list of an `x`-independent potential is
    /// conjugate-symmetric.
    fn harmonics_real(&self) -> bool {
        match &self.harmonics {
            None => true,
            Some(cs) => cs.iter().all(|(k, _)| {
                let km: Vec<i32> = k.iter().map(|x| -x).collect();
                let b: C<T> = cs.iter().filter(|(kk, _)| *kk == km).map(|(_, c)| *c).sum();
                let a_sum: C<T> = cs.iter().filter(|(kk, _)| kk == k).map(|(_, c)| *c).sum();
                (a_sum - b.conj()).norm() <= cst::<T>(1e-14) * a_sum.norm().max(T::one())
            }),
        }
    }
}

/// Galerkin matrices `B(theta)_{jl} = int V(theta, x) h_j h_l dx` as a
/// Fourier family, with the mass on the outermost shell.
#[derive(Clone, Debug)]
pub struct GalerkinPotential<T: Real> {
    pub q: HermitianFamily<T>,
    /// l1 mass on `|k|_inf = cutoff` relative to the total.
    pub shell_fraction: T,
    /// Resolved l1 mass beyond the cutoff.
    pub dropped: T,
}

pub fn build_q<T: Real>(
    v: &QuasiPeriodicPotential<T>,
    basis: &SpectralBasis<T>,
    cutoff: usize,
    grid: ThetaGrid,
) -> Result<GalerkinPotential<T>, ReduceError> {
    if grid.n != v.n {
        return Err(ReduceError::Config(format!("grid has {} angles, potential {}", grid.n, v.n)));
    }
    if grid.points < 2 * cutoff + 2 {
        return Err(ReduceError::Config(format!("grid of {} points cannot carry cutoff {}", grid.points, cutoff)));
    }
    let jm = basis.modes;
    let mut samples = Vec::with_capacity(grid.len());
    for g in 0..grid.len() {
        let th: Vec<T> = grid.theta(g);
        let vals: Vec<T> = basis.nodes.iter().map(|&x| v.eval(&th, x)).collect();
        if let Some(i) = vals.iter().position(|x| !x.is_finite()) {
            return Err(ReduceError::Config(format!("potential is not finite at node {i}")));
        }
        let m = basis.assemble_bilinear(&vals)?;
        samples.push(CMat::from_fn(jm, jm, |a, b| cplx(m[a * jm + b], T::zero())));
    }
    let (raw, dropped) = MatrixFamily::from_grid(&grid, &samples, cutoff);
    // enforce B_k = B_k^T and B_{-k} = conj(B_k)
    let mut fam = MatrixFamily::zeros(v.n, jm, jm);
    let half = cst::<T>(0.5);
    for (k, m) in &raw.coeffs {
        let km: Vec<i32> = k.iter().map(|x| -x).collect();
        let mirror = raw.coeffs.get(&km).map(|x| x.conj()).unwrap_or_else(|| CMat::zeros(jm, jm));
        let avg = m.add(&mirror).scale_re(half);
        let sym = avg.add(&avg.transpose()).scale_re(half);
        if sym.max_abs() > T::zero() {
            fam.coeffs.insert(k.clone(), sym);
        }
    }
    for (k, _) in raw.coeffs.iter() {
        let km: Vec<i32> = k.iter().map(|x| -x).collect();
        if !fam.coeffs.contains_key(&km) {
            if let Some(m) = fam.coeffs.get(k).map(|m| m.conj()) {
                fam.coeffs.insert(km, m);
            }
        }
    }
    let mut total = T::zero();
    let mut shell = T::zero();
    for (k, m) in &fam.coeffs {
        let w = m.entry_l1();
        total += w;
        if k.iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0) == cutoff {
            shell += w;
        }
    }
    let shell_fraction = if total > T::zero() { shell / total } else { T::zero() };
    if shell_fraction > cst(1e-10) {
        log::warn!("potential aliasing: shell |k| = {cutoff} carries {:e} of the Fourier mass", f64of(shell_fraction));
    }
    Ok(GalerkinPotential { q: HermitianFamily { fam }, shell_fraction, dropped })
}

/// Everything except the potential, `omega`, `eps` and the mode count.
#[derive(Clone, Debug)]
pub struct ReduceConfig<T> {
    pub alpha0: T,
    pub tau: T,
    pub s0: T,
    pub m0: T,
    pub t: T,
    pub c0: T,
    pub c1: T,
    pub k0: usize,
    pub k_cap: usize,
    pub r: T,
    pub beta: T,
    pub sobolev_p: T,
    pub max_steps: usize,
    pub target: T,
    pub strict: bool,
    pub eps_max: T,
    /// Quadrature nodes for the Galerkin matrices; `4 J` when absent.
    pub quad_nodes: Option<usize>,
    pub certify_modes: usize,
}

impl<T: Real> Default for ReduceConfig<T> {
    fn default() -> Self {
        ReduceConfig {
            alpha0: cst(0.05),
            tau: cst(2.0),
            s0: T::one(),
            m0: T::one(),
            t: cst(6.0),
            c0: cst(8.0),
            c1: cst(8.0),
            k0: 8,
            k_cap: 32,
            r: cst(0.5),
            beta: cst(0.5),
            sobolev_p: cst(2.0),
            max_steps: 10,
            target: cst(1e-13),
            strict: false,
            eps_max: cst(0.1),
            quad_nodes: None,
            certify_modes: 64,
        }
    }
}

impl<T: Real> ReduceConfig<T> {
    pub fn schedule_params(&self) -> ScheduleParams<T> {
        ScheduleParams {
            s0: self.s0,
            alpha0: self.alpha0,
            m0: self.m0,
            tau: self.tau,
            t: self.t,
            c0: self.c0,
            c1: self.c1,
            r0: T::one(),
            k0: Some(self.k0),
            max_nu: self.max_steps,
        }
    }

    pub fn kam_config(&self, modes: usize) -> KamConfig<T> {
        KamConfig {
            tau: self.tau,
            r: self.r,
            beta: self.beta,
            sobolev_p: self.sobolev_p,
            k_cap: self.k_cap,
            degree_cap: 2,
            max_steps: self.max_steps,
            target: self.target,
            strict: self.strict,
            series_tol: cst(1e-14),
            series_terms: 30,
            certify_modes: self.certify_modes.max(2 * modes),
        }
    }

    pub fn basis(&self, modes: usize) -> Result<SpectralBasis<T>, HermiteError> {
        SpectralBasis::build(modes, self.quad_nodes.unwrap_or(4 * modes).max(modes + 1))
    }
}

/// Floquet generator: eigenvalues `Omega*_j + k.omega`.
#[derive(Clone, Debug, PartialEq)]
pub struct FloquetSpectrum<T> {
    pub omega: Vec<T>,
    pub omega_star: Vec<T>,
}

impl<T: Real> FloquetSpectrum<T> {
    /// Eigenvalue for 1-based mode `j` and harmonic `k`.
    pub fn eigenvalue(&self, j: usize, k: &[i32]) -> T {
        self.omega_star[j - 1] + k.iter().zip(&self.omega).map(|(&a, &w)| from_i64::<T>(a as i64) * w).sum::<T>()
    }
}

#[derive(Clone, Debug)]
pub struct ReducibilityResult<T: Real> {
    pub omega: Vec<T>,
    pub eps: T,
    pub omega_star: Vec<T>,
    pub gauge: GaugeMap<T>,
    pub map: SymplecticMap<T>,
    pub trace: IterationTrace,
    pub floquet: FloquetSpectrum<T>,
    /// Galerkin matrices of `V` (without the factor `eps`).
    pub q: GalerkinPotential<T>,
    pub eps0: T,
    pub eps_final: T,
    pub converged: bool,
    pub tail_mass: T,
}

impl<T: Real> ReducibilityResult<T> {
    pub fn modes(&self) -> usize {
        self.omega_star.len()
    }

    pub fn normal_form(&self) -> FrequencySet<T> {
        FrequencySet::new(self.omega.clone(), self.omega_star.clone())
    }
}

fn unperturbed<T: Real>(omega: &[T], modes: usize) -> FrequencySet<T> {
    FrequencySet::constant_gap(omega.to_vec(), modes)
}

/// Run the KAM iteration for `N = omega.y + sum (2j-1) z_j zbar_j` and
/// `P = eps Q`.
pub fn reduce<T: Real>(
    v: &QuasiPeriodicPotential<T>,
    omega: &[T],
    eps: T,
    modes: usize,
    cfg: &ReduceConfig<T>,
) -> Result<ReducibilityResult<T>, ReduceError> {
    if omega.len() != v.n {
        return Err(ReduceError::Config(format!("{} frequencies for {} angles", omega.len(), v.n)));
    }
    if !(eps.abs() <= cfg.eps_max) {
        return Err(ReduceError::Config(format!("|eps| = {} exceeds the configured limit {}", eps, cfg.eps_max)));
    }
    if !v.harmonics_real() {
        return Err(ReduceError::Config("potential harmonics are not conjugate-symmetric".into()));
    }
    let (defect, finite) = v.periodicity_defect(7);
    if !finite || defect > cst(1e-10) {
        return Err(ReduceError::Config(format!("potential is not 2 pi periodic (defect {defect:e})")));
    }
    let basis = cfg.basis(modes)?;
    let kcfg = cfg.kam_config(modes);
    let grid = kcfg.grid(v.n);
    let q = build_q(v, &basis, cfg.k_cap, grid)?;
    let mut p = q.q.clone();
    for m in p.fam.coeffs.values_mut() {
        *m = m.scale_re(eps);
    }
    p.fam.coeffs.retain(|_, m| m.max_abs() > T::zero());
    let sched = kam::make_schedule(&cfg.schedule_params())?;
    let n0 = unperturbed(omega, modes);
    let res: KamResult<T> = kam::run(&n0, &Perturbation::Quadratic(p), &sched, &kcfg)?;
    let gauge = match res.transform {
        Transformation::Gauge(g) => g,
        Transformation::LieChain(_) => return Err(ReduceError::Integrity("quadratic class was left".into())),
    };
    let map = gauge.to_symplectic();
    let (d, at) = map.symplectic_defect();
    if !(d <= cst(1e-10)) {
        return Err(ReduceError::Integrity(format!("symplecticity defect {d:e} at grid point {at}")));
    }
    if !map.is_quadratic_class(T::zero()) {
        return Err(ReduceError::Integrity("map moves theta or translates Z".into()));
    }
    if res.freqs.omega.iter().zip(omega).any(|(a, b)| a != b) {
        return Err(ReduceError::Integrity("tangential frequencies drifted".into()));
    }
    let omega_star = res.freqs.big_omega.clone();
    Ok(ReducibilityResult {
        omega: omega.to_vec(),
        eps,
        floquet: FloquetSpectrum { omega: omega.to_vec(), omega_star: omega_star.clone() },
        omega_star,
        gauge,
        map,
        trace: res.trace,
        q,
        eps0: res.eps0,
        eps_final: res.eps_final,
        converged: res.converged,
        tail_mass: res.tail_mass,
    })
}

/// `W(theta) = exp(eps sum_k a_k / (k.omega) (e^{i k.theta} - 1))` on the
/// grid, for an `x`-independent potential with zero mean.
pub fn oracle_x_independent<T: Real>(
    harmonics: &[(Vec<i32>, C<T>)],
    omega: &[T],
    eps: T,
    grid: ThetaGrid,
    alpha: T,
    tau: T,
) -> Result<Vec<C<T>>, ReduceError> {
    let mut terms = Vec::new();
    for (k, a) in harmonics {
        if *a == czero() {
            continue;
        }
        if k.iter().all(|&x| x == 0) {
            return Err(ReduceError::Config("potential must have zero mean".into()));
        }
        let kw: T = compensated_sum(k.iter().zip(omega).map(|(&a, &w)| from_i64::<T>(a as i64) * w));
        let kl1 = k.iter().map(|x| x.unsigned_abs() as u64).sum();
        let thr = threshold(alpha, tau, kl1, 1);
        if !(kw.abs() >= thr) {
            return Err(ReduceError::Resonance { k: k.clone(), value: f64of(kw.abs()), threshold: f64of(thr) });
        }
        terms.push((k.clone(), *a / kw));
    }
    Ok((0..grid.len())
        .map(|g| {
            let th: Vec<T> = grid.theta(g);
            let mut s = czero::<T>();
            for (k, c) in &terms {
                let ph: T = k.iter().zip(&th).map(|(&a, &t)| from_i64::<T>(a as i64) * t).sum();
                s += *c * (cplx(ph.cos(), ph.sin()) - cone());
            }
            (s * eps).exp()
        })
        .collect())
}

/// Sampled solution of the truncated linear equation.
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<C<T>>>,
    /// `||z(t)||_{l2_p}` for `p = 0`.
    pub norm_p0: Vec<T>,
    /// `||z(t)||_{l2_p}` for `p = 2`.
    pub norm_p2: Vec<T>,
    pub evaluations: usize,
}

/// `(sum_j j^p |z_j|^2)^{1/2}`, modes 1-based.
pub fn weighted_norm<T: Real>(z: &[C<T>], p: T) -> T {
    z.iter().enumerate().map(|(j, c)| from_usize::<T>(j + 1).powf(p) * c.norm_sqr()).sum::<T>().sqrt()
}

/// Integrate `z' = -i (D + eps B(omega t)^T) z`, `D = diag(2j - 1)`, in the
/// interaction picture `w = e^{iDt} z`, sampling at `times`.
pub fn integrate_schrodinger<T: Real>(
    q: &HermitianFamily<T>,
    omega: &[T],
    eps: T,
    z0: &[C<T>],
    times: &[T],
    tol: T,
) -> Result<Trajectory<T>, ReduceError> {
    let jm = q.modes();
    if z0.len() != jm {
        return Err(ReduceError::Config(format!("state has {} modes, potential {}", z0.len(), jm)));
    }
    if !(tol <= cst(1e-9)) {
        return Err(ReduceError::Config("integration tolerance must be at most 1e-9".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().map_or(false, |&t| t < T::zero()) {
        return Err(ReduceError::Config("sample times must be increasing and non-negative".into()));
    }
    let d: Vec<T> = (1..=jm).map(|j| from_usize::<T>(2 * j - 1)).collect();
    let coeffs: Vec<(Vec<i32>, CMat<T>)> = q.fam.coeffs.iter().map(|(k, m)| (k.clone(), m.transpose())).collect();
    let mut b = CMat::zeros(jm, jm);
    let mut ph = vec![czero::<T>(); jm];
    let rhs = |t: T, w: &[C<T>], out: &mut [C<T>]| {
        b.data.iter_mut().for_each(|x| *x = czero());
        for (k, m) in &coeffs {
            let a: T = k.iter().zip(omega).map(|(&kk, &wv)| from_i64::<T>(kk as i64) * wv).sum::<T>() * t;
            b.axpy(cplx(a.cos(), a.sin()), m);
        }
        for (p, &dj) in ph.iter_mut().zip(&d) {
            let a = dj * t;
            *p = cplx(a.cos(), a.sin());
        }
        // w' = -i eps e^{iDt} B e^{-iDt} w
        for r in 0..jm {
            let mut acc = czero::<T>();
            for c in 0..jm {
                acc += b[(r, c)] * ph[c].conj() * w[c];
            }
            out[r] = acc * ph[r] * cplx(T::zero(), -eps);
        }
    };
    let opts = OdeOptions::tol(tol);
    let (ws, stats) = integrate(rhs, T::zero(), z0, times, &opts)?;
    let states: Vec<Vec<C<T>>> = ws
        .into_iter()
        .zip(times)
        .map(|(w, &t)| w.iter().zip(&d).map(|(x, &dj)| *x * cplx((dj * t).cos(), -(dj * t).sin())).collect())
        .collect();
    let norm_p0 = states.iter().map(|z| weighted_norm(z, T::zero())).collect();
    let norm_p2 = states.iter().map(|z| weighted_norm(z, cst(2.0))).collect();
    Ok(Trajectory { times: times.to_vec(), states, norm_p0, norm_p2, evaluations: stats.evaluations })
}

/// 1-norm condition number of the `z`-block of `L(0)`.
pub fn l0_condition<T: Real>(res: &ReducibilityResult<T>) -> Result<T, ReduceError> {
    let (u, _) = res.gauge.eval_at(&vec![T::zero(); res.omega.len()])?;
    let inv = u.inverse().map_err(|e| ReduceError::Integrity(format!("L(0) is singular: {e}")))?;
    Ok(u.norm1() * inv.norm1())
}

/// `z(t) = conj(U(omega t)) e^{-i Omega* t} conj(U(0))^{-1} z0`: the solution
/// predicted by the reduced normal form, in the coordinates of
/// [`integrate_schrodinger`].
pub fn kam_predicted_solution<T: Real>(res: &ReducibilityResult<T>, z0: &[C<T>], t: T) -> Result<Vec<C<T>>, ReduceError> {
    let jm = res.modes();
    if z0.len() != jm {
        return Err(ReduceError::Config(format!("state has {} modes, result {}", z0.len(), jm)));
    }
    let (u0, _) = res.gauge.eval_at(&vec![T::zero(); res.omega.len()])?;
    let b = CMat::from_fn(jm, 1, |r, _| z0[r]);
    let zp = u0.conj().solve(&b).map_err(|e| ReduceError::Integrity(format!("L(0) is singular: {e}")))?;
    let rot: Vec<C<T>> = (0..jm)
        .map(|j| {
            let a = res.omega_star[j] * t;
            zp[(j, 0)] * cplx(a.cos(), -a.sin())
        })
        .collect();
    let th: Vec<T> = res.omega.iter().map(|&w| w * t).collect();
    let (ut, _) = res.gauge.eval_at(&th)?;
    Ok(ut.conj().apply(&rot))
}

/// Residual of `psi_j(omega t) e^{-i Omega*_j t}` in the linear equation,
/// with `psi_j = conj(U) e_j`: the largest over grid angles and modes of
/// `|| omega.d_theta psi_j - i Omega*_j psi_j + i (D + eps B^T) psi_j ||`.
pub fn floquet_residual<T: Real>(res: &ReducibilityResult<T>) -> T {
    let jm = res.modes();
    let grid = res.gauge.grid;
    let psi: Vec<CMat<T>> = res.gauge.u.iter().map(|u| u.conj()).collect();
    let (fam, _) = MatrixFamily::from_grid(&grid, &psi, grid.max_cutoff());
    let mut dpsi = vec![CMat::zeros(jm, jm); grid.len()];
    for (i, &w) in res.omega.iter().enumerate() {
        for (acc, d) in dpsi.iter_mut().zip(fam.derivative(i).to_grid(&grid)) {
            acc.axpy(cplx(w, T::zero()), &d);
        }
    }
    let bq = res.q.q.to_grid(&grid);
    let mut worst = T::zero();
    for g in 0..grid.len() {
        let mut h = bq[g].transpose().scale_re(res.eps);
        for j in 0..jm {
            h[(j, j)] += cplx(from_usize::<T>(2 * j + 1), T::zero());
        }
        let hp = h.matmul(&psi[g]);
        for j in 0..jm {
            let mut s = T::zero();
            for r in 0..jm {
                let v = dpsi[g][(r, j)] - ci::<T>() * psi[g][(r, j)] * res.omega_star[j] + ci::<T>() * hp[(r, j)];
                s += v.norm_sqr();
            }
            worst = worst.max(s.sqrt());
        }
    }
    worst
}

/// Largest `|Omega*_j(J) - Omega*_j(2J)|` over `j <= J/2`.
pub fn truncation_stability<T: Real>(
    v: &QuasiPeriodicPotential<T>,
    omega: &[T],
    eps: T,
    modes: usize,
    cfg: &ReduceConfig<T>,
) -> Result<T, ReduceError> {
    let a = reduce(v, omega, eps, modes, cfg)?;
    let b = reduce(v, omega, eps, 2 * modes, cfg)?;
    Ok((0..modes / 2).map(|j| (a.omega_star[j] - b.omega_star[j]).abs()).fold(T::zero(), T::max))
}

/// Comparison of a reduction with the closed-form `x`-independent solution.
#[derive(Clone, Debug)]
pub struct OracleComparison<T> {
    /// `max_j |Omega*_j - (2j-1)|`.
    pub omega_defect: T,
    /// `max_g max_j |L_zz(theta_g)_jj - phase W(theta_g)|`.
    pub diagonal_defect: T,
    pub offdiagonal: T,
    /// Global constant phase, fitted by least squares.
    pub phase: C<T>,
}

/// Compares the z-block of the composed map with `W(theta)` from
/// [`oracle_x_independent`].
pub fn compare_with_oracle<T: Real>(
    res: &ReducibilityResult<T>,
    v: &QuasiPeriodicPotential<T>,
    alpha: T,
    tau: T,
) -> Result<OracleComparison<T>, ReduceError> {
    let h = v.harmonics.as_ref().ok_or_else(|| ReduceError::Config("potential is not x-independent".into()))?;
    let grid = res.map.grid;
    let w = oracle_x_independent(h, &res.omega, res.eps, grid, alpha, tau)?;
    let jm = res.modes();
    let omega_defect = res
        .omega_star
        .iter()
        .enumerate()
        .map(|(j, &x)| (x - from_usize::<T>(2 * j + 1)).abs())
        .fold(T::zero(), T::max);
    let blocks: Vec<CMat<T>> = res.map.l.iter().map(|l| l.block(0, 0, jm, jm)).collect();
    let mut acc = czero::<T>();
    for (b, wv) in blocks.iter().zip(&w) {
        for j in 0..jm {
            acc += b[(j, j)] * wv.conj();
        }
    }
    let phase = if acc.norm() > T::zero() { acc / acc.norm() } else { cone() };
    let mut diagonal_defect = T::zero();
    let mut offdiagonal = T::zero();
    for (b, wv) in blocks.iter().zip(&w) {
        for a in 0..jm {
            for c in 0..jm {
                if a == c {
                    diagonal_defect = diagonal_defect.max((b[(a, a)] - *wv * phase).norm());
                } else {
                    offdiagonal = offdiagonal.max(b[(a, c)].norm());
                }
            }
        }
    }
    Ok(OracleComparison { omega_defect, diagonal_defect, offdiagonal, phase })
}
